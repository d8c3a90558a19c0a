"""
Bound-period ladders I_p(c), free/bound decomposition of orbits, essential returns and parameter windows
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
import pydash as py_

from circle_map import circle_distance, critical_set_for
from errors import DegenerateLadder, LadderExhausted
from logger import logger
from orbit import critical_orbit, compute_ladder, truncate_trace

DEEP = "deep"
SHALLOW = "shallow"

image_samples = 33
image_refine_cap = 1 << 16
amendment_threshold = 1.0 / 3.0


@dataclass(frozen=True)
class BoundPeriodLadder(object):
    """
    radii[p - 1] = r_p = sqrt(L^-1 D_p(c_0)) for p = 1..horizon, strictly decreasing
    """

    c: float
    critical_index: int
    radii: np.ndarray

    @property
    def horizon(self):
        return len(self.radii)


@dataclass(frozen=True)
class ReturnEvent(object):
    time: int
    bound_to: int
    depth: float
    depth_index: int
    bound_period: int
    kind: str
    essential: bool = False
    exhausted: bool = False

    def to_row(self):
        return [self.time, self.bound_to, self.depth, self.depth_index, self.bound_period, self.kind,
                int(self.essential)]


@dataclass(frozen=True)
class Decomposition(object):
    """
    events are the free returns; segments are ('free' | 'bound', first, last) runs tiling [0, horizon]
    """

    events: tuple
    segments: tuple
    horizon: int
    mode: str
    critical_index: int = -1


@dataclass(frozen=True)
class ParameterWindow(object):
    center: float
    raw: tuple
    amended: tuple
    image_length: float
    D_n: float = field(default=float("nan"))


def build_ladder(trace, beta):
    """
    The ladder of the critical point a critical trace starts from. When d_i underflows the ladder stops at i.
    """
    try:
        ladder = compute_ladder(trace, beta)
    except DegenerateLadder as exception:
        logger.info("Ladder cut at {} for c={}, a={}, L={}".format(
            exception.index, trace.critical_index, trace.a, trace.L))
        ladder = compute_ladder(truncate_trace(trace, exception.index), beta)
    radii = np.sqrt(ladder.D[1:] / trace.L)
    return BoundPeriodLadder(c=trace.origin, critical_index=trace.critical_index, radii=radii)


def assign_bound_period(ladder, phi):
    """
    The p with |phi - c| in (r_{p+1}, r_p]

    :param ladder: The ladder of the critical point phi returned to
    :type ladder: BoundPeriodLadder
    :param phi: The return point
    :type phi: float

    :return: p, or None when phi is farther than r_1
    :rtype: int

    :raises LadderExhausted: When |phi - c| <= r_horizon, so no interval of the ladder contains it
    """
    distance = circle_distance(phi, ladder.c)
    horizon = ladder.horizon
    if horizon == 0:
        return None
    # number of radii >= distance; the ladder holds radii in decreasing order
    count = horizon - int(np.searchsorted(ladder.radii[::-1], distance, side="left"))
    if count == 0:
        return None
    if count == horizon:
        raise LadderExhausted("|phi - c| = {} is below the last radius {} of the ladder".format(
            distance, ladder.radii[-1]), distance=distance, smallest_radius=float(ladder.radii[-1]))
    return count


def decompose(trace, ladders, profile, mode=DEEP):
    """
    Greedy forward scan for free returns. A return at n_k into C_delta (C_delta0 in shallow mode) is bound
    to its nearest critical point, gets its bound period p_k from that point's ladder, and the scan resumes at
    n_k + p_k + 1.

    :param trace: The orbit to decompose
    :type trace: OrbitTrace
    :param ladders: One BoundPeriodLadder per critical point, in critical set order
    :type ladders: list
    :param profile: The constants bundle
    :type profile: ConstantsProfile
    :param mode: 'deep' or 'shallow'
    :type mode: str

    :rtype: Decomposition
    """
    radius = profile.delta if mode == DEEP else profile.delta0
    horizon = trace.horizon
    events, segments = [], []
    free_start, i = 0, 0

    while i <= horizon:
        depth = float(trace.dist[i])
        if depth > radius:
            i += 1
            continue

        bound_to = int(trace.nearest[i])
        exhausted = False
        try:
            period = assign_bound_period(ladders[bound_to], float(trace.points[i]))
        except LadderExhausted:
            period, exhausted = horizon - i, True
            logger.info("Ladder exhausted at return time {} of the orbit of {} (a={}, L={})".format(
                i, trace.origin, trace.a, trace.L))
        if period is None:
            period = 0
        period = min(period, horizon - i)

        if i > free_start:
            segments.append(("free", free_start, i - 1))
        segments.append(("bound", i, i + period))
        events.append(ReturnEvent(time=i, bound_to=bound_to, depth=depth, depth_index=_depth_index(depth),
                                  bound_period=period, kind=DEEP if depth <= profile.delta else SHALLOW,
                                  exhausted=exhausted))
        i = i + period + 1
        free_start = i

    if free_start <= horizon:
        segments.append(("free", free_start, horizon))

    return Decomposition(events=tuple(events), segments=tuple(segments), horizon=horizon, mode=mode,
                         critical_index=trace.critical_index)


def classify_essential(decomposition):
    """
    A free return nu is essential when for every earlier free return i,
    sum_{i < j <= nu} 2 log d_j <= log d_i. With P_m the prefix sum of 2 log d this is
    P_nu <= min_i (P_i + log d_i).

    :rtype: Decomposition
    """
    flagged = []
    prefix, best = 0.0, math.inf
    for event in decomposition.events:
        log_depth = _log_depth(event.depth)
        prefix += 2.0 * log_depth
        essential = prefix <= best
        flagged.append(replace(event, essential=essential))
        best = min(best, prefix + log_depth)
    return replace(decomposition, events=tuple(flagged))


def return_depth_sum(decomposition, k):
    """
    sum of -log d(c_i, C) over free returns i <= k
    """
    return math.fsum(-_log_depth(event.depth) for event in decomposition.events if event.time <= k)


def amend_window(raw, image_length):
    """
    The shrinking rule: the raw window when the image is short, else the concentric window of length
    |raw| / (9 image_length)

    :param raw: (lo, hi)
    :type raw: tuple
    :param image_length: |c_n(raw)|
    :type image_length: float

    :rtype: tuple
    """
    lo, hi = raw
    if image_length <= amendment_threshold:
        return lo, hi
    center, half = (lo + hi) / 2.0, (hi - lo) / (18.0 * image_length)
    return center - half, center + half


def estimate_image_length(family, critical_index, a_lo, a_hi, n, samples=image_samples, refine=False,
                          critical_set=None, max_samples=image_refine_cap):
    """
    Length of the arc swept by c_n(a) for a in [a_lo, a_hi], by summing wrapped increments between
    equispaced samples. With refine, the sample count doubles until every increment is below 1/4
    or max_samples is reached.

    :rtype: float
    """
    if critical_set is None:
        critical_set = critical_set_for(family.phi, family.L)
    while True:
        values = [_critical_value(family.with_a(a), critical_index, n, critical_set)
                  for a in np.linspace(a_lo, a_hi, samples)]
        steps = np.diff(np.array(values))
        steps = steps - np.round(steps)
        if not refine or 2 * samples - 1 > max_samples or np.abs(steps).max(initial=0.0) < 0.25:
            return float(np.abs(steps).sum())
        samples = 2 * samples - 1


def build_window(family, critical_index, n, profile, clamp=True, critical_set=None):
    """
    Raw window [a* - D_n, a* + D_n] with D_n = D_n(a*, c_0(a*)), and its amendment

    :param family: The member at the center a*
    :type family: MapFamily
    :param critical_index: Which critical point
    :type critical_index: int
    :param n: Horizon, at least 1
    :type n: int
    :param profile: The constants bundle (for beta)
    :type profile: ConstantsProfile

    :rtype: ParameterWindow
    """
    if n < 1:
        raise ValueError("A window needs n >= 1, got {}".format(n))
    trace = critical_orbit(family, critical_index, n, critical_set)
    D_n = float(compute_ladder(trace, profile.beta).D[n])
    raw = (family.a - D_n, family.a + D_n)
    image_length = estimate_image_length(family, critical_index, raw[0], raw[1], n, critical_set=critical_set)
    amended = amend_window(raw, image_length)
    if clamp:
        raw, amended = _clamp(raw), _clamp(amended)
    return ParameterWindow(center=family.a, raw=raw, amended=amended, image_length=image_length, D_n=D_n)


def count_bound_window_shallow_returns(trace, ladders, profile):
    """
    Times i in [n + 1, n + p + 1] at which the orbit is again in C_delta0, where n is a free return to
    C_delta0 minus C_delta with bound period p

    :return: (number of returns scanned, list of (return time, offending time))
    :rtype: tuple
    """
    decomposition = decompose(trace, ladders, profile, SHALLOW)
    shallow = py_.filter_(decomposition.events, lambda event: event.kind == SHALLOW and not event.exhausted)
    violations = []
    for event in shallow:
        for t in range(event.time + 1, min(event.time + event.bound_period + 1, trace.horizon) + 1):
            if trace.dist[t] <= profile.delta0:
                violations.append((event.time, t))
    return len(shallow), violations


def segment_lengths(decomposition):
    """
    Steps spent free and bound along the decomposed orbit
    """
    lengths = {"free": 0, "bound": 0}
    for kind, first, last in decomposition.segments:
        lengths[kind] += last - first + 1
    return lengths


def _critical_value(family, critical_index, n, critical_set):
    return float(critical_orbit(family, critical_index, n, critical_set).points[n])


def _clamp(window):
    return max(0.0, window[0]), min(1.0, window[1])


def _log_depth(depth):
    return math.log(max(depth, 5e-324))


def _depth_index(depth):
    return int(math.floor(-_log_depth(depth)))
