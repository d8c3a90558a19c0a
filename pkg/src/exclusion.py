"""
The nested parameter sets A^(n) and estimates of their measure, by Monte Carlo sampling or adaptive bisection
"""
import math
import os
from dataclasses import dataclass, field, fields
from multiprocessing import Pool, cpu_count

import numpy as np
import pydash as py_

from circle_map import MapFamily, critical_set_for, reduce_circle
from conditions import MIS, W, X, Y, check_mis, check_W, check_X, check_Y
from errors import CriticalHit
from logger import logger
from orbit import critical_orbit, truncate_trace
from returns import DEEP, build_ladder, decompose

MC = "mc"
BISECT = "bisect"

CRITICAL_HIT = "CRITICAL_HIT"
NONE = "NONE"
ALIVE = -1

# Lower rank wins when two conditions fail at the same step
condition_rank = {MIS: 0, CRITICAL_HIT: 1, W: 2, X: 3, Y: 4}

chunk_size = 256


@dataclass(frozen=True)
class ExclusionContext(object):
    """
    Everything a worker needs to classify one parameter
    """

    phi: object
    L: float
    profile: object
    n_max: int
    critical_set: object
    strict: bool = False


@dataclass(frozen=True)
class ParameterVerdict(object):
    """
    step is the first n with a not in A^(n), or -1 when a is in A^(n_max)
    """

    a: float
    step: int
    condition: str
    critical_point: int
    xy_violation: bool = False

    @property
    def alive(self):
        return self.step == ALIVE

    def alive_at(self, n):
        return self.step == ALIVE or self.step > n

    def to_row(self):
        return [self.a, self.step, self.condition, self.critical_point]


@dataclass
class ParameterCell(object):
    """
    [lo, hi) with the verdict of its midpoint. Verdicts of the endpoints are kept for the measure totals.
    """

    lo: float
    hi: float
    depth: int
    verdict: ParameterVerdict = None
    endpoint_verdicts: tuple = ()
    unresolved: bool = False

    @property
    def representative(self):
        return (self.lo + self.hi) / 2.0

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def status(self):
        if self.verdict is None or self.verdict.alive:
            return "alive"
        return "excluded"

    def to_row(self):
        return [self.lo, self.hi, self.status, self.verdict.step, self.verdict.condition,
                self.verdict.critical_point, int(self.unresolved)]


@dataclass
class SweepRecord(object):
    L: float
    profile: dict
    n_max: int
    mode: str
    survivor_fraction: list
    stderr: list
    seed: int = None
    samples: int = None
    cells: int = None
    paper_bound: float = float("nan")
    initial_bounds: list = field(default_factory=list)
    exclusion_counts: dict = field(default_factory=dict)
    xy_violations: int = 0
    unresolved: int = 0
    uncertainty: list = field(default_factory=list)
    strict: bool = False
    decay_exponent: float = None
    verdicts: list = field(default_factory=list, repr=False)
    cell_list: list = field(default_factory=list, repr=False)

    @property
    def final_fraction(self):
        return self.survivor_fraction[-1]

    @property
    def final_stderr(self):
        return self.stderr[-1]

    def to_dict(self):
        record = {item.name: getattr(self, item.name) for item in fields(self)
                  if item.name not in ("verdicts", "cell_list")}
        return py_.map_keys(record, lambda value, key: key if key[0].isupper() else py_.camel_case(key))

    @classmethod
    def from_dict(cls, content):
        """
        Rebuilds a record from its records.json entry; verdicts and cells are not stored there
        """
        names = [item.name for item in fields(cls) if item.name not in ("verdicts", "cell_list")]
        values = py_.map_keys(content, lambda value, key: key if key[0].isupper() else py_.snake_case(key))
        values = py_.pick(values, *names)
        if values.get("paper_bound") is None:
            values["paper_bound"] = float("nan")
        return cls(**values)


def _candidate(step, condition, critical_point):
    return step, condition_rank[condition], condition, critical_point


def classify_parameter(a, context):
    """
    The exclusion step and reason of one parameter. Steps 0..N use (mis); after that a parameter
    leaves at step max(k, N) + 1 when W first fails at k. X and Y are diagnostics unless strict.

    :param a: The parameter
    :type a: float
    :param context: Map, profile and horizon
    :type context: ExclusionContext

    :rtype: ParameterVerdict
    """
    profile, n_max = context.profile, context.n_max
    N = profile.N
    family = MapFamily(context.phi, reduce_circle(float(a)), context.L)
    phase_one = min(N, n_max)

    traces, candidates = [], []
    for index in range(len(context.critical_set)):
        try:
            trace = critical_orbit(family, index, n_max, context.critical_set)
        except CriticalHit as hit:
            trace = hit.trace
            logger.info("Critical hit for a={} at L={}, c={}, i={}".format(a, context.L, index, trace.horizon))
            hit_step = trace.horizon if trace.horizon <= N else trace.horizon + 1
            candidates.append(_candidate(hit_step, CRITICAL_HIT, index))
        traces.append(trace)

        mis = check_mis(trace, profile, min(phase_one, trace.horizon))
        if not mis.holds:
            candidates.append(_candidate(mis.first_failure["i"], MIS, index))

    xy_violation = False
    horizon = min(trace.horizon for trace in traces)
    if n_max > N and horizon > 0:
        # Cutting also clears the critical-hit flag of the orbit that set the horizon
        traces = [truncate_trace(trace, horizon) for trace in traces]
        ladders = [build_ladder(trace, profile.beta) for trace in traces]
        check_until = min(horizon, n_max - 1)
        for trace in traces:
            w = check_W(decompose(trace, ladders, profile, DEEP), profile, check_until)
            if not w.holds:
                candidates.append(_candidate(max(w.first_failure["k"], N) + 1, W, trace.critical_index))

            reports = [(X, check_X(trace, profile, horizon)), (Y, check_Y(trace, profile, horizon))]
            for kind, report in reports:
                if report.holds:
                    continue
                xy_violation = True
                failed_at = report.first_failure["j" if kind == X else "i"]
                if context.strict and failed_at <= n_max - 1:
                    candidates.append(_candidate(max(failed_at, N) + 1, kind, trace.critical_index))

    candidates = [candidate for candidate in candidates if candidate[0] <= n_max]
    if not candidates:
        return ParameterVerdict(a=float(a), step=ALIVE, condition=NONE, critical_point=-1,
                                xy_violation=xy_violation)
    step, _, condition, critical_point = min(candidates)
    return ParameterVerdict(a=float(a), step=step, condition=condition, critical_point=critical_point,
                            xy_violation=xy_violation)


def _classify_chunk(job):
    context, values = job
    return [classify_parameter(a, context) for a in values]


def _chunks(values, size):
    return [values[start:start + size] for start in range(0, len(values), size)]


def worker_count(workers=None):
    """
    The configured worker count, the CIRCLE_LAB_WORKERS environment variable, or the CPU count
    """
    if workers is None:
        workers = os.environ.get("CIRCLE_LAB_WORKERS")
    if workers is None:
        return cpu_count()
    return max(1, int(workers))


class ParameterExcluder(object):
    """
    Runs the exclusion scheme for one drive function over the parameter interval [0, 1)
    """

    def __init__(self, phi, workers=None, strict=False):
        self.phi = phi
        self.workers = worker_count(workers)
        self.strict = strict

    def classify_all(self, values, context):
        """
        Verdicts for a list of parameters, in the order given regardless of which worker ran them
        """
        values = [float(a) for a in values]
        jobs = [(context, chunk) for chunk in _chunks(values, chunk_size)]
        if self.workers == 1 or len(jobs) <= 1:
            results = [_classify_chunk(job) for job in jobs]
        else:
            with Pool(self.workers) as pool:
                results = pool.map(_classify_chunk, jobs)
        return py_.flatten(results)

    def context(self, L, profile, n_max):
        return ExclusionContext(phi=self.phi, L=float(L), profile=profile, n_max=int(n_max),
                                critical_set=critical_set_for(self.phi, float(L)), strict=self.strict)

    def run_exclusion_mc(self, L, profile, n_max, samples, seed):
        """
        Monte Carlo estimate of |A^(n)| for n = 0..n_max

        :param L: The family's L
        :type L: float
        :param profile: The constants bundle for this L
        :type profile: ConstantsProfile
        :param n_max: Last step
        :type n_max: int
        :param samples: Number of uniformly drawn parameters
        :type samples: int
        :param seed: Seed of the Philox generator
        :type seed: int

        :rtype: SweepRecord
        """
        if samples < 1:
            raise ValueError("Need at least one sample, got {}".format(samples))
        if samples < 1000:
            logger.warning("Monte Carlo run with only {} samples".format(samples))
        values = np.random.Generator(np.random.Philox(seed)).random(samples)
        verdicts = self.classify_all(values, self.context(L, profile, n_max))

        fractions, stderrs = [], []
        for n in range(n_max + 1):
            fraction = py_.count_by(verdicts, lambda verdict: verdict.alive_at(n)).get(True, 0) / samples
            fractions.append(fraction)
            stderrs.append(math.sqrt(fraction * (1.0 - fraction) / samples))

        record = self._record(L, profile, n_max, MC, fractions, stderrs, verdicts)
        record.seed, record.samples = int(seed), int(samples)
        logger.info("L={} n_max={}: survivor fraction {} +- {}".format(L, n_max, fractions[-1], stderrs[-1]))
        return record

    def run_exclusion_bisect(self, L, profile, n_max, min_width):
        """
        Adaptive bisection of [0, 1). A cell is split while it is shallower than minimum_depth, the lifted
        orbits of its endpoints separate by more than delta0 within n_max steps, or the verdicts at its
        endpoints and midpoint differ, and while its halves stay at least min_width wide. Leaves take the
        verdict of their midpoint; a leaf whose three verdicts still differ is unresolved and counts half alive.

        :rtype: SweepRecord
        """
        if min_width < 1e-12:
            raise ValueError("min_width={} is below 1e-12".format(min_width))
        context = self.context(L, profile, n_max)
        verdicts, orbits = {}, {}
        depth = minimum_depth(profile)

        frontier, leaves = [ParameterCell(0.0, 1.0, 0)], []
        while frontier:
            wanted = sorted({a for cell in frontier for a in (cell.lo, cell.representative, cell.hi)} -
                            set(verdicts))
            for a, verdict in zip(wanted, self.classify_all(wanted, context)):
                verdicts[a] = verdict
            for a in wanted:
                orbits[a] = lifted_critical_values(self.phi, L, a, n_max, context.critical_set)

            next_frontier = []
            for cell in frontier:
                cell.verdict = verdicts[cell.representative]
                cell.endpoint_verdicts = (verdicts[cell.lo], verdicts[cell.hi])
                outcomes = {(v.step, v.condition) for v in (cell.verdict,) + cell.endpoint_verdicts}
                disagree = len(outcomes) > 1
                separated = _separation(orbits[cell.lo], orbits[cell.hi]) > profile.delta0
                shallow = cell.depth < depth
                if (disagree or separated or shallow) and cell.width / 2.0 >= min_width:
                    middle = cell.representative
                    next_frontier.append(ParameterCell(cell.lo, middle, cell.depth + 1))
                    next_frontier.append(ParameterCell(middle, cell.hi, cell.depth + 1))
                else:
                    cell.unresolved = disagree
                    leaves.append(cell)
            frontier = next_frontier

        leaves.sort(key=lambda cell: cell.lo)
        fractions, uncertainty = [], []
        for n in range(n_max + 1):
            alive, unsure = 0.0, 0.0
            for cell in leaves:
                states = {v.alive_at(n) for v in (cell.verdict,) + cell.endpoint_verdicts}
                if states == {True}:
                    alive += cell.width
                elif len(states) > 1:
                    alive += cell.width / 2.0
                    unsure += cell.width / 2.0
            fractions.append(alive)
            uncertainty.append(unsure)

        record = self._record(L, profile, n_max, BISECT, fractions, list(uncertainty),
                              [cell.verdict for cell in leaves])
        record.cells = len(leaves)
        record.unresolved = py_.count_by(leaves, "unresolved").get(True, 0)
        record.uncertainty = uncertainty
        record.cell_list = leaves
        return record

    def sweep_L(self, L_list, profile_for, n_max, samples, seed, mode=MC, min_width=1e-4):
        """
        One record per L, with the fitted decay exponent of 1 - |A^(n_max)| attached to every record

        :param L_list: Increasing values of L
        :type L_list: list
        :param profile_for: Builds the constants bundle for a given L
        :type profile_for: callable

        :rtype: list
        """
        if any(later <= earlier for earlier, later in zip(L_list, L_list[1:])):
            raise ValueError("L values must increase, got {}".format(L_list))
        records = []
        for L in L_list:
            profile = profile_for(L)
            if mode == BISECT:
                records.append(self.run_exclusion_bisect(L, profile, n_max, min_width))
            else:
                records.append(self.run_exclusion_mc(L, profile, n_max, samples, seed))
        exponent = fit_decay_exponent(records)
        for record in records:
            record.decay_exponent = exponent
        return records

    def _record(self, L, profile, n_max, mode, fractions, stderrs, verdicts):
        excluded = py_.filter_(verdicts, lambda verdict: not verdict.alive)
        initial = [profile.initial_bound(n) for n in range(min(profile.N, n_max) + 1)]
        return SweepRecord(L=float(L), profile=profile.to_dict(), n_max=int(n_max), mode=mode,
                           survivor_fraction=fractions, stderr=stderrs, paper_bound=profile.measure_bound(),
                           initial_bounds=initial, exclusion_counts=py_.count_by(excluded, "condition"),
                           xy_violations=py_.count_by(verdicts, lambda v: v.alive and v.xy_violation).get(True, 0),
                           strict=self.strict, verdicts=verdicts)


def fit_decay_exponent(records):
    """
    Slope of log(1 - fraction) against log L by least squares, or None with fewer than two usable points
    """
    points = [(math.log(record.L), math.log(1.0 - record.final_fraction)) for record in records
              if record.final_fraction < 1.0]
    if len(points) < 2:
        return None
    x, y = zip(*points)
    slope, _ = np.polyfit(np.array(x), np.array(y), 1)
    return float(slope)


def exact_step_zero_measure(phi, L, sigma):
    """
    |{a: d(f_a(c), C) >= sigma for every c in C}|. Since f_a(c) moves with unit speed in a, the complement is
    the union over pairs (c, c') of the arcs |a - (c' - c - L Phi(c))| < sigma.

    :rtype: float
    """
    critical_set = critical_set_for(phi, L)
    arcs = []
    for c in critical_set.points:
        for target in critical_set.points:
            center = reduce_circle(target - c - L * float(phi.value(c)))
            lo, hi = center - sigma, center + sigma
            if lo < 0.0:
                arcs.extend([(0.0, hi), (lo + 1.0, 1.0)])
            elif hi > 1.0:
                arcs.extend([(lo, 1.0), (0.0, hi - 1.0)])
            else:
                arcs.append((lo, hi))

    covered, reach = 0.0, 0.0
    for lo, hi in sorted(arcs):
        lo = max(lo, reach)
        if hi > lo:
            covered += hi - lo
            reach = hi
    return 1.0 - covered


def lifted_critical_values(phi, L, a, n_max, critical_set):
    """
    c_i(a) for i = 0..n_max on the lift x -> x + a + L Phi(x), one row per critical point. a is not reduced,
    so the parameters 0 and 1 give orbits that differ by i + 1 at step i.

    :rtype: np.ndarray
    """
    x = np.array(critical_set.points, dtype=float)
    rows = []
    for _ in range(n_max + 1):
        x = x + a + L * phi.value(x)
        rows.append(x)
    return np.array(rows).T


def minimum_depth(profile):
    """
    Depth below which every cell is split: cells at this depth are at most sigma wide, so no excluded arc of
    width 2 sigma fits strictly between the three sample points of a cell
    """
    if profile.sigma <= 0.0:
        return 1
    return max(1, int(math.ceil(-math.log2(profile.sigma))))


def _separation(first, second):
    """
    Largest distance between matching points of two sets of lifted critical orbits
    """
    return float(np.max(np.abs(first - second))) if first.size else 0.0
