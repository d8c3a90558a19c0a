"""
Forward orbits with derivatives accumulated in (log|.|, sign) form, the distortion ladder d_i / D_n,
and the parameter derivatives c_i'(a) of critical values.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from circle_map import critical_set_for, reduce_circle
from errors import CriticalHit, DegenerateLadder, OracleMismatch

critical_hit_threshold = 1e-300
oracle_tolerance = 1e-10


@dataclass(frozen=True)
class OrbitTrace(object):
    """
    points[i] = f^i(theta0); for a critical orbit theta0 = c_0 = f(c), so points[i] = c_i(a).
    log_deriv[i] = log|(f^i)'theta0|, signs[i] its sign. log_step[i] and step_signs[i] describe f'(points[i]).
    """

    origin: float
    critical_index: int
    a: float
    L: float
    points: np.ndarray
    log_deriv: np.ndarray
    signs: np.ndarray
    log_step: np.ndarray
    step_signs: np.ndarray
    dist: np.ndarray
    nearest: np.ndarray
    horizon: int
    critical_hit: bool = False


@dataclass(frozen=True)
class DistortionLadder(object):
    """
    d[i] = d_i for i < horizon; D[n] = D_n for 1 <= n <= horizon (D[0] is the empty-sum value, +inf).
    log_inv_d_prefix[n] = log sum_{i<n} d_i^-1.
    """

    L: float
    beta: float
    d: np.ndarray
    log_d: np.ndarray
    log_inv_d_prefix: np.ndarray
    log_D: np.ndarray
    D: np.ndarray
    horizon: int

    @property
    def inv_d_prefix(self):
        return np.exp(self.log_inv_d_prefix)


def iterate_orbit(family, theta0, n, critical_set=None, origin=None, critical_index=-1):
    """
    Iterates theta0 n times, keeping log-derivatives, signs and distances to C.

    :param family: The map f_{a,L}
    :type family: MapFamily
    :param theta0: Start point in [0, 1)
    :type theta0: float
    :param n: Horizon
    :type n: int
    :param critical_set: The critical set of the family; looked up from (phi, L) when None
    :type critical_set: CriticalSet
    :param origin: The point theta0 came from (the critical point for critical orbits)
    :type origin: float
    :param critical_index: Index of origin in the critical set, -1 for non-critical orbits
    :type critical_index: int

    :return: The trace with horizon n
    :rtype: OrbitTrace

    :raises CriticalHit: When |f'| drops below 1e-300 before the horizon; the truncated trace is attached
    """
    if n < 0:
        raise ValueError("Horizon must be non-negative, got {}".format(n))
    if critical_set is None:
        critical_set = critical_set_for(family.phi, family.L)

    phi, a, L = family.phi, family.a, family.L
    critical_points = critical_set.points

    points, log_deriv, signs, log_step, step_signs, dist, nearest = [], [], [], [], [], [], []
    theta, log_total, sign = float(theta0), 0.0, 1
    hit = False

    for i in range(n + 1):
        points.append(theta)
        log_deriv.append(log_total)
        signs.append(sign)

        gaps = [abs(theta - c) % 1.0 for c in critical_points]
        gaps = [min(gap, 1.0 - gap) for gap in gaps]
        closest = min(range(len(gaps)), key=gaps.__getitem__)
        dist.append(gaps[closest])
        nearest.append(closest)

        derivative = 1.0 + L * float(phi.deriv1(theta))
        step_sign = 1 if derivative >= 0.0 else -1
        step_signs.append(step_sign)
        if abs(derivative) < critical_hit_threshold:
            log_step.append(-math.inf)
            if i < n:
                hit = True
                break
            continue
        log_step.append(math.log(abs(derivative)))

        if i < n:
            log_total += log_step[-1]
            sign *= step_sign
            theta = reduce_circle(theta + a + L * float(phi.value(theta)))

    trace = OrbitTrace(origin=theta0 if origin is None else origin, critical_index=critical_index, a=a, L=L,
                       points=np.array(points), log_deriv=np.array(log_deriv), signs=np.array(signs),
                       log_step=np.array(log_step), step_signs=np.array(step_signs), dist=np.array(dist),
                       nearest=np.array(nearest), horizon=len(points) - 1, critical_hit=hit)
    if hit:
        raise CriticalHit("Orbit of {} hit a critical point at i={} (a={}, L={})".format(
            theta0, trace.horizon, a, L), trace=trace)
    return trace


def critical_orbit(family, critical_index, n, critical_set=None):
    """
    The orbit c_i(a) = f^{i+1}(c), i = 0..n, of the critical point with the given index
    """
    if critical_set is None:
        critical_set = critical_set_for(family.phi, family.L)
    c = critical_set.points[critical_index]
    c0 = reduce_circle(c + family.a + family.L * float(family.phi.value(c)))
    return iterate_orbit(family, c0, n, critical_set, origin=c, critical_index=critical_index)


def compute_ladder(trace, beta):
    """
    d_i = |(f^i)'theta|^-1 |f'(f^i theta)| and D_n = L^-beta [sum_{i<n} d_i^-1]^-1 in one forward pass.
    The sum of d_i^-1 is accumulated with Kahan compensation in a frame rescaled to its largest term.

    :param trace: A trace without critical hit
    :type trace: OrbitTrace
    :param beta: Exponent in (3/2, 2)
    :type beta: float

    :rtype: DistortionLadder

    :raises DegenerateLadder: When some d_i underflows to zero
    """
    if trace.critical_hit:
        raise CriticalHit("Cannot build a ladder on a truncated trace", trace=trace)

    horizon = trace.horizon
    log_d = trace.log_step[:horizon] - trace.log_deriv[:horizon]
    d = np.exp(log_d)
    degenerate = (d == 0.0) | ~np.isfinite(log_d)
    if degenerate.any():
        index = int(np.argmax(degenerate))
        raise DegenerateLadder("d_{} underflows along the orbit of {} (a={}, L={})".format(
            index, trace.origin, trace.a, trace.L), index=index)

    log_prefix = np.empty(horizon + 1)
    log_prefix[0] = -math.inf
    scale, total, compensation = -math.inf, 0.0, 0.0
    for i in range(horizon):
        exponent = -log_d[i]
        if exponent > scale:
            factor = math.exp(scale - exponent) if scale > -math.inf else 0.0
            total, compensation = total * factor, compensation * factor
            scale = exponent
        term = math.exp(exponent - scale) - compensation
        updated = total + term
        compensation = (updated - total) - term
        total = updated
        log_prefix[i + 1] = scale + math.log(total)

    log_D = -beta * math.log(trace.L) - log_prefix
    return DistortionLadder(L=trace.L, beta=beta, d=d, log_d=log_d, log_inv_d_prefix=log_prefix, log_D=log_D,
                            D=np.exp(log_D), horizon=horizon)


def offset_log_deriv(family, trace, offsets, n):
    """
    log|(f^n)'| at points[0] + offset for each offset, following each orbit as its offset
    delta_i from the traced one: delta_{i+1} = delta_i + L (Phi(theta_i + delta_i) - Phi(theta_i)).
    Offsets far below the spacing of doubles at theta_i stay resolved.

    :param family: The map the trace was computed for
    :type family: MapFamily
    :param trace: The reference orbit, horizon at least n
    :type trace: OrbitTrace
    :param offsets: Initial offsets
    :type offsets: np.ndarray

    :rtype: np.ndarray

    :raises CriticalHit: When one of the offset orbits meets a critical point before step n
    """
    if n > trace.horizon:
        raise ValueError("The trace ends at {}, cannot follow offsets for {} steps".format(trace.horizon, n))
    phi, L = family.phi, family.L
    delta = np.array(offsets, dtype=float)
    total = np.zeros_like(delta)
    for i in range(n):
        theta = float(trace.points[i])
        base = 1.0 + L * float(phi.deriv1(theta))
        # f'(theta_i + delta_i) = base (1 + change); change <= -1 means f' vanishes in between
        change = L * phi.difference(theta, delta, 1) / base if abs(base) >= critical_hit_threshold else None
        if change is None or np.any(change <= -1.0 + critical_hit_threshold):
            raise CriticalHit("An orbit offset from {} meets a critical point at i={} (a={}, L={})".format(
                trace.origin, i, trace.a, trace.L), trace=truncate_trace(trace, i))
        total += math.log(abs(base)) + np.log1p(change)
        delta = delta + L * phi.difference(theta, delta, 0)
    return total


def deriv_along(trace, i, j):
    """
    log|(f^{j-i})'(points[i])|, exact in log space
    """
    if not 0 <= i < j <= trace.horizon:
        raise ValueError("Need 0 <= i < j <= {}, got i={}, j={}".format(trace.horizon, i, j))
    return trace.log_deriv[j] - trace.log_deriv[i]


def parameter_derivatives(family, critical_index, n, critical_set=None, trace=None):
    """
    c_i'(a) for i = 0..n from the recursion c_{i+1}' = 1 + f'(c_i) c_i', c_0' = 1,
    carried as (log|.|, sign) with the running value renormalised every step.

    :return: Arrays (log|c_i'|, sign c_i') and the trace they were computed on
    :rtype: tuple
    """
    if trace is None:
        trace = critical_orbit(family, critical_index, n, critical_set)
    log_abs, signs = [0.0], [1.0]
    value, scale = 1.0, 0.0
    for i in range(n):
        derivative = trace.step_signs[i] * math.exp(trace.log_step[i])
        updated = math.exp(-scale) + derivative * value
        if updated == 0.0:
            value = 0.0
        else:
            scale += math.log(abs(updated))
            value = math.copysign(1.0, updated)
        log_abs.append(scale if value != 0.0 else -math.inf)
        signs.append(value)
    return np.array(log_abs), np.array(signs), trace


def transversality_ratio(family, critical_index, n, critical_set=None):
    """
    c_n'(a) / (f^n)'(c_0), computed by the recursion and by the closed form 1 + sum_{i=1}^n 1/(f^i)'(c_0).

    :return: The ratio (closed form)
    :rtype: float

    :raises OracleMismatch: When the two computations disagree beyond 1e-10 relative
    """
    log_abs, signs, trace = parameter_derivatives(family, critical_index, n, critical_set)

    recursion = signs[n] * trace.signs[n] * math.exp(log_abs[n] - trace.log_deriv[n])
    closed_form = math.fsum([1.0] + [trace.signs[i] * math.exp(-trace.log_deriv[i]) for i in range(1, n + 1)])

    if abs(recursion - closed_form) > oracle_tolerance * max(abs(recursion), abs(closed_form)) + 1e-15:
        raise OracleMismatch("Transversality ratio mismatch at a={}, L={}, n={}: recursion {} vs closed form {}".format(
            family.a, family.L, n, recursion, closed_form))
    return closed_form


def truncate_trace(trace, horizon):
    """
    The same orbit cut at a shorter horizon
    """
    if not 0 <= horizon <= trace.horizon:
        raise ValueError("Cannot cut a trace of horizon {} at {}".format(trace.horizon, horizon))
    keep = horizon + 1
    return replace(trace, points=trace.points[:keep], log_deriv=trace.log_deriv[:keep], signs=trace.signs[:keep],
                   log_step=trace.log_step[:keep], step_signs=trace.step_signs[:keep], dist=trace.dist[:keep],
                   nearest=trace.nearest[:keep], horizon=horizon, critical_hit=False)
