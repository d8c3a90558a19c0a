"""
Checkers for the induction conditions (mis), (X), (Y) and (W).
Comparisons are made in log space; ties count as holding, with a relative slack of 1e-12.
"""
import math
from dataclasses import dataclass

from logger import logger
from returns import return_depth_sum

MIS = "MIS"
X = "X"
Y = "Y"
W = "W"

comparison_slack = 1e-12


@dataclass(frozen=True)
class ConditionReport(object):
    """
    first_failure is None when the condition holds, else a dict with the offending indices, lhs and rhs
    """

    kind: str
    c: int
    horizon: int
    holds: bool
    first_failure: dict = None

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "horizon": self.horizon, "holds": self.holds,
                "firstFailure": self.first_failure}


def at_least(lhs, rhs):
    """
    lhs >= rhs up to the relative slack
    """
    if rhs == -math.inf:
        return True
    return lhs >= rhs - comparison_slack * max(1.0, abs(rhs))


def _horizon(trace, n):
    if n > trace.horizon:
        raise ValueError("The trace only reaches {}, asked for {}".format(trace.horizon, n))
    return n


def check_mis(trace, profile, n):
    """
    d(c_i, C) >= sigma for every i in [0, n]
    """
    n = _horizon(trace, n)
    sigma = profile.sigma
    for i in range(n + 1):
        depth = float(trace.dist[i])
        if sigma > 0.0 and not at_least(math.log(depth) if depth > 0.0 else -math.inf, math.log(sigma)):
            return ConditionReport(MIS, trace.critical_index, n, False, {"i": i, "lhs": depth, "rhs": sigma})
    return ConditionReport(MIS, trace.critical_index, n, True)


def x_threshold(profile, i):
    """
    log of L min(sigma, L^(-alpha i))
    """
    log_sigma = math.log(profile.sigma) if profile.sigma > 0.0 else -math.inf
    return profile.log_L + min(log_sigma, -profile.alpha * i * profile.log_L)


def check_X(trace, profile, n):
    """
    |(f^{j-i})'c_i| >= L min(sigma, L^(-alpha i)) for every 0 <= i < j <= n.
    For each j only the largest log Lambda_i + threshold_i over i < j matters, so a running maximum suffices.
    """
    n = _horizon(trace, n)
    best, best_i = -math.inf, None
    for j in range(1, n + 1):
        candidate = float(trace.log_deriv[j - 1]) + x_threshold(profile, j - 1)
        if candidate > best:
            best, best_i = candidate, j - 1
        log_lambda_j = float(trace.log_deriv[j])
        if not at_least(log_lambda_j, best):
            lhs = log_lambda_j - float(trace.log_deriv[best_i])
            return ConditionReport(X, trace.critical_index, n, False,
                                   {"i": best_i, "j": j, "lhs": lhs, "rhs": x_threshold(profile, best_i)})
    return ConditionReport(X, trace.critical_index, n, True)


def check_Y(trace, profile, n):
    """
    |(f^i)'c_0| >= L^(lambda i) for every 0 <= i <= n
    """
    n = _horizon(trace, n)
    for i in range(n + 1):
        rhs = profile.lambda_ * i * profile.log_L
        if not at_least(float(trace.log_deriv[i]), rhs):
            return ConditionReport(Y, trace.critical_index, n, False,
                                   {"i": i, "lhs": float(trace.log_deriv[i]), "rhs": rhs})
    return ConditionReport(Y, trace.critical_index, n, True)


def check_W(decomposition, profile, n):
    """
    sum of -log d(c_i, C) over free returns i <= k is at most alpha k log L / 3 for every k in [0, n].
    The left side only grows at return times, so those are the only k to check.
    """
    if n > decomposition.horizon:
        raise ValueError("The decomposition only reaches {}, asked for {}".format(decomposition.horizon, n))
    total = 0.0
    for event in decomposition.events:
        if event.time > n:
            break
        total += -math.log(max(event.depth, 5e-324))
        rhs = profile.alpha * event.time * profile.log_L / 3.0
        if not at_least(rhs, total):
            return ConditionReport(W, decomposition.critical_index, n, False,
                                   {"k": event.time, "lhs": total, "rhs": rhs})
    return ConditionReport(W, decomposition.critical_index, n, True)


def check_W_per_k(decomposition, profile, n):
    """
    check_W by recomputing the depth sum at every k
    """
    for k in range(n + 1):
        total = return_depth_sum(decomposition, k)
        rhs = profile.alpha * k * profile.log_L / 3.0
        if not at_least(rhs, total):
            return ConditionReport(W, decomposition.critical_index, n, False, {"k": k, "lhs": total, "rhs": rhs})
    return ConditionReport(W, decomposition.critical_index, n, True)


def cross_check_brprop(trace, decomposition, profile, n):
    """
    When W, X and Y hold up to n, evaluates X and Y at n + 1 and reports whether they agree with the
    proposition that they should hold.

    :rtype: dict
    """
    report = {"c": trace.critical_index, "n": n, "applicable": False, "agrees": None, "xNext": None,
              "yNext": None}
    if n + 1 > trace.horizon:
        raise ValueError("Need a trace reaching n + 1 = {}".format(n + 1))

    hypotheses = [check_W(decomposition, profile, n), check_X(trace, profile, n), check_Y(trace, profile, n)]
    if not all(hypothesis.holds for hypothesis in hypotheses):
        return report

    x_next, y_next = check_X(trace, profile, n + 1), check_Y(trace, profile, n + 1)
    report.update({"applicable": True, "agrees": x_next.holds and y_next.holds, "xNext": x_next.holds,
                   "yNext": y_next.holds})
    if not report["agrees"]:
        logger.warning("X/Y fail at n+1={} although W, X, Y hold at n (c={}, a={}, L={}): X {} Y {}".format(
            n + 1, trace.critical_index, trace.a, trace.L, x_next.first_failure, y_next.first_failure))
    return report
