import math
from dataclasses import replace

import numpy as np
import pytest

from circle_map import MapFamily, critical_set_for, distance_to_critical, eval_map
from conditions import MIS, W, X, Y, at_least, check_mis, check_W, check_W_per_k, check_X, check_Y, \
    cross_check_brprop, x_threshold
from orbit import critical_orbit
from returns import DEEP, Decomposition, ReturnEvent, build_ladder, decompose


def _exhaustive_X(trace, profile, n):
    return all(at_least(trace.log_deriv[j] - trace.log_deriv[i], x_threshold(profile, i))
               for j in range(1, n + 1) for i in range(j))


def _random_decomposition(rng, horizon):
    size = min(int(rng.integers(0, 12)), horizon + 1)
    times = sorted(rng.choice(np.arange(horizon + 1), size=size, replace=False))
    events = tuple(ReturnEvent(time=int(t), bound_to=0, depth=float(10.0 ** -rng.uniform(0.5, 4.0)), depth_index=0,
                               bound_period=0, kind=DEEP) for t in times)
    return Decomposition(events=events, segments=(), horizon=horizon, mode=DEEP)


def test_at_least_treats_ties_as_holding():
    assert at_least(1.0, 1.0)
    assert at_least(1.0, 1.0 + 1e-13)
    assert not at_least(1.0, 1.1)
    assert at_least(-5.0, -math.inf)


def test_mis_with_zero_sigma_always_holds(trace_factory, profile_factory):
    profile = replace(profile_factory(), sigma=0.0)
    assert check_mis(trace_factory([0.0, 1e-9, 0.3]), profile, 2).holds


def test_mis_reports_the_first_failure(trace_factory, profile_factory):
    profile = profile_factory(sigma=0.05)
    dist = [0.2, 0.3, 0.1, 0.025, 0.01]
    report = check_mis(trace_factory(dist), profile, 4)
    assert report.kind == MIS
    assert not report.holds
    assert report.first_failure["i"] == 3
    assert check_mis(trace_factory(dist), profile, 2).holds


def test_mis_agrees_with_direct_iteration(sine, profile_factory):
    profile = profile_factory(sigma=0.05)
    family = MapFamily(sine, 0.37, 1000.0)
    critical_set = critical_set_for(sine, 1000.0)
    trace = critical_orbit(family, 0, 10, critical_set)
    theta, expected = trace.points[0], True
    for _ in range(11):
        expected = expected and distance_to_critical(theta, critical_set) >= 0.05
        theta = eval_map(family, theta)
    assert check_mis(trace, profile, 10).holds == expected


def test_X_single_pair(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0, sigma=0.05)
    threshold = math.log(1000.0 * 0.05)
    assert check_X(trace_factory([0.2, 0.2], log_deriv=[0.0, threshold + 0.01]), profile, 1).holds
    report = check_X(trace_factory([0.2, 0.2], log_deriv=[0.0, threshold - 0.01]), profile, 1)
    assert not report.holds
    assert (report.first_failure["i"], report.first_failure["j"]) == (0, 1)


def test_X_fails_at_the_pair_straddling_a_small_derivative(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0)
    log_deriv = np.arange(8) * 6.0
    log_deriv[5:] -= 10.0
    report = check_X(trace_factory([0.2] * 8, log_deriv=log_deriv), profile, 7)
    assert report.kind == X
    assert not report.holds
    assert (report.first_failure["i"], report.first_failure["j"]) == (4, 5)


def test_X_matches_the_exhaustive_pair_oracle(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0)
    rng = np.random.default_rng(11)
    outcomes = set()
    for _ in range(300):
        n = int(rng.integers(1, 60))
        log_deriv = np.concatenate([[0.0], np.cumsum(rng.normal(5.5, 1.5, n))])
        trace = trace_factory([0.2] * (n + 1), log_deriv=log_deriv)
        verdict = check_X(trace, profile, n).holds
        assert verdict == _exhaustive_X(trace, profile, n)
        outcomes.add(verdict)
    assert outcomes == {True, False}


def test_Y(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0, lambda_=0.1)
    growth = 0.1 * math.log(1000.0)
    assert check_Y(trace_factory([0.2]), profile, 0).holds
    good = trace_factory([0.2] * 4, log_deriv=[0.0, growth, 2.0 * growth, 3.0 * growth + 1.0])
    assert check_Y(good, profile, 3).holds
    bad = trace_factory([0.2] * 4, log_deriv=[0.0, growth, 1.5 * growth, 5.0 * growth])
    report = check_Y(bad, profile, 3)
    assert report.kind == Y
    assert report.first_failure["i"] == 2


def test_Y_with_zero_lambda_asks_for_growth_only(trace_factory, profile_factory):
    profile = replace(profile_factory(), lambda_=0.0)
    assert check_Y(trace_factory([0.2] * 3, log_deriv=[0.0, 0.0, 0.5]), profile, 2).holds
    assert not check_Y(trace_factory([0.2] * 3, log_deriv=[0.0, -0.5, 0.5]), profile, 2).holds


def test_W_without_returns_holds(profile_factory):
    decomposition = Decomposition(events=(), segments=(), horizon=30, mode=DEEP)
    report = check_W(decomposition, profile_factory(), 30)
    assert report.kind == W
    assert report.holds


@pytest.mark.parametrize("depth, holds", [(0.99, True), (0.5, False)])
def test_W_single_return(profile_factory, depth, holds):
    # alpha = 0.001, L = 1000: the return at 10 must not be deeper than L^(-10 alpha / 3) ~ 0.977
    profile = profile_factory(L=1000.0, lambda_=0.1)
    event = ReturnEvent(time=10, bound_to=0, depth=depth, depth_index=0, bound_period=0, kind=DEEP)
    decomposition = Decomposition(events=(event,), segments=(), horizon=20, mode=DEEP)
    assert check_W(decomposition, profile, 20).holds == holds


def test_W_matches_the_per_k_oracle(profile_factory):
    profile = profile_factory(L=1000.0, lambda_=0.1, alpha=0.05)
    rng = np.random.default_rng(13)
    outcomes = set()
    for _ in range(300):
        horizon = int(rng.integers(1, 200))
        decomposition = _random_decomposition(rng, horizon)
        verdict = check_W(decomposition, profile, horizon)
        oracle = check_W_per_k(decomposition, profile, horizon)
        assert verdict.holds == oracle.holds
        if not verdict.holds:
            assert verdict.first_failure["k"] == oracle.first_failure["k"]
        outcomes.add(verdict.holds)
    assert outcomes == {True, False}


def test_checks_are_prefix_monotone(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0)
    rng = np.random.default_rng(17)
    for _ in range(50):
        n = 30
        log_deriv = np.concatenate([[0.0], np.cumsum(rng.normal(5.0, 2.0, n))])
        dist = rng.uniform(0.0, 0.5, n + 1)
        trace = trace_factory(dist, log_deriv=log_deriv)
        for check in (check_mis, check_X, check_Y):
            verdicts = [check(trace, profile, m).holds for m in range(n + 1)]
            assert verdicts == sorted(verdicts, reverse=True)


def test_brprop_is_not_applicable_when_hypotheses_fail(trace_factory, profile_factory):
    profile = profile_factory(L=1000.0)
    trace = trace_factory([0.2] * 5, log_deriv=[0.0, -1.0, 0.0, 1.0, 2.0])
    decomposition = Decomposition(events=(), segments=(), horizon=4, mode=DEEP)
    report = cross_check_brprop(trace, decomposition, profile, 3)
    assert not report["applicable"]
    assert report["agrees"] is None


def test_brprop_needs_one_more_step(trace_factory, profile_factory):
    trace = trace_factory([0.2] * 4)
    decomposition = Decomposition(events=(), segments=(), horizon=3, mode=DEEP)
    with pytest.raises(ValueError):
        cross_check_brprop(trace, decomposition, profile_factory(), 3)


def test_brprop_on_a_real_orbit(sine, profile_factory):
    profile = profile_factory(L=1000.0)
    family = MapFamily(sine, 0.37, 1000.0)
    critical_set = critical_set_for(sine, 1000.0)
    traces = [critical_orbit(family, index, 31, critical_set) for index in range(len(critical_set))]
    ladders = [build_ladder(trace, profile.beta) for trace in traces]
    report = cross_check_brprop(traces[0], decompose(traces[0], ladders, profile, DEEP), profile, 30)
    assert report["n"] == 30
    if report["applicable"]:
        assert report["agrees"] == (report["xNext"] and report["yNext"])
