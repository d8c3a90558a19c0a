import math

import numpy as np
import pytest

from circle_map import MapFamily, circle_distance, critical_set_for
from errors import LadderExhausted
from orbit import critical_orbit
from returns import DEEP, SHALLOW, BoundPeriodLadder, Decomposition, ReturnEvent, amend_window, \
    assign_bound_period, build_ladder, build_window, classify_essential, count_bound_window_shallow_returns, \
    decompose, estimate_image_length, return_depth_sum, segment_lengths

binary_ladder = BoundPeriodLadder(c=0.5, critical_index=0, radii=np.array([0.25, 0.125, 0.0625, 0.03125]))


def _decomposition(depths, times=None):
    times = times or list(range(1, len(depths) + 1))
    events = tuple(ReturnEvent(time=t, bound_to=0, depth=d, depth_index=0, bound_period=0, kind=DEEP)
                   for t, d in zip(times, depths))
    return Decomposition(events=events, segments=(), horizon=max(times) if times else 0, mode=DEEP)


def test_bound_period_is_right_closed():
    assert assign_bound_period(binary_ladder, 0.625) == 2
    assert assign_bound_period(binary_ladder, 0.75) == 1


def test_bound_period_inside_an_interval():
    assert assign_bound_period(binary_ladder, 0.6) == 2
    assert assign_bound_period(binary_ladder, 0.45) == 3


def test_bound_period_outside_the_ladder():
    assert assign_bound_period(binary_ladder, 0.5 + 0.3) is None


def test_bound_period_below_the_last_radius():
    with pytest.raises(LadderExhausted) as raised:
        assign_bound_period(binary_ladder, 0.51)
    assert raised.value.smallest_radius == 0.03125


def test_bound_period_matches_a_linear_scan(sine):
    trace = critical_orbit(MapFamily(sine, 0.37, 1000.0), 0, 30)
    ladder = build_ladder(trace, 1.75)
    for distance in np.random.default_rng(5).uniform(float(ladder.radii[-1]) * 1.01, 0.5, 200):
        phi = (ladder.c + distance) % 1.0
        scanned = max([p for p in range(1, ladder.horizon + 1) if ladder.radii[p - 1] >= distance], default=None)
        assert assign_bound_period(ladder, phi) == scanned


def test_decompose_without_returns(trace_factory, profile_factory):
    trace = trace_factory([0.2] * 13)
    ladders = [binary_ladder]
    decomposition = decompose(trace, ladders, profile_factory(), DEEP)
    assert decomposition.events == ()
    assert decomposition.segments == (("free", 0, 12),)


def test_decompose_single_return(trace_factory, profile_factory):
    dist = [0.2] * 13
    dist[5] = 0.001
    points = [0.5] * 13
    points[5] = 0.251
    trace = trace_factory(dist, points=points)
    ladder = BoundPeriodLadder(c=0.25, critical_index=0, radii=np.array([0.01, 0.005, 0.002, 0.0005]))
    decomposition = decompose(trace, [ladder], profile_factory(), DEEP)

    assert len(decomposition.events) == 1
    event = decomposition.events[0]
    assert (event.time, event.bound_period, event.kind) == (5, 3, DEEP)
    assert decomposition.segments == (("free", 0, 4), ("bound", 5, 8), ("free", 9, 12))
    assert segment_lengths(decomposition) == {"free": 9, "bound": 4}


def test_decompose_keeps_exhausted_returns(trace_factory, profile_factory):
    dist = [0.2] * 11
    dist[4] = 0.0001
    points = [0.5] * 11
    points[4] = 0.2501
    trace = trace_factory(dist, points=points)
    ladder = BoundPeriodLadder(c=0.25, critical_index=0, radii=np.array([0.01, 0.005]))
    event = decompose(trace, [ladder], profile_factory(), DEEP).events[0]
    assert event.exhausted
    assert event.bound_period == 6


def test_decompose_real_orbit_tiles_the_horizon(sine, profile_factory):
    profile = profile_factory(L=1000.0)
    family = MapFamily(sine, 0.37, 1000.0)
    critical_set = critical_set_for(sine, 1000.0)
    traces = [critical_orbit(family, index, 60, critical_set) for index in range(len(critical_set))]
    ladders = [build_ladder(trace, profile.beta) for trace in traces]
    for mode in (DEEP, SHALLOW):
        decomposition = decompose(traces[0], ladders, profile, mode)
        assert sum(segment_lengths(decomposition).values()) == 61
        for (_, _, last), (_, first, _) in zip(decomposition.segments, decomposition.segments[1:]):
            assert first == last + 1
        radius = profile.delta if mode == DEEP else profile.delta0
        assert all(event.depth <= radius for event in decomposition.events)


def test_single_return_is_essential():
    assert classify_essential(_decomposition([1e-3])).events[0].essential


@pytest.mark.parametrize("depths, second_essential", [
    ([1e-2, 1e-3], True),
    ([1e-8, 1e-3], False),
])
def test_essential_returns(depths, second_essential):
    events = classify_essential(_decomposition(depths)).events
    assert events[0].essential
    assert events[1].essential == second_essential


def test_return_depth_sum():
    assert return_depth_sum(_decomposition([]), 10) == 0.0
    assert return_depth_sum(_decomposition([1e-4], [3]), 3) == pytest.approx(9.2103, abs=1e-4)
    assert return_depth_sum(_decomposition([1e-4], [3]), 2) == 0.0
    decomposition = _decomposition([1e-2, 1e-3, 0.5], [2, 5, 9])
    sums = [return_depth_sum(decomposition, k) for k in range(10)]
    assert sums == sorted(sums)


def test_amend_window():
    assert amend_window((0.4, 0.6), 0.2) == (0.4, 0.6)
    lo, hi = amend_window((0.4, 0.6), 1.0)
    assert hi - lo == pytest.approx(0.2 / 9.0)
    assert (lo + hi) / 2.0 == pytest.approx(0.5)


def test_build_window(sine, profile_factory):
    profile = profile_factory()
    window = build_window(MapFamily(sine, 0.37, 1000.0), 0, 3, profile)
    assert window.raw[0] == pytest.approx(0.37 - window.D_n)
    assert window.raw[1] == pytest.approx(0.37 + window.D_n)
    assert window.raw[0] <= window.amended[0] <= window.amended[1] <= window.raw[1]
    with pytest.raises(ValueError):
        build_window(MapFamily(sine, 0.37, 1000.0), 0, 0, profile)


def test_image_length_of_a_short_window(sine):
    family = MapFamily(sine, 0.37, 1000.0)
    length = estimate_image_length(family, 0, 0.37, 0.37 + 1e-9, 1)
    assert length == pytest.approx(1e-9 * abs(2.0 + 1000.0 * 2.0 * math.pi *
                                              math.cos(2.0 * math.pi * critical_orbit(family, 0, 0).points[0])),
                                   rel=1e-3)


def test_no_shallow_returns_to_scan(trace_factory, profile_factory):
    scanned, violations = count_bound_window_shallow_returns(trace_factory([0.2] * 8), [binary_ladder],
                                                             profile_factory())
    assert scanned == 0
    assert violations == []


def test_ladder_covers_the_shallow_annulus(sine, profile_factory):
    profile = profile_factory(L=1000.0)
    ladder = build_ladder(critical_orbit(MapFamily(sine, 0.37, 1000.0), 0, 60), profile.beta)
    assert np.all(np.diff(ladder.radii) < 0.0)
    assert ladder.radii[-1] < profile.delta
    outer = min(profile.delta0, float(ladder.radii[0])) * (1.0 - 1e-9)
    for distance in np.geomspace(profile.delta, outer, 200):
        phi = (ladder.c + distance) % 1.0
        p = assign_bound_period(ladder, phi)
        assert p is not None
        assert ladder.radii[p] < circle_distance(phi, ladder.c) <= ladder.radii[p - 1]


def test_raw_window_image_wraps_the_circle(sine, profile_factory):
    profile = profile_factory(L=1000.0)
    checked = 0
    for a in np.linspace(0.05, 0.95, 10):
        family = MapFamily(sine, float(a), 1000.0)
        for n in (1, 2, 3):
            if critical_orbit(family, 0, n).dist[:n].min() < profile.sigma:
                continue
            window = build_window(family, 0, n, profile, clamp=False)
            assert estimate_image_length(family, 0, window.raw[0], window.raw[1], n, refine=True) >= 1.0
            checked += 1
    assert checked > 0
