import math

import numpy as np
import pytest

from constants import EMPIRICAL, PAPER, build_profile, estimate_K0, scaled_overrides
from errors import InvalidAlpha, InvalidBeta, InvalidEpsilon, InvalidOverrides


def test_paper_profile_exponents(sine):
    profile = build_profile(sine, 1e4, beta=1.75, kind=PAPER, K0=43.4)
    assert profile.lambda0 == pytest.approx(0.0625)
    assert profile.lambda_ == pytest.approx(0.0625 / 9.0)
    assert profile.alpha == pytest.approx(profile.lambda_ / 100.0)


def test_paper_profile_is_vacuous_at_desk_scale(sine):
    profile = build_profile(sine, 1e4, beta=1.75, kind=PAPER, K0=43.4)
    assert profile.sigma == pytest.approx(43.4 * 1e4 ** -0.125)
    assert profile.sigma == pytest.approx(13.7, abs=0.05)
    assert profile.vacuous
    assert math.isnan(profile.measure_bound())
    assert math.isnan(profile.initial_bound(0))


def test_empirical_profile(profile_factory):
    profile = profile_factory(sigma=0.05, delta0=0.01, delta=0.002, lambda_=0.1)
    assert not profile.vacuous
    assert profile.profile_kind == EMPIRICAL
    assert profile.lambda0 == pytest.approx(0.9)
    assert profile.alpha == pytest.approx(0.001)
    assert profile.initial_bound(0) == pytest.approx(1.0 - 0.05 ** (1.0 / 3.0))
    assert profile.initial_bound(3) == pytest.approx((1.0 - 0.05 ** (1.0 / 3.0)) ** 4)
    assert 0.0 < profile.measure_bound() < 1.0


def test_profile_dict_names_lambda(profile_factory):
    profile = profile_factory().to_dict()
    assert profile["lambda"] == pytest.approx(0.1)
    assert "lambda_" not in profile


def test_K_tends_to_one(sine):
    small = build_profile(sine, 1e3, kind=PAPER, K0=50.0)
    large = build_profile(sine, 1e6, kind=PAPER, K0=50.0)
    assert large.K < small.K
    assert large.K < 1.01
    assert large.Kprime == pytest.approx(math.exp(1e6 ** -0.25 + 3.0))


def test_Kprime_at_ten_thousand(sine):
    assert build_profile(sine, 1e4, kind=PAPER, K0=43.4).Kprime == pytest.approx(22.2, abs=0.05)


@pytest.mark.parametrize("beta", [1.5, 2.0, 2.5])
def test_beta_out_of_range(sine, beta):
    with pytest.raises(InvalidBeta):
        build_profile(sine, 1e3, beta=beta, kind=PAPER, K0=50.0)


def test_alpha_must_stay_below_lambda(sine):
    with pytest.raises(InvalidAlpha):
        build_profile(sine, 1e3, alpha=0.5, kind=PAPER, K0=50.0)


def test_empirical_overrides_are_checked(sine):
    with pytest.raises(InvalidOverrides):
        build_profile(sine, 1e3, kind=EMPIRICAL, overrides={"sigma": 0.05}, K0=50.0)
    with pytest.raises(InvalidOverrides):
        build_profile(sine, 1e3, kind=EMPIRICAL, overrides={"sigma": 0.05, "delta0": 0.001, "delta": 0.01,
                                                            "lambda": 0.1}, K0=50.0)


def test_estimate_K0_dominates_second_derivative(sine):
    K0 = estimate_K0(sine, 100.0, 0.05)
    assert K0 >= 4.0 * math.pi ** 2


def test_estimate_K0_rejects_wide_neighbourhood(sine):
    with pytest.raises(InvalidEpsilon):
        estimate_K0(sine, 100.0, 0.3)


def test_scaled_overrides():
    reference = scaled_overrides(100.0)
    assert reference == pytest.approx({"sigma": 0.05, "delta0": 0.01, "delta": 0.002, "lambda": 0.1})
    assert scaled_overrides(10000.0)["sigma"] == pytest.approx(0.005)
    assert scaled_overrides(100.0, {"sigmaRef": 0.1})["sigma"] == pytest.approx(0.1)


@pytest.mark.parametrize("epsilon", [0.01, 0.03, 0.06])
def test_estimate_K0_does_not_shrink_with_a_wider_neighbourhood(sine, epsilon):
    assert estimate_K0(sine, 100.0, 2.0 * epsilon) >= estimate_K0(sine, 100.0, epsilon)


def test_paper_exponents_are_ordered_over_beta(sine):
    for beta in np.linspace(1.51, 1.99, 25):
        profile = build_profile(sine, 1e4, beta=float(beta), kind=PAPER, K0=43.4)
        assert 0.0 < profile.lambda_ < profile.lambda0 < 0.5
        assert 2.0 - profile.beta > profile.lambda0
        assert profile.alpha < profile.lambda_
