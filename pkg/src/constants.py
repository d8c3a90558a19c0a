"""
The constant bundle (beta, alpha, N, K0, sigma, lambda0, lambda, delta0, delta, K, K') under its two provenance profiles
"""
import math
from dataclasses import dataclass, asdict

import numpy as np

from circle_map import find_critical_points, circle_distance
from errors import ConstantsError, InvalidBeta, InvalidAlpha, InvalidOverrides, InvalidEpsilon, K0Unbounded

PAPER = "paper"
EMPIRICAL = "empirical"

default_beta = 1.75
default_N = 20
alpha_ratio = 100.0
k0_safety_factor = 1.1
k0_ceiling = 1e6
k0_grid_nodes = 10 ** 4

default_rule = {
    "sigmaRef": 0.05,
    "LRef": 100.0,
    "sigmaExponent": 0.5,
    "delta0Ratio": 0.2,
    "deltaRatio": 0.04,
    "lambda": 0.1
}


@dataclass(frozen=True)
class ConstantsProfile(object):
    L: float
    beta: float
    alpha: float
    N: int
    K0: float
    sigma: float
    lambda0: float
    lambda_: float
    delta0: float
    delta: float
    K: float
    Kprime: float
    profile_kind: str
    vacuous: bool

    @property
    def log_L(self):
        return math.log(self.L)

    def initial_bound(self, n):
        """
        Lower bound (1 - sigma^(1/3))^(n+1) on |A^(n)| for n <= N, NaN when sigma >= 1

        :rtype: float
        """
        if self.sigma >= 1.0:
            return float("nan")
        return (1.0 - self.sigma ** (1.0 / 3.0)) ** (n + 1)

    def measure_bound(self):
        """
        Lower bound (1 - L^(-alpha N/10)) (1 - sigma^(1/3))^N on |A^(infinity)|, NaN when sigma >= 1

        :rtype: float
        """
        if self.sigma >= 1.0:
            return float("nan")
        return (1.0 - self.L ** (-self.alpha * self.N / 10.0)) * (1.0 - self.sigma ** (1.0 / 3.0)) ** self.N

    def to_dict(self):
        profile = asdict(self)
        profile["lambda"] = profile.pop("lambda_")
        return profile


def estimate_K0(phi, L, epsilon):
    """
    Grid estimate of the constant K0 for which, on C_epsilon,
    K0^-1 L|c-theta|^2 <= |f(c)-f(theta)| <= K0 L|c-theta|^2 and
    K0^-1 L|c-theta| <= |f'theta| <= K0 L|c-theta|, and globally |f'|, |f''| <= K0 L.

    :param phi: The drive function
    :type phi: DriveFunction
    :param L: The family's L
    :type L: float
    :param epsilon: Radius of the critical neighbourhood, below a quarter of the smallest critical gap
    :type epsilon: float

    :return: The smallest admissible K0 >= 1 on the grid times the safety factor
    :rtype: float
    """
    critical_set = find_critical_points(phi, L)
    points = np.array(critical_set.points)
    if len(points) > 1:
        gaps = [circle_distance(x, y) for i, x in enumerate(points) for y in points[i + 1:]]
        smallest_gap = min(gaps)
    else:
        smallest_gap = 1.0
    if not 0.0 < epsilon < smallest_gap / 4.0:
        raise InvalidEpsilon("epsilon={} must lie in (0, {})".format(epsilon, smallest_gap / 4.0))

    nodes_per_point = max(2, k0_grid_nodes // len(points))
    # Midpoints of a uniform partition of [-epsilon, epsilon]; never hits the critical point itself
    offsets = epsilon * (2.0 * (np.arange(nodes_per_point) + 0.5) / nodes_per_point - 1.0)

    ratios = []
    for c in points:
        theta = c + offsets
        image_gap = np.abs(-offsets + L * (phi.value(c) - phi.value(theta)))
        quadratic = image_gap / (L * offsets ** 2)
        linear = np.abs(1.0 + L * phi.deriv1(theta)) / (L * np.abs(offsets))
        ratios.extend([quadratic.max(), 1.0 / quadratic.min(), linear.max(), 1.0 / linear.min()])

    grid = np.arange(k0_grid_nodes) / k0_grid_nodes
    ratios.append(np.abs(1.0 + L * phi.deriv1(grid)).max() / L)
    ratios.append(np.abs(phi.deriv2(grid)).max())

    ratios = np.array(ratios, dtype=float)
    if not np.all(np.isfinite(ratios)) or ratios.max() > k0_ceiling:
        raise K0Unbounded("No K0 up to {} satisfies the grid checks for {} at L={}".format(
            k0_ceiling, phi.name, L))

    return k0_safety_factor * max(1.0, float(ratios.max()))


def scaled_overrides(L, rule=None):
    """
    Empirical (sigma, delta0, delta, lambda) for a given L:
    sigma = sigmaRef (L/LRef)^(-sigmaExponent), delta0 and delta fixed fractions of sigma.

    :rtype: dict
    """
    rule = dict(default_rule, **(rule or {}))
    sigma = rule["sigmaRef"] * (L / rule["LRef"]) ** (-rule["sigmaExponent"])
    return {
        "sigma": sigma,
        "delta0": sigma * rule["delta0Ratio"],
        "delta": sigma * rule["deltaRatio"],
        "lambda": rule["lambda"]
    }


def build_profile(phi, L, beta=default_beta, alpha=None, N=default_N, kind=EMPIRICAL, overrides=None, K0=None,
                  epsilon=0.05):
    """
    Builds the constant bundle.

    :param phi: The drive function
    :type phi: DriveFunction
    :param L: The family's L
    :type L: float
    :param beta: Exponent in (3/2, 2)
    :type beta: float
    :param alpha: Recurrence exponent; None means lambda/100
    :type alpha: float
    :param N: Length of the first induction phase
    :type N: int
    :param kind: One of 'paper', 'empirical'
    :type kind: str
    :param overrides: For the empirical kind: sigma, delta0, delta, lambda (and optionally lambda0)
    :type overrides: dict
    :param K0: A precomputed K0; estimated from phi when None
    :type K0: float
    :param epsilon: Neighbourhood radius used by the K0 estimate
    :type epsilon: float

    :rtype: ConstantsProfile
    """
    if not 1.5 < beta < 2.0:
        raise InvalidBeta("beta={} must lie in (3/2, 2)".format(beta))
    if int(N) != N or N < 1:
        raise ConstantsError("N={} must be a positive integer".format(N))
    if kind not in (PAPER, EMPIRICAL):
        raise ConstantsError("Unknown profile kind '{}'".format(kind))
    if K0 is None:
        K0 = estimate_K0(phi, L, epsilon)

    K = math.exp(2.0 * K0 * L ** (1.0 - beta))
    Kprime = math.exp(L ** -0.25 + 3.0)

    if kind == PAPER:
        lambda0 = 0.5 - beta / 4.0
        lambda_ = lambda0 / 9.0
        if alpha is None:
            alpha = lambda_ / alpha_ratio
        _check_alpha(alpha, lambda_)
        sigma = K0 * L ** (-1.0 + beta / 2.0)
        delta0 = L ** (-1.0 + lambda0)
        delta = L ** (-alpha * N)
    else:
        overrides = overrides or {}
        missing = [key for key in ("sigma", "delta0", "delta", "lambda") if key not in overrides]
        if missing:
            raise InvalidOverrides("The empirical profile needs overrides for {}".format(", ".join(missing)))
        sigma, delta0, delta = float(overrides["sigma"]), float(overrides["delta0"]), float(overrides["delta"])
        lambda_ = float(overrides["lambda"])
        lambda0 = float(overrides.get("lambda0", 9.0 * lambda_))
        if not 0.0 < delta < delta0 < sigma < 0.25:
            raise InvalidOverrides("Need 0 < delta < delta0 < sigma < 1/4, got delta={}, delta0={}, sigma={}".format(
                delta, delta0, sigma))
        if not lambda_ > 0.0:
            raise InvalidOverrides("lambda={} must be positive".format(lambda_))
        if alpha is None:
            alpha = lambda_ / alpha_ratio
        _check_alpha(alpha, lambda_)

    # Orderings the asymptotic formulas only reach for large L
    vacuous = sigma >= 0.25 or delta0 >= sigma or delta >= delta0

    return ConstantsProfile(L=float(L), beta=float(beta), alpha=float(alpha), N=int(N), K0=float(K0),
                            sigma=float(sigma), lambda0=float(lambda0), lambda_=float(lambda_),
                            delta0=float(delta0), delta=float(delta), K=K, Kprime=Kprime, profile_kind=kind,
                            vacuous=vacuous)


def _check_alpha(alpha, lambda_):
    if not 0.0 < alpha < lambda_:
        raise InvalidAlpha("alpha={} must lie in (0, lambda={})".format(alpha, lambda_))
