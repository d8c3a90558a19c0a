"""
The circle S^1 = R/Z, the drive functions Phi and the family f_{a,L}(theta) = theta + a + L*Phi(theta)
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from errors import NoCriticalPoints, NonMorseDrive

two_pi = 2.0 * math.pi

bracket_nodes_per_critical_point = 1024
bisection_tolerance = 1e-14


class DriveFunction(object):
    """
    A smooth 1-periodic function Phi with its first two derivatives.
    Every method accepts a float or a numpy array.
    """

    name = "drive"

    def value(self, theta):
        raise NotImplementedError

    def deriv1(self, theta):
        raise NotImplementedError

    def deriv2(self, theta):
        raise NotImplementedError

    def difference(self, theta, delta, order=0):
        """
        Phi^(order)(theta + delta) - Phi^(order)(theta) for order 0 or 1. Drives with a closed form
        override this to avoid cancellation when delta is far below the spacing of doubles at theta.
        """
        evaluate = self.value if order == 0 else self.deriv1
        return evaluate(theta + delta) - evaluate(theta)

    def describe(self):
        """
        :return: A JSON-ready description of the drive
        :rtype: dict
        """
        return {"name": self.name}


@dataclass(frozen=True)
class SineDrive(DriveFunction):
    """
    Phi(theta) = sin(2 pi theta), the Arnol'd family
    """

    name: str = "sine"

    def value(self, theta):
        return np.sin(two_pi * theta)

    def deriv1(self, theta):
        return two_pi * np.cos(two_pi * theta)

    def deriv2(self, theta):
        return -two_pi * two_pi * np.sin(two_pi * theta)

    def difference(self, theta, delta, order=0):
        half_angle = math.pi * np.asarray(delta, dtype=float)
        middle = math.pi * (2.0 * theta + np.asarray(delta, dtype=float))
        if order == 0:
            return 2.0 * np.cos(middle) * np.sin(half_angle)
        return -2.0 * two_pi * np.sin(middle) * np.sin(half_angle)


@dataclass(frozen=True)
class FourierDrive(DriveFunction):
    """
    Truncated Fourier series Phi(theta) = sum_k A_k cos(2 pi k theta) + B_k sin(2 pi k theta)

    :param coefficients: Triples (k, A_k, B_k) with integer k >= 1
    :type coefficients: tuple
    """

    coefficients: tuple = field(default_factory=tuple)
    name: str = "fourier"

    def __post_init__(self):
        triples = tuple((int(k), float(cos_coef), float(sin_coef)) for k, cos_coef, sin_coef in self.coefficients)
        if len(triples) == 0:
            raise ValueError("A Fourier drive needs at least one coefficient triple")
        if any(k < 1 for k, _, _ in triples):
            raise ValueError("Fourier modes must be positive integers")
        object.__setattr__(self, "coefficients", triples)
        check_morse(self)

    def _series(self, theta, order):
        theta = np.asarray(theta, dtype=float)
        total = np.zeros_like(theta)
        for k, cos_coef, sin_coef in self.coefficients:
            omega = two_pi * k
            angle = omega * theta
            cos_term, sin_term = np.cos(angle), np.sin(angle)
            if order == 0:
                total = total + cos_coef * cos_term + sin_coef * sin_term
            elif order == 1:
                total = total + omega * (-cos_coef * sin_term + sin_coef * cos_term)
            else:
                total = total - omega * omega * (cos_coef * cos_term + sin_coef * sin_term)
        if total.ndim == 0:
            return float(total)
        return total

    def value(self, theta):
        return self._series(theta, 0)

    def deriv1(self, theta):
        return self._series(theta, 1)

    def deriv2(self, theta):
        return self._series(theta, 2)

    def difference(self, theta, delta, order=0):
        delta = np.asarray(delta, dtype=float)
        total = np.zeros_like(delta)
        for k, cos_coef, sin_coef in self.coefficients:
            omega = two_pi * k
            middle, half_angle = omega * (theta + delta / 2.0), np.sin(omega * delta / 2.0)
            cos_change = -2.0 * np.sin(middle) * half_angle
            sin_change = 2.0 * np.cos(middle) * half_angle
            if order == 0:
                total = total + cos_coef * cos_change + sin_coef * sin_change
            else:
                total = total + omega * (-cos_coef * sin_change + sin_coef * cos_change)
        return total

    def describe(self):
        return {"name": self.name, "coefficients": [list(triple) for triple in self.coefficients]}


def make_drive(name, coefficients=None):
    """
    Build a drive function from its settings description

    :param name: One of 'sine', 'fourier'
    :type name: str
    :param coefficients: Fourier triples, only used by the 'fourier' drive
    :type coefficients: list

    :rtype: DriveFunction
    """
    if name == "sine":
        return SineDrive()
    if name == "fourier":
        return FourierDrive(tuple(tuple(triple) for triple in (coefficients or [])))
    raise ValueError("Unknown drive function '{}'".format(name))


def count_drive_critical_points(phi, nodes=1 << 14):
    """
    Number of sign changes of Phi' around the circle
    """
    grid = np.arange(nodes) / nodes
    signs = np.sign(phi.deriv1(grid))
    return int(np.count_nonzero(signs != np.roll(signs, -1)))


def check_morse(phi, nodes=10 ** 4, tolerance=1e-6):
    """
    Checks on a grid that Phi' and Phi'' never vanish together.

    :raises NonMorseDrive: At the first grid node where both are below tolerance (relative to their sup)
    """
    grid = np.arange(nodes) / nodes
    first = np.abs(phi.deriv1(grid))
    second = np.abs(phi.deriv2(grid))
    degenerate = (first <= tolerance * max(first.max(), 1.0)) & (second <= tolerance * max(second.max(), 1.0))
    if degenerate.any():
        raise NonMorseDrive("Degenerate critical point of {} near theta={}".format(
            phi.name, grid[np.argmax(degenerate)]))


@dataclass(frozen=True)
class MapFamily(object):
    """
    One member f_{a,L} of the family
    """

    phi: DriveFunction
    a: float
    L: float

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise ValueError("The parameter a must lie in [0, 1), got {}".format(self.a))
        if not self.L > 0.0:
            raise ValueError("L must be positive, got {}".format(self.L))

    def with_a(self, a):
        """
        The member with parameter a, reduced modulo 1
        """
        return MapFamily(self.phi, reduce_circle(a), self.L)


@dataclass(frozen=True)
class CriticalSet(object):
    points: tuple
    L: float

    def __len__(self):
        return len(self.points)

    def nearest(self, theta):
        """
        :return: Index of the nearest critical point and the circle distance to it
        :rtype: tuple
        """
        distances = [circle_distance(theta, point) for point in self.points]
        index = int(np.argmin(distances))
        return index, distances[index]


def reduce_circle(theta):
    """
    Floor-based reduction to [0, 1)
    """
    reduced = theta - math.floor(theta)
    if reduced >= 1.0:
        return 0.0
    return reduced


def eval_map(family, theta):
    return reduce_circle(theta + family.a + family.L * float(family.phi.value(theta)))


def eval_deriv(family, theta):
    return 1.0 + family.L * float(family.phi.deriv1(theta))


def eval_deriv2(family, theta):
    return family.L * float(family.phi.deriv2(theta))


def lift_difference(phi, L, x, y):
    """
    f(x) - f(y) computed on the lift, which does not involve a
    """
    return (x - y) + L * (float(phi.value(x)) - float(phi.value(y)))


def find_critical_points(phi, L):
    """
    All roots of 1 + L*Phi'(theta) on [0, 1): bracketed by sign changes of f' on a grid
    and refined by bisection.

    :param phi: The drive function
    :type phi: DriveFunction
    :param L: The family's L
    :type L: float

    :return: The sorted critical set
    :rtype: CriticalSet
    """
    nodes = bracket_nodes_per_critical_point * max(1, count_drive_critical_points(phi))
    grid = np.arange(nodes + 1) / nodes
    derivative = 1.0 + L * phi.deriv1(grid)

    def f_prime(theta):
        return 1.0 + L * float(phi.deriv1(theta))

    roots = []
    for j in range(nodes):
        left, right = derivative[j], derivative[j + 1]
        if left == 0.0:
            roots.append(float(grid[j]))
        elif left * right < 0.0:
            roots.append(bisect(f_prime, grid[j], grid[j + 1], xtol=bisection_tolerance))

    if len(roots) == 0:
        raise NoCriticalPoints("f' has no sign change for L={}: the map is a diffeomorphism".format(L))

    return CriticalSet(tuple(sorted(reduce_circle(root) for root in roots)), float(L))


def circle_distance(x, y):
    gap = abs(x - y) % 1.0
    return min(gap, 1.0 - gap)


def distance_to_critical(theta, critical_set):
    return min(circle_distance(theta, point) for point in critical_set.points)


@lru_cache(maxsize=64)
def critical_set_for(phi, L):
    """
    Cached find_critical_points; the critical set depends only on (phi, L)
    """
    return find_critical_points(phi, L)
