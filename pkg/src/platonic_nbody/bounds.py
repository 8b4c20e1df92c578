"""Lower bounds on the action of loops with total collisions.

All values are per unit T^(1/3) unless a period is passed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GROUP_SIZE = {"T": 12, "O": 24, "I": 60}


def gordon_bound(m1: float, m2: float, K: float, T: float = 1.0) -> float:
    """Minimal action of a two-body T-periodic loop through collision,
    potential K m1 m2 / r."""
    if min(m1, m2, K, T) <= 0:
        raise ValueError("masses, coupling and period must be positive")
    return 3 * (K**2 * np.pi**2 / (2 * (m1 + m2))) ** (1 / 3) * m1 * m2 * T ** (1 / 3)


def near_distance_coefficient(kind: str) -> float:
    """c with sum_{R != I} 1/|(R - I) x| >= c / |x| for every x."""
    if kind == "T":
        return 3 / 2 + 8 / np.sqrt(3)
    if kind == "O":
        return 9 / 2 + 6 / np.sqrt(2) + 8 / np.sqrt(3)
    if kind == "I":
        return (15 / 2 + 12 / (2 * np.sin(np.pi / 5)) + 12 / (2 * np.cos(np.pi / 10))
                + 20 / np.sqrt(3))
    raise ValueError(kind)


def total_collision_bound(kind: str, improved: bool = False, T: float = 1.0) -> float:
    """N times the Gordon bound of the radial two-body surrogate.

    The crude estimate uses sum >= (N - 1) / (2 rho); the improved one the
    group-specific coefficient.
    """
    N = GROUP_SIZE[kind]
    if improved:
        c = near_distance_coefficient(kind)
        return 3 * N * (np.pi**2 * c**2 / 8) ** (1 / 3) * T ** (1 / 3)
    return 3 * N * (np.pi**2 * (N - 1) ** 2 / 32) ** (1 / 3) * T ** (1 / 3)


def total_collision_bound_via_gordon(kind: str, improved: bool = False, T: float = 1.0) -> float:
    """Same bound assembled from gordon_bound (two masses 1/2)."""
    N = GROUP_SIZE[kind]
    K = 2 * near_distance_coefficient(kind) if improved else N - 1
    # (N/2)(rho'^2 + c/rho) is N times the action of two masses 1/2 at
    # +-x, |x| = rho, with coupling 4c; the crude case has c = (N - 1)/2
    return N * gordon_bound(0.5, 0.5, 2 * K, T)


def multi_collision_bound(base: float, M: int) -> float:
    if M < 1:
        raise ValueError("M must be >= 1")
    return M ** (2 / 3) * base


def k4_bounds(T: float = 1.0) -> tuple[float, float]:
    """(collision lower bound, test-loop upper bound) for the four-body cone."""
    lower = 18 * 2 ** (-1 / 3) * np.pi ** (2 / 3) * T ** (1 / 3)
    upper = 18 * 3 ** (-1 / 3) * np.pi ** (2 / 3) * T ** (1 / 3)
    assert upper < lower
    return float(lower), float(upper)


def k4_test_bound(rho: float, T: float = 1.0) -> float:
    """32 pi^2 rho^2 / T + 3 T / rho, the estimate for the four half circles."""
    return 32 * np.pi**2 * rho**2 / T + 3 * T / rho


@dataclass
class BoundReport:
    kind: str
    a: float
    a_prime: float
    M: int = 1

    @property
    def scaled(self) -> float:
        return multi_collision_bound(self.a, self.M)

    @property
    def scaled_prime(self) -> float:
        return multi_collision_bound(self.a_prime, self.M)


def bound_report(kind: str, M: int = 1) -> BoundReport:
    return BoundReport(kind, total_collision_bound(kind), total_collision_bound(kind, True), M)
