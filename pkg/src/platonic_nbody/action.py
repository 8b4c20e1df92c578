"""Discrete action of an equivariant loop and its analytic test values.

The generating particle is sampled at t_j = j T / m, j = 0..m-1, with
periodic wrap.  The discrete action is

    A = N/2 * [ sum_j |x_{j+1} - x_j|^2 / h  +  h * sum_j U(x_j) ]

with h = T/m and U(x) = sum_{R != I} |(R - I) x|^(-alpha).  The kinetic
sum is the exact kinetic energy of the piecewise-linear interpolant (the
velocity is the centered difference at the half-step), the potential sum
is the periodic trapezoid rule.  Everything else in the package, including
the gradient used by the optimizer, is derived from this one formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .symmetry import RotationGroup

COLLISION_TOL = 1e-12


class CollisionError(ValueError):
    """A grid sample of the generating particle lies on an axis of Gamma."""

    def __init__(self, index: int, time: float, element: int, distance: float):
        self.index = index
        self.time = time
        self.element = element
        self.distance = distance
        super().__init__(
            f"collision at sample {index} (t={time:.6g}): |(R-I)u| = {distance:.3g} "
            f"for group element {element}")


@dataclass(frozen=True)
class ActionBreakdown:
    kinetic: float
    potential: float
    alpha: float = 1.0

    @property
    def total(self) -> float:
        return self.kinetic + self.potential

    @property
    def lambdaStar(self) -> float:
        return optimal_scaling(self)[0]

    @property
    def scaledMin(self) -> float:
        return optimal_scaling(self)[1]

    def to_dict(self) -> dict:
        d = {"kinetic": self.kinetic, "potential": self.potential, "total": self.total,
             "alpha": self.alpha}
        if self.kinetic > 0 and self.potential > 0:
            lam, amin = optimal_scaling(self)
            d.update(lambdaStar=lam, scaledMin=amin)
        return d


def _differences(group: RotationGroup) -> np.ndarray:
    """The matrices R - I for R != I, shape (N-1, 3, 3)."""
    return group.nontrivial() - np.eye(3)[None]


def pair_vectors(group: RotationGroup, x: np.ndarray) -> np.ndarray:
    """(R - I) x for every sample and every R != I: shape (m, N-1, 3)."""
    return np.einsum("rij,mj->mri", _differences(group), np.atleast_2d(x))


def check_collisions(group: RotationGroup, x: np.ndarray, T: float, tol: float = COLLISION_TOL):
    d = np.linalg.norm(pair_vectors(group, x), axis=2)
    j, r = np.unravel_index(int(np.argmin(d)), d.shape)
    if d[j, r] <= tol:
        raise CollisionError(int(j), T * j / len(x), int(r) + 1, float(d[j, r]))
    return d


def potential_values(group: RotationGroup, x: np.ndarray, alpha: float = 1.0, T: float = 1.0) -> np.ndarray:
    d = check_collisions(group, x, T)
    return np.sum(d ** (-alpha), axis=1)


def action_parts(group: RotationGroup, x: np.ndarray, T: float, alpha: float = 1.0) -> ActionBreakdown:
    x = np.asarray(x, dtype=float)
    m = len(x)
    h = T / m
    N = group.order
    dx = np.roll(x, -1, axis=0) - x
    kin = 0.5 * N * np.sum(dx * dx) / h
    pot = 0.5 * N * h * np.sum(potential_values(group, x, alpha, T))
    return ActionBreakdown(float(kin), float(pot), alpha)


def action(loop, alpha: float = 1.0) -> ActionBreakdown:
    return action_parts(loop.group, loop.x, loop.T, alpha)


def action_gradient(group: RotationGroup, x: np.ndarray, T: float, alpha: float = 1.0) -> np.ndarray:
    """Exact gradient of the discrete action with respect to the samples."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    h = T / m
    N = group.order
    lap = 2 * x - np.roll(x, 1, axis=0) - np.roll(x, -1, axis=0)
    D = _differences(group)
    y = np.einsum("rij,mj->mri", D, x)
    d = np.linalg.norm(y, axis=2)
    if d.min() <= COLLISION_TOL:
        check_collisions(group, x, T)
    w = -alpha * d ** (-alpha - 2)
    gU = np.einsum("mr,rji,mrj->mi", w, D, y)
    return 0.5 * N * (2 * lap / h + h * gU)


def optimal_scaling(b: ActionBreakdown) -> tuple[float, float]:
    """Homothety minimizing lam^2 A_K + A_U / lam^alpha, and the minimum."""
    if b.kinetic <= 0:
        raise ValueError("optimal scaling needs a positive kinetic part")
    if b.potential <= 0:
        raise ValueError("optimal scaling needs a positive potential part")
    a = b.alpha
    lam = (a * b.potential / (2 * b.kinetic)) ** (1 / (a + 2))
    return float(lam), float(lam**2 * b.kinetic + b.potential / lam**a)


def scaled_min_newton(kinetic: float, potential: float) -> float:
    """3 (A_K A_U^2 / 4)^(1/3), the alpha = 1 closed form."""
    return 3 * (kinetic * potential**2 / 4) ** (1 / 3)


# --- analytic test-loop action ------------------------------------------------


def edge_integrand(group: RotationGroup, a, b, R=None):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    D = _differences(group)
    if R is not None:
        D = D @ R

    def f(s):
        p = (1 - s) * a + s * b
        return float(np.sum(1 / np.linalg.norm(D @ p, axis=1)))

    return f


def upsilon(poly, i: int, R=None, epsabs: float = 1e-10) -> float:
    """int_0^1 sum_{R != I} 1/|(R - I) R' [(1-s) q + s q_i]| ds."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    qi = poly.q1 if i == 1 else poly.q2
    f = edge_integrand(poly.group, poly.q, qi, R)
    val, _ = quad(f, 0.0, 1.0, epsabs=epsabs, epsrel=1e-13, limit=200)
    return float(val)


def upsilon_tetrahedral_closed_form() -> float:
    s2, s3 = np.sqrt(2), np.sqrt(3)
    ln = np.log
    return float(-ln(s2 - 1) * s2 - 2 * ln(2 - s3) - 2 * ln(3) + 2 / 3 * s3 * ln(3)
                 + 2 * ln(2 + s3) - 2 / 3 * ln(2 - s3) * s3 + 2 / 3 * ln(2 + s3) * s3
                 - ln(s2 - 1))


def analytic_action(N: int, ell: float, n1: int, n2: int, ups1: float, ups2: float, T: float = 1.0) -> float:
    return 3 / (2 * 4 ** (1 / 3)) * N * ell ** (2 / 3) * (n1 * ups1 + n2 * ups2) ** (2 / 3) * T ** (1 / 3)


def analytic_test_action(poly, nu, n: int = 1, T: float = 1.0) -> float:
    """Minimum over homotheties of the action of the constant-speed loop on nu."""
    from .archimedean import edge_counts

    n1, n2 = edge_counts(poly, nu, n)
    return analytic_action(poly.group.order, poly.edge_length, n1, n2,
                           upsilon(poly, 1), upsilon(poly, 2), T)
