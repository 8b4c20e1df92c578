"""Symmetric Keplerian arcs versus the parabolic ejection-collision pair.

A unit mass attracted by mu / r runs from rho (cos th, -sin th) to
rho (cos th, sin th) in time 2 tau, with tau the parabolic travel time
from the origin to radius rho.  The arc crosses the polar axis at an
apsis: the apocenter when th < sqrt(2)/3, the pericenter above.  We write
the apsis sign as ``sgn`` (-1 below the threshold, +1 above) so that the
orbit is r = (J^2 / mu) / (1 + sgn e cos(phi)).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import bisect

THRESHOLD = np.sqrt(2) / 3
QUAD_TOL = 1e-13
ROOT_TOL = 1e-15


def branch_sign(theta: float) -> int:
    return -1 if theta < THRESHOLD else 1


def travel_time(rho: float, mu: float) -> float:
    return np.sqrt(2) / 3 * rho**1.5 / np.sqrt(mu)


def parabolic_action(rho: float, mu: float) -> float:
    """A0 = 2^(3/2) (rho mu)^(1/2), the action of the ejection from O to radius rho."""
    return 2**1.5 * np.sqrt(rho * mu)


def parabolic_motion(alpha: float, t):
    """s(t) = 3^(2/3)/2 alpha^(1/3) t^(2/3), zero-energy radial motion for mu = alpha/4."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    return 3 ** (2 / 3) / 2 * alpha ** (1 / 3) * t ** (2 / 3)


def parabolic_speed(alpha: float, s):
    return np.sqrt(alpha / 2) / np.sqrt(s)


def _residual(e: float, theta: float, sgn: int) -> float:
    # bracket probes close to e = 1 make the integrand nearly singular at 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        lhs, _ = quad(lambda p: (1 + sgn * e * np.cos(p)) ** -2, 0.0, theta,
                      epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return lhs - THRESHOLD * (1 + sgn * e * np.cos(theta)) ** -1.5


def eccentricity_window(theta: float) -> tuple[float, float]:
    """Open admissible range of e for the given half-angle."""
    if theta <= THRESHOLD:
        return 0.0, 1.0
    if theta <= np.pi / 2:
        return 0.0, np.inf
    return 0.0, -1.0 / np.cos(theta)


def eccentricity_residual(e: float, theta: float) -> float:
    return _residual(e, theta, branch_sign(theta))


def solve_eccentricity(theta: float) -> float:
    """Root of int_0^th (1 + sgn e cos)^-2 = sqrt(2)/3 (1 + sgn e cos th)^-3/2."""
    if not 0 < theta < np.pi:
        raise ValueError("theta must lie in (0, pi)")
    if abs(theta - THRESHOLD) < 1e-15:
        return 0.0
    sgn = branch_sign(theta)
    lo, hi = eccentricity_window(theta)
    f = lambda e: _residual(e, theta, sgn)
    f_lo = f(lo)
    if not np.isfinite(hi):
        hi = 1.0
        while np.sign(f(hi)) == np.sign(f_lo):
            hi *= 2
            if hi > 1e12:
                raise RuntimeError("no root in the admissible window")
    else:
        # pull the open end inward until the residual changes sign
        eps = 1e-3
        while True:
            b = hi - eps * (hi - lo)
            fb = f(b)
            if np.isfinite(fb) and np.sign(fb) != np.sign(f_lo):
                hi = b
                break
            eps /= 10
            if eps < 1e-15:
                raise RuntimeError("no root in the admissible window")
    if f_lo == 0:
        return lo
    return float(bisect(f, lo, hi, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps, maxiter=400))


def ratio_formula(e: float, theta: float, sgn: int | None = None) -> float:
    """a = (1 - e^2) / (4 (1 + sgn e cos th)) + sgn e sin th / sqrt(2 (1 + sgn e cos th))."""
    if sgn is None:
        sgn = branch_sign(theta)
    d = 1 + sgn * e * np.cos(theta)
    return float((1 - e * e) / (4 * d) + sgn * e * np.sin(theta) / np.sqrt(2 * d))


def action_ratio(theta: float) -> float:
    """A / A0 for the symmetric arc of half-angle theta.

    At theta = 0 the arc degenerates to the radial ejection-collision pair
    (e -> 1) and the ratio tends to 1/2.
    """
    if not 0 <= theta < np.pi:
        raise ValueError("theta must lie in [0, pi)")
    if theta == 0:
        return 0.5
    return ratio_formula(solve_eccentricity(theta), theta)


def curve_ell(eta: float) -> tuple[float, float]:
    """Point (e, theta) of the critical curve e = sqrt(1 + (1 + eta)^2), eta = e cos th."""
    e = float(np.sqrt(1 + (1 + eta) ** 2))
    return e, float(np.arccos(eta / e))


def ratio_on_ell(eta: float) -> float:
    e, th = curve_ell(eta)
    return 1 - (1 + e * np.cos(th)) / 4


@dataclass
class ArcProblem:
    theta: float
    rho: float = 1.0
    mu: float = 0.25  # alpha / 4

    def __post_init__(self):
        if not 0 < self.theta < np.pi:
            raise ValueError("theta must lie in (0, pi)")
        self.e = solve_eccentricity(self.theta)
        self.branch = "apocenter" if self.theta < THRESHOLD else "pericenter"
        lo, hi = eccentricity_window(self.theta)
        if not lo <= self.e < hi:
            raise RuntimeError("eccentricity outside the admissible window")

    @property
    def sgn(self) -> int:
        return branch_sign(self.theta)

    @property
    def tau(self) -> float:
        return travel_time(self.rho, self.mu)

    @property
    def rho0(self) -> float:
        s = self.sgn
        return self.rho * (1 + s * self.e * np.cos(self.theta)) / (1 + s * self.e)

    @property
    def J(self) -> float:
        return float(np.sqrt(self.rho0 * self.mu * (1 + self.sgn * self.e)))

    @property
    def energy(self) -> float:
        return self.mu / (2 * self.rho0) * (-1 + self.sgn * self.e)

    def apsis_state(self) -> np.ndarray:
        """(x, y, vx, vy) at the apsis on the polar axis, t = 0."""
        return np.array([self.rho0, 0.0, 0.0, self.J / self.rho0])

    @property
    def ratio(self) -> float:
        return ratio_formula(self.e, self.theta, self.sgn)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "e": self.e, "branch": self.branch, "rho": self.rho,
                "mu": self.mu, "tau": self.tau, "rho0": self.rho0, "a": self.ratio}


def ratio_table(n: int = 2000, theta_max: float = np.pi - 1e-3) -> np.ndarray:
    """Rows (theta, e, a) on a uniform grid of [0, theta_max]."""
    out = np.empty((n, 3))
    for k, th in enumerate(np.linspace(0.0, theta_max, n)):
        if th == 0:
            out[k] = (0.0, 1.0, 0.5)
        else:
            e = solve_eccentricity(th)
            out[k] = (th, e, ratio_formula(e, th))
    return out
