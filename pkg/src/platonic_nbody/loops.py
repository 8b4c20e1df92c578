"""Sampled periodic loops of the generating particle.

A loop is stored as m samples x_j = u_1(j T / m); intermediate times are
covered by piecewise-linear interpolation.  Symmetry constraints are
finite groups acting on sample arrays by

    (g u)_j = Q u_{(eps * j + d) mod m},

and the symmetric part of a loop is obtained by averaging over that group.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .symmetry import (RotationGroup, axes_of, build_rotation_group, klein_four,
                       reflection_matrix, rotation_matrix)

MIN_SAMPLES = 16
ANGLE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GeneratingLoop:
    T: float
    x: np.ndarray  # (m, 3)
    group: RotationGroup
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[1] != 3:
            raise ValueError("samples must have shape (m, 3)")
        if len(x) < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples")
        if self.T <= 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "x", x)

    @property
    def m(self) -> int:
        return len(self.x)

    @property
    def h(self) -> float:
        return self.T / self.m

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.m) * self.h

    @property
    def N(self) -> int:
        return self.group.order

    def with_x(self, x) -> "GeneratingLoop":
        return replace(self, x=np.asarray(x, dtype=float))

    def at(self, t) -> np.ndarray:
        """Piecewise-linear interpolation at time(s) t."""
        s = np.asarray(t, dtype=float) / self.h
        j = np.floor(s).astype(int)
        f = (s - j)[..., None]
        j0 = j % self.m
        j1 = (j + 1) % self.m
        return (1 - f) * self.x[j0] + f * self.x[j1]

    def velocities(self) -> np.ndarray:
        """Velocity on each grid interval [t_j, t_j+1]."""
        return (np.roll(self.x, -1, axis=0) - self.x) / self.h

    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities(), axis=1)

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.roll(self.x, -1, axis=0) - self.x, axis=1)))

    def scaled(self, lam: float) -> "GeneratingLoop":
        return self.with_x(lam * self.x)

    def shifted(self, k: int) -> "GeneratingLoop":
        """Time shift by k samples: new x_j = old x_{j+k}."""
        return self.with_x(np.roll(self.x, -k, axis=0))

    def reversed(self) -> "GeneratingLoop":
        """u(-t)."""
        return self.with_x(np.roll(self.x[::-1], 1, axis=0))

    def resampled(self, m: int) -> "GeneratingLoop":
        return self.with_x(self.at(np.arange(m) * self.T / m))

    def gamma_distance(self) -> np.ndarray:
        return axes_of(self.group).distance(self.x)

    def min_gamma_distance(self) -> float:
        return float(self.gamma_distance().min())


def scale(loop: GeneratingLoop, lam: float) -> GeneratingLoop:
    return loop.scaled(lam)


def polyline_loop(points, group: RotationGroup, T: float, m: int, start: float = 0.0,
                  meta: dict | None = None) -> GeneratingLoop:
    """Constant-speed traversal of the closed polyline through ``points``.

    ``start`` is the arc-length fraction of the period at which t = 0 sits.
    """
    P = np.asarray(points, dtype=float)
    seg = np.roll(P, -1, axis=0) - P
    lens = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = cum[-1]
    s = (np.arange(m) / m + start) % 1.0 * total
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(P) - 1)
    f = (s - cum[k]) / lens[k]
    x = P[k] + f[:, None] * seg[k]
    return GeneratingLoop(T, x, group, dict(meta or {}))


def loop_from_nu(poly, nu, n: int = 1, T: float = 1.0, m: int = 128, start: float = 0.0) -> GeneratingLoop:
    """v^(nu, n): every edge of the closed path takes time T / (n K).

    ``start`` is the position at t = 0, in edges along nu.
    """
    nu = [int(v) for v in nu]
    pts = poly.vertices[nu * n]
    return polyline_loop(pts, poly.group, T, m, start / (n * len(nu)),
                         {"nu": nu, "n": n, "source": "nu"})


def loop_from_sigma(cx, sigma, n: int = 1, T: float = 1.0, m: int = 128, start: float = 0.0) -> GeneratingLoop:
    """Constant-speed polyline through the chamber centers c_1, ..., c_nK."""
    sigma = [int(c) for c in sigma]
    pts = cx.centers[sigma * n]
    return polyline_loop(pts, cx.group, T, m, start / (n * len(sigma)),
                         {"sigma": sigma, "n": n, "source": "sigma"})


def expand_orbit(loop: GeneratingLoop) -> np.ndarray:
    """Trajectories u_j = R_j u_1 of all N particles, shape (N, m, 3)."""
    return np.einsum("rij,mj->rmi", loop.group.matrices, loop.x)


def full_action(loop: GeneratingLoop, alpha: float = 1.0) -> float:
    """Action from all N trajectories and all pairs (no reduction)."""
    u = expand_orbit(loop)
    h = loop.h
    kin = 0.5 * np.sum((np.roll(u, -1, axis=1) - u) ** 2) / h
    pot = 0.0
    N = len(u)
    for i in range(N):
        for j in range(i + 1, N):
            pot += h * np.sum(np.linalg.norm(u[i] - u[j], axis=1) ** (-alpha))
    return float(kin + pot)


# --- symmetry constraints ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetryConstraint:
    """Generators (Q, eps, shift) with shift a fraction of the period."""

    variant: str
    generators: tuple
    params: dict = field(default_factory=dict)
    divisor: int = 1  # m must be divisible by this

    def elements(self, m: int) -> list[tuple[np.ndarray, int, int]]:
        if m % self.divisor:
            raise ValueError(f"grid size {m} is not divisible by {self.divisor}")
        gens = []
        for Q, eps, frac in self.generators:
            d = frac * m
            if abs(d - round(d)) > 1e-9:
                raise ValueError("time shift does not fall on the grid")
            gens.append((np.asarray(Q, float), int(eps), int(round(d)) % m))
        elems = [(np.eye(3), 1, 0)]
        frontier = list(elems)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    c = (a[0] @ g[0], a[1] * g[1], (g[1] * a[2] + g[2]) % m)
                    if not any(c[1] == e[1] and c[2] == e[2] and np.max(np.abs(c[0] - e[0])) < 1e-9
                               for e in elems):
                        elems.append(c)
                        nxt.append(c)
            frontier = nxt
            if len(elems) > 4 * m * 64:
                raise RuntimeError("constraint group is not finite on this grid")
        return elems


def act(x: np.ndarray, g) -> np.ndarray:
    Q, eps, d = g
    m = len(x)
    idx = (eps * np.arange(m) + d) % m
    return x[idx] @ np.asarray(Q).T


def project(x: np.ndarray, constraint: SymmetryConstraint) -> np.ndarray:
    elems = constraint.elements(len(x))
    acc = np.zeros_like(x)
    for g in elems:
        acc += act(x, g)
    return acc / len(elems)


def symmetrize(loop: GeneratingLoop, constraint: SymmetryConstraint) -> GeneratingLoop:
    return loop.with_x(project(loop.x, constraint))


def symmetry_residual(loop: GeneratingLoop, constraint: SymmetryConstraint) -> float:
    return float(np.max(np.abs(project(loop.x, constraint) - loop.x)))


def abc_constraint(frame, orientation: int = 1) -> SymmetryConstraint:
    """u(t) = S3 u(-t) and u(t + T/H) = R u(t), R the 2 pi / H turn about e1."""
    H = frame.H
    R = rotation_matrix(frame.e1, orientation * 2 * np.pi / H)
    S3 = np.diag([1.0, 1.0, -1.0])
    # u(t) = R u(t - T/H)
    return SymmetryConstraint("abc", ((S3, -1, 0.0), (R, 1, -1.0 / H)),
                              {"polyhedron": frame.polyhedron, "H": H, "orientation": orientation},
                              divisor=2 * H)


def tilde_constraint(R_pi: np.ndarray, M: int, R: np.ndarray) -> SymmetryConstraint:
    """u(t) = R~_Pi u(-t) and u(t + T/M) = R u(t)."""
    return SymmetryConstraint("tilde", ((R_pi, -1, 0.0), (R, 1, -1.0 / M)),
                              {"M": M, "R_pi": np.asarray(R_pi).tolist(), "R": np.asarray(R).tolist()},
                              divisor=2 * M)


def k4_constraint() -> SymmetryConstraint:
    """u(t) = S3 u(-t) and u(T/4 + t) = S2 u(T/4 - t)."""
    S3 = np.diag([1.0, 1.0, -1.0])
    S2 = np.diag([1.0, -1.0, 1.0])
    return SymmetryConstraint("k4", ((S3, -1, 0.0), (S2, -1, 0.5)), {}, divisor=4)


# --- the four-body test loop --------------------------------------------------


def k4_test_loop(rho: float, T: float = 1.0, m: int = 128) -> GeneratingLoop:
    """Four half circles of radius rho run at constant speed 4 pi rho / T.

    C2+ (plane xi2 = rho) through x = +rho, then C1- (xi3 = -rho) through
    x = -rho, C2- (xi2 = -rho), C1+ (xi3 = rho); u(0) = (rho, rho, 0).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    t = np.arange(m) / m  # fraction of period
    q = (t * 4 + 0.5) % 4  # quarter index with phase; q in [0, 4)
    k = np.floor(q).astype(int)
    th = (q - k) * np.pi  # angle along current half circle
    x = np.empty((m, 3))
    c, s = np.cos(th), np.sin(th)
    # each half circle runs from angle 0 to pi between two junction points
    # k=0: C2+ from (0, r, r) to (0, r, -r) through (r, r, 0)
    # k=1: C1- from (0, r, -r) to (0, -r, -r) through (-r, 0, -r)
    # k=2: C2- from (0, -r, -r) to (0, -r, r) through (r, -r, 0)
    # k=3: C1+ from (0, -r, r) to (0, r, r) through (-r, 0, r)
    r = rho
    sel = k == 0
    x[sel] = np.stack([r * s[sel], np.full(sel.sum(), r), r * c[sel]], axis=1)
    sel = k == 1
    x[sel] = np.stack([-r * s[sel], r * c[sel], np.full(sel.sum(), -r)], axis=1)
    sel = k == 2
    x[sel] = np.stack([r * s[sel], np.full(sel.sum(), -r), -r * c[sel]], axis=1)
    sel = k == 3
    x[sel] = np.stack([-r * s[sel], -r * c[sel], np.full(sel.sum(), r)], axis=1)
    return GeneratingLoop(T, x, klein_four(), {"source": "k4", "rho": rho})


def k4_optimal_rho(T: float = 1.0) -> float:
    return (3 * T**2 / (64 * np.pi**2)) ** (1 / 3)


# --- cone descriptors and membership -----------------------------------------


@dataclass(frozen=True, eq=False)
class ConeDescriptor:
    kind: str  # "K4", "KPi", "Knu", "free"
    group: RotationGroup
    sigma: tuple[int, ...] | None = None
    nu: tuple[int, ...] | None = None
    n: int = 1
    symmetry: SymmetryConstraint | None = None
    polyhedron: str | None = None
    index: int | None = None  # i of K^P_i
    cid: str | None = None


def in_open_angle(x, a, b, tol: float = ANGLE_TOL) -> bool:
    """x = s a + t b with s, t > 0 (and no component off the plane)."""
    x = np.asarray(x, float)
    A = np.array([a, b]).T
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    off = np.linalg.norm(A @ coef - x)
    scale_ = max(np.linalg.norm(x), 1e-300)
    return bool(off <= tol * scale_ and coef.min() > tol * scale_)


def kpi_angles(frame, i: int):
    """The two open angles constraining u(0) and u(T / 2H) in K^P_i."""
    if i == 1:
        return (frame.eM, frame.eAlpha), (frame.e1, frame.eV)
    if i == 2:
        return (frame.eM, frame.eAlpha), (frame.eV, frame.eBeta)
    if i == 3:
        return (frame.e1, frame.eM), (frame.eV, frame.eBeta)
    raise ValueError("i must be 1, 2 or 3")


@dataclass
class MembershipReport:
    member: bool
    min_gamma_distance: float
    checks: dict

    def to_dict(self) -> dict:
        return {"member": self.member, "min_gamma_distance": self.min_gamma_distance,
                "checks": self.checks}


def cone_membership_report(loop: GeneratingLoop, desc: ConeDescriptor, tol: float = 1e-9) -> MembershipReport:
    dist = loop.min_gamma_distance()
    checks: dict = {"off_gamma": bool(dist > tol)}
    if desc.symmetry is not None:
        try:
            res = symmetry_residual(loop, desc.symmetry)
            checks["symmetry_residual"] = res
            checks["symmetric"] = bool(res < 1e-8 * max(1.0, np.abs(loop.x).max()))
        except ValueError as exc:
            checks["symmetric"] = False
            checks["symmetry_error"] = str(exc)
    if desc.kind == "K4":
        a, b = loop.at(0.0)[0], loop.at(loop.T / 4)[0]
        checks["u11(0)*u11(T/4)"] = float(a * b)
        checks["sign_test"] = bool(a * b < 0)
    elif desc.kind == "KPi":
        fr = desc.group.frame
        A0, A1 = kpi_angles(fr, desc.index)
        H = fr.H
        checks["u(0)_in_angle"] = in_open_angle(loop.at(0.0), *A0)
        checks["u(T/2H)_in_angle"] = in_open_angle(loop.at(loop.T / (2 * H)), *A1)
    if desc.kind in ("Knu", "KPi") and (desc.sigma is not None or desc.nu is not None):
        from .topology import loop_invariant
        from .chambers import build_chamber_complex, normalize_rotation
        cx = build_chamber_complex(desc.group)
        try:
            sig, n = loop_invariant(cx, loop)
            want = desc.sigma
            if want is None:
                from .archimedean import build_qr, sigma_from_nu
                want = sigma_from_nu(build_qr(desc.group), desc.nu, desc.n)[0]
            checks["invariant"] = bool(normalize_rotation(sig) == normalize_rotation(want) and n == desc.n)
        except ValueError as exc:
            checks["invariant"] = False
            checks["invariant_error"] = str(exc)
    member = all(v for k, v in checks.items() if isinstance(v, bool))
    return MembershipReport(member, dist, checks)


def group_from_name(kind: str, polyhedron: str | None = None) -> RotationGroup:
    if kind == "D2":
        return klein_four()
    return build_rotation_group(kind, polyhedron)


__all__ = [
    "GeneratingLoop", "SymmetryConstraint", "ConeDescriptor", "MembershipReport",
    "loop_from_nu", "loop_from_sigma", "expand_orbit", "symmetrize", "k4_test_loop",
    "cone_membership_report", "abc_constraint", "tilde_constraint", "k4_constraint",
    "polyline_loop", "scale", "full_action", "k4_optimal_rho", "in_open_angle",
    "reflection_matrix",
]
