"""L2 gradient flow of the discrete action on a symmetric cone.

The flow is explicit steepest descent.  Each iteration proposes a
Barzilai-Borwein step, then backtracks until the Armijo condition holds and
the step is certified to stay in the cone: no sample moves farther than the
distance of the interpolated loop from Gamma, so the straight-line homotopy
between iterates never meets an axis.  The action is monotone along the
trace.

With ``metric="H1"`` the gradient is preconditioned by the discrete
kinetic operator (an FFT solve).  The fixed points are the same, but the
iteration count no longer grows like m^2 under grid refinement.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .action import CollisionError, action_gradient, action_parts, optimal_scaling
from .loops import GeneratingLoop, SymmetryConstraint, project, symmetry_residual
from .symmetry import axes_of


@dataclass
class FlowParams:
    alpha: float = 1.0
    max_iter: int = 20000
    gtol: float = 1e-9  # stop on L2 gradient norm relative to the action
    ftol: float = 0.0  # stop on relative action decrease over ``window`` iterations
    window: int = 50
    step0: float = 1e-3
    armijo: float = 1e-4
    shrink: float = 0.5
    min_step: float = 1e-20
    certify: float = 0.5  # max sample displacement / distance of the loop from Gamma
    min_dist_floor: float = 1e-4  # abort below this distance to Gamma (times the diameter)
    check_every: int = 100  # invariant audit period (0 disables)
    rescale: bool = True  # start from the optimal homothety
    time_limit: float = 300.0
    metric: str = "L2"  # "H1" preconditions by the discrete Laplacian (same critical points)

    @classmethod
    def from_dict(cls, d: dict) -> "FlowParams":
        known = set(cls.__dataclass_fields__)
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown flow parameters: {sorted(bad)}")
        if d.get("metric", "L2") not in ("L2", "H1"):
            raise ValueError("metric must be 'L2' or 'H1'")
        return cls(**d)


@dataclass
class FlowTrace:
    actions: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    min_gamma: list = field(default_factory=list)
    symmetry_residuals: list = field(default_factory=list)
    invariant_checks: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    iterations: int = 0
    elapsed: float = 0.0

    @property
    def monotone(self) -> bool:
        a = np.asarray(self.actions)
        return bool(np.all(np.diff(a) <= 1e-12 * np.abs(a[:-1]).max(initial=1.0)))

    @property
    def final_action(self) -> float:
        return float(self.actions[-1])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["monotone"] = self.monotone
        return d


def discrete_gradient(loop: GeneratingLoop, alpha: float = 1.0,
                      constraint: SymmetryConstraint | None = None) -> np.ndarray:
    g = action_gradient(loop.group, loop.x, loop.T, alpha)
    if constraint is not None:
        g = project(g, constraint)
    return g


def _l2(g: np.ndarray, h: float) -> float:
    # gradient w.r.t. samples is h times the L2 gradient
    return float(np.sqrt(np.sum(g * g) / h))


def _sobolev_symbol(loop: GeneratingLoop) -> np.ndarray:
    m, h = loop.m, loop.h
    lam = 2 - 2 * np.cos(2 * np.pi * np.arange(m) / m)
    return loop.group.order / h * (lam + (2 * np.pi / m) ** 2)


def sobolev_apply(x: np.ndarray, loop: GeneratingLoop) -> np.ndarray:
    return np.real(np.fft.ifft(np.fft.fft(x, axis=0) * _sobolev_symbol(loop)[:, None], axis=0))


def sobolev_direction(g: np.ndarray, loop: GeneratingLoop) -> np.ndarray:
    """Solve (N/h)(L + eps) d = g for the periodic second-difference L.

    The operator is circulant and acts on each coordinate alike, so it
    commutes with time shifts, time reversal and rotations: a symmetric g
    gives a symmetric d.
    """
    return np.real(np.fft.ifft(np.fft.fft(g, axis=0) / _sobolev_symbol(loop)[:, None], axis=0))


def _value(loop, x, alpha):
    return action_parts(loop.group, x, loop.T, alpha).total


def gradient_flow(loop: GeneratingLoop, params: FlowParams | None = None,
                  constraint: SymmetryConstraint | None = None, cx=None,
                  invariant=None, log=None) -> tuple[GeneratingLoop, FlowTrace]:
    """Minimize the action from ``loop``; returns the final loop and the trace.

    ``cx`` and ``invariant`` (sigma, n) enable periodic topology audits; a
    change of invariant rejects the step.
    """
    p = params or FlowParams()
    a = p.alpha
    axes = axes_of(loop.group)
    if constraint is not None:
        loop = loop.with_x(project(loop.x, constraint))
    if p.rescale:
        lam, _ = optimal_scaling(action_parts(loop.group, loop.x, loop.T, a))
        loop = loop.scaled(lam)
    if invariant is None and cx is not None:
        from .topology import loop_invariant
        invariant = loop_invariant(cx, loop)
    x = loop.x.copy()
    h = loop.h
    dist = axes.loop_distance(x)
    diam = 2 * float(np.linalg.norm(x, axis=1).max())
    tr = FlowTrace()
    f = _value(loop, x, a)
    g = discrete_gradient(loop.with_x(x), a, constraint)
    h1 = p.metric == "H1"
    direction = (lambda g_: sobolev_direction(g_, loop)) if h1 else (lambda g_: g_)
    d = direction(g)
    step = 1.0 if h1 else p.step0
    x_prev = g_prev = None
    t0 = time.perf_counter()
    tr.actions.append(f)
    tr.grad_norms.append(_l2(g, h))
    tr.min_gamma.append(dist)
    for it in range(1, p.max_iter + 1):
        gn = _l2(g, h)
        if gn <= p.gtol * max(1.0, abs(f)):
            tr.converged, tr.reason = True, "gradient tolerance"
            break
        if x_prev is not None:
            s = x - x_prev
            y = g - g_prev
            sy = float(np.sum(s * y))
            if sy > 0:
                # Barzilai-Borwein in the chosen metric: s = -step d_prev
                Ps = sobolev_apply(s, loop) if h1 else s
                step = float(np.sum(s * Ps)) / sy
        gg = float(np.sum(g * d))
        while True:
            xn = x - step * d
            ok = True
            try:
                fn = _value(loop, xn, a)
            except CollisionError:
                ok = False
            if ok and not np.isfinite(fn):
                ok = False
            if ok and fn > f - p.armijo * step * gg:
                ok = False
            if ok and np.sqrt(np.max(np.sum((xn - x) ** 2, axis=1))) >= p.certify * dist:
                ok = False
            if ok:
                break
            step *= p.shrink
            if step < p.min_step:
                tr.reason = "step underflow"
                break
        if tr.reason:
            # no admissible descent step left: the iterate is a discrete critical point
            tr.converged = gn <= 1e3 * p.gtol * max(1.0, abs(f))
            break
        if cx is not None and p.check_every and it % p.check_every == 0:
            from .topology import loop_invariant
            try:
                inv = loop_invariant(cx, loop.with_x(xn))
            except ValueError:
                inv = None
            same = inv is not None and inv[0] == list(invariant[0]) and inv[1] == invariant[1]
            tr.invariant_checks.append((it, bool(same)))
            if not same:
                tr.reason = "topology change rejected"
                break
        x_prev, g_prev = x, g
        x, f = xn, fn
        g = discrete_gradient(loop.with_x(x), a, constraint)
        d = direction(g)
        tr.actions.append(f)
        tr.grad_norms.append(_l2(g, h))
        tr.steps.append(step)
        dist = axes.loop_distance(x)
        tr.min_gamma.append(dist)
        if dist < p.min_dist_floor * diam:
            tr.reason = "possible boundary minimizer"
            break
        if constraint is not None and it % max(1, p.check_every or 100) == 0:
            tr.symmetry_residuals.append(symmetry_residual(loop.with_x(x), constraint))
        if log is not None and it % 500 == 0:
            log(f"iter {it}: action {f:.12g} |grad| {tr.grad_norms[-1]:.3e}")
        if p.ftol > 0 and it > p.window:
            old = tr.actions[-p.window - 1]
            if old - f <= p.ftol * abs(f):
                tr.converged, tr.reason = True, "action tolerance"
                break
        if time.perf_counter() - t0 > p.time_limit:
            tr.reason = "time limit"
            break
    else:
        tr.reason = "iteration limit"
    tr.iterations = len(tr.actions) - 1
    tr.elapsed = time.perf_counter() - t0
    return loop.with_x(x), tr


# --- verification against Newton's equations ---------------------------------


def newton_force(group, x: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    """Right-hand side of u'' = alpha sum_R (R - I) u / |(R - I) u|^(alpha + 2)."""
    D = group.nontrivial() - np.eye(3)[None]
    y = np.einsum("rij,mj->mri", D, x)
    d = np.linalg.norm(y, axis=2)
    return alpha * np.einsum("mr,mri->mi", d ** (-alpha - 2), y)


def second_derivative(x: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    r = lambda k: np.roll(x, -k, axis=0)
    if order == 2:
        return (r(1) - 2 * x + r(-1)) / h**2
    if order == 4:
        return (-r(2) + 16 * r(1) - 30 * x + 16 * r(-1) - r(-2)) / (12 * h**2)
    raise ValueError("order must be 2 or 4")


@dataclass
class Verification:
    residual: float  # max |u'' - F| / max |F|
    max_force: float
    min_gamma: float
    order: int
    energy_drift: float | None = None  # (max - min) / |mean| of the N-body energy

    def to_dict(self) -> dict:
        return asdict(self)


def verify_solution(loop: GeneratingLoop, alpha: float = 1.0, force=None,
                    order: int = 4) -> Verification:
    """Relative Euler-Lagrange residual of a sampled loop.

    ``force`` maps samples (m, 3) to accelerations; it defaults to the
    equivariant N-body force of the loop's group.
    """
    F = newton_force(loop.group, loop.x, alpha) if force is None else np.asarray(force(loop.x))
    acc = second_derivative(loop.x, loop.h, order)
    mf = float(np.abs(F).max())
    res = float(np.abs(acc - F).max() / mf)
    drift = None
    if force is None:
        E = energy(loop, alpha)
        drift = float((E.max() - E.min()) / abs(E.mean()))
    return Verification(res, mf, float(loop.min_gamma_distance()), order, drift)


def first_derivative(x: np.ndarray, h: float) -> np.ndarray:
    r = lambda k: np.roll(x, -k, axis=0)
    return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)


def energy(loop: GeneratingLoop, alpha: float = 1.0) -> np.ndarray:
    """N-body energy N |u'|^2 / 2 - (N/2) sum_R |(R - I) u|^-alpha at every sample."""
    N = loop.group.order
    v = first_derivative(loop.x, loop.h)
    D = loop.group.nontrivial() - np.eye(3)[None]
    d = np.linalg.norm(np.einsum("rij,mj->mri", D, loop.x), axis=2)
    U = np.sum(d ** (-alpha), axis=1)
    return 0.5 * N * np.sum(v * v, axis=1) - 0.5 * N * U


# --- alpha continuation -------------------------------------------------------


def cylinder_ratio(loop: GeneratingLoop) -> float:
    """Distance to each axis over the radius 1 / (2 sin(pi / k)) of its excluded cylinder.

    Two particles related by a k-fold turn are at distance 2 sin(pi / k) times
    the distance from the axis, so the ratio is 1 exactly at unit separation.
    """
    ax = axes_of(loop.group)
    G = ax.gamma
    x = loop.x
    proj = x @ G.T
    d = np.sqrt(np.clip(np.sum(x * x, axis=1)[:, None] - proj**2, 0, None))
    r = 1 / (2 * np.sin(np.pi / ax.folds))
    return float((d / r[None]).min())


@dataclass
class SweepPoint:
    alpha: float
    action: float
    kinetic: float
    potential: float
    mean_speed: float
    sup_norm: float
    l1_speed: float
    cylinder_ratio: float  # min over axes of distance / (1 / (2 sin(pi / fold)))
    iterations: int
    converged: bool
    reason: str

    def to_dict(self) -> dict:
        return asdict(self)


def alpha_sweep(loop: GeneratingLoop, alphas, params: FlowParams | None = None,
                constraint: SymmetryConstraint | None = None, cx=None, log=None):
    """Warm-started flows along ``alphas``; returns (points, final loops)."""
    base = params or FlowParams()
    points, loops = [], []
    cur = loop
    for a in alphas:
        p = FlowParams(**{**asdict(base), "alpha": float(a)})
        cur, tr = gradient_flow(cur, p, constraint, cx, log=log)
        b = action_parts(cur.group, cur.x, cur.T, a)
        points.append(SweepPoint(float(a), b.total, b.kinetic, b.potential,
                                 float(cur.speeds().mean()),
                                 float(np.linalg.norm(cur.x, axis=1).max()),
                                 float(cur.speeds().sum() * cur.h), cylinder_ratio(cur),
                                 tr.iterations, tr.converged, tr.reason))
        loops.append(cur)
        if log is not None:
            log(f"alpha {a}: action {b.total:.8g} after {tr.iterations} iterations ({tr.reason})")
    return points, loops
