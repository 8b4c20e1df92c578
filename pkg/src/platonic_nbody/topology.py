"""Homotopy invariant (sigma, n) of sampled loops avoiding Gamma.

Crossings are computed on the piecewise-linear interpolant: every grid
segment is intersected with every mirror plane, and the chambers between
successive crossings are classified.  The raw chamber list is reduced by
the two erasure rules (D, D -> D and D, D', D -> D) applied cyclically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symmetry import axes_of
from .chambers import (ChamberComplex, common_rays, is_simple, locate_many,
                       minimal_period, normalize_rotation)

TRANSVERSAL_TOL = 1e-10
ON_FACE_TOL = 1e-13


@dataclass(frozen=True)
class Crossing:
    time: float
    face: int
    source: int
    target: int
    transversal: bool


def _chambers_between(cx: ChamberComplex, a: np.ndarray, b: np.ndarray, T0: float, dt: float):
    """Crossing events on the segment from a to b."""
    na = cx.mirror_normals @ a
    nb = cx.mirror_normals @ b
    hits = []
    for p in np.nonzero(na * nb < 0)[0]:
        s = na[p] / (na[p] - nb[p])
        hits.append((float(s), int(p)))
    if not hits:
        return []
    hits.sort()
    cuts = [0.0] + [s for s, _ in hits] + [1.0]
    mids = np.array([(cuts[k] + cuts[k + 1]) / 2 for k in range(len(cuts) - 1)])
    pts = (1 - mids)[:, None] * a + mids[:, None] * b
    ch = locate_many(cx, pts)
    d = b - a
    out = []
    for k, (s, p) in enumerate(hits):
        if k + 1 < len(hits) and hits[k + 1][0] - s < 1e-14:
            x = (1 - s) * a + s * b
            raise ValueError(f"segment passes through the axis set near {x}")
        src, dst = int(ch[k]), int(ch[k + 1])
        if src == dst:
            continue
        if not cx.adjacent(src, dst):
            raise ValueError("crossing between non-adjacent chambers; refine the grid")
        nrm = cx.mirror_normals[p]
        trans = abs(np.dot(nrm, d)) > TRANSVERSAL_TOL * np.linalg.norm(d)
        out.append(Crossing(T0 + s * dt, cx.face_between(src, dst), src, dst, bool(trans)))
    return out


def _on_mirror(cx: ChamberComplex, x: np.ndarray) -> bool:
    plane = np.abs(x @ cx.mirror_normals.T)
    return bool(plane.min() <= ON_FACE_TOL * max(1.0, np.abs(x).max()))


def crossing_sequence(cx: ChamberComplex, loop) -> list[Crossing]:
    """All face crossings of the interpolated loop over one period, in order.

    Test loops put vertices and edge midpoints of Q_R on the grid, and those
    lie on mirrors.  In that case the same curve is sampled half a step later.
    """
    x = loop.x
    m = len(x)
    scale_ = max(1.0, np.abs(x).max())
    if axes_of(cx.group).distance(x).min() <= ON_FACE_TOL * scale_:
        raise ValueError("a sample lies on the axis set")
    t0 = 0.0
    if _on_mirror(cx, x):
        t0 = 0.5 * loop.h
        x = loop.at(loop.times + t0)
        if _on_mirror(cx, x):
            raise ValueError("loop runs along a mirror; shift or refine the grid")
    out = []
    for j in range(m):
        out += _chambers_between(cx, x[j], x[(j + 1) % m], t0 + j * loop.h, loop.h)
    return out


def start_chamber(cx: ChamberComplex, loop) -> int:
    x = loop.x[:1]
    if _on_mirror(cx, x):
        x = loop.at(np.array([0.5 * loop.h]))
    return int(locate_many(cx, x)[0])


def raw_chambers(cx: ChamberComplex, loop) -> list[int]:
    """Chambers visited in order, closing cyclically (last -> first)."""
    cr = crossing_sequence(cx, loop)
    if not cr:
        return [start_chamber(cx, loop)]
    return [c.target for c in cr]


def cyclic_reduce(seq) -> list[int]:
    """Apply D, D -> D and D_{k-1} = D_{k+1} erasure until stable (cyclically)."""
    stack: list[int] = []
    for c in seq:
        c = int(c)
        if stack and stack[-1] == c:
            continue
        if len(stack) >= 2 and stack[-2] == c:
            stack.pop()
            continue
        stack.append(c)
    changed = True
    while changed and len(stack) > 1:
        changed = False
        if stack[-1] == stack[0]:
            stack.pop()
            changed = True
            continue
        if len(stack) >= 3 and stack[-2] == stack[0]:
            # ..., s[-2], s[-1], s[0] with s[-2] == s[0]: erase s[-1], s[0]
            stack.pop()
            stack.pop(0)
            changed = True
            continue
        if len(stack) >= 3 and stack[-1] == stack[1]:
            # s[-1], s[0], s[1] with s[-1] == s[1]: erase s[0], s[1]
            stack.pop(0)
            stack.pop(0)
            changed = True
            continue
        if len(stack) == 2:
            # D, D' closing back to D is a pure backtrack
            stack = stack[:1]
            changed = True
    if len(stack) <= 1:
        return []
    return stack


def reduce_to_invariant(raw) -> tuple[list[int], int]:
    """Reduced minimal-period sigma (translation-normalized) and multiplicity n.

    An empty reduction means the loop is homotopically trivial.
    """
    red = cyclic_reduce(raw)
    if not red:
        raise ValueError("loop reduces to the trivial class (violates condition (C))")
    p = minimal_period(red)
    return normalize_rotation(red[:p]), len(red) // p


def loop_invariant(cx: ChamberComplex, loop) -> tuple[list[int], int]:
    return reduce_to_invariant(raw_chambers(cx, loop))


def same_cone(cx: ChamberComplex, loop1, loop2) -> bool:
    try:
        a = loop_invariant(cx, loop1)
    except ValueError:
        a = None
    try:
        b = loop_invariant(cx, loop2)
    except ValueError:
        b = None
    return a == b


def condition_C_check(cx: ChamberComplex, sigma) -> bool:
    """True iff the closures of the chambers meet only at the origin."""
    sigma = list(sigma)
    if len(sigma) <= 2:
        return False
    return not common_rays(cx, sigma)


@dataclass
class Locus:
    k: int
    ray: int
    direction: np.ndarray
    third_face: int
    k_tilde: int | None
    repeats_face: bool


def _third_face(cx: ChamberComplex, prev: int, cur: int, nxt: int) -> int:
    for i in range(3):
        c = int(cx.neighbors[cur, i])
        if c != prev and c != nxt:
            return cx.face_between(cur, c)
    raise ValueError("chamber sequence is not reduced")


def collision_loci(cx: ChamberComplex, sigma, n: int = 1) -> list[Locus]:
    """Semiaxes r_k = closure(S_{k+1}) and closure(S^k) minus the origin.

    S_k is the face through which D_k is entered and S^k the third face of
    D_k.  k~ is the first later index whose third face also contains r_k;
    ``repeats_face`` flags S^{k~} == S^k.
    """
    seq = [int(c) for c in sigma] * n
    L = len(seq)
    third = [_third_face(cx, seq[k - 1], seq[k], seq[(k + 1) % L]) for k in range(L)]
    out = []
    for k in range(L):
        exit_face = cx.faces[cx.face_between(seq[k], seq[(k + 1) % L])]
        tf = cx.faces[third[k]]
        shared = set(exit_face.rays) & set(tf.rays)
        if len(shared) != 1:
            raise RuntimeError("exit and third face do not share a ray")
        r = shared.pop()
        kt = None
        for h in range(1, L + 1):
            if r in cx.faces[third[(k + h) % L]].rays:
                kt = k + h
                break
        rep = kt is not None and third[kt % L] == third[k]
        out.append(Locus(k, r, cx.rays[r].copy(), third[k], kt, bool(rep)))
    return out


@dataclass
class CrossingAudit:
    count: int
    expected: int
    all_transversal: bool
    min_normal_speed: float

    @property
    def ok(self) -> bool:
        return self.count == self.expected and self.all_transversal

    def to_dict(self) -> dict:
        return {"count": self.count, "expected": self.expected,
                "all_transversal": self.all_transversal,
                "min_normal_speed": self.min_normal_speed, "ok": self.ok}


def crossing_count_audit(cx: ChamberComplex, loop, sigma, n: int = 1) -> CrossingAudit:
    cr = crossing_sequence(cx, loop)
    x = loop.x
    m = len(x)
    vmin = np.inf
    for c in cr:
        j = int(np.floor(c.time / loop.h + 1e-12)) % m
        v = (x[(j + 1) % m] - x[j]) / loop.h
        nrm = cx.faces[c.face].normal
        vmin = min(vmin, abs(float(np.dot(v, nrm))))
    return CrossingAudit(len(cr), n * len(list(sigma)), all(c.transversal for c in cr),
                         float(vmin) if cr else 0.0)


def invariant_report(cx: ChamberComplex, loop) -> dict:
    sigma, n = loop_invariant(cx, loop)
    loci = collision_loci(cx, sigma, 1)
    return {
        "sigma": sigma,
        "n": n,
        "K_sigma": len(sigma),
        "simple": is_simple(cx, sigma, n),
        "condition_C": condition_C_check(cx, sigma),
        "loci": [{"k": lc.k, "ray": lc.ray, "direction": lc.direction.tolist(),
                  "k_tilde": lc.k_tilde, "repeats_face": lc.repeats_face} for lc in loci],
        "min_gamma_distance": float(loop.min_gamma_distance()),
    }
