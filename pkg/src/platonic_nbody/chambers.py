"""Reflection group of a Platonic solid and its chamber decomposition.

The extended group R~ = R u R.S where S is the reflection in the plane
xi_3 = 0.  Chamber k is the image g_k D of the fundamental cone
D = cone(e1, eM, eV) under the k-th element of R~, so chamber indices and
group-element indices coincide.  Faces of D are labelled

    S1 = span(e1, eM)  (plane xi_3 = 0)
    S2 = span(eM, eV)
    S3 = span(e1, eV)

and R~_i denotes the reflection in the plane of S_i.  The chamber adjacent
to g D across g S_i is g R~_i D.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .symmetry import (SAME_TOL, RotationGroup, axes_of, build_rotation_group,
                       reflection_matrix)

FACE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Face:
    index: int
    normal: np.ndarray
    rays: tuple[int, int]
    chambers: tuple[int, int]
    kind: int  # 1, 2 or 3: the face of D this wall is an image of


@dataclass(frozen=True, eq=False)
class Location:
    kind: str  # "chamber", "face" or "gamma"
    index: int | None = None


@dataclass(frozen=True, eq=False)
class ChamberComplex:
    group: RotationGroup
    elements: np.ndarray  # (2N, 3, 3): rotations first, then R.S1
    reflections: np.ndarray  # R~_1, R~_2, R~_3
    mirrors: np.ndarray  # distinct reflection matrices of R~
    mirror_normals: np.ndarray
    rays: np.ndarray  # distinct vertex rays of chambers (poles)
    ray_type: np.ndarray  # 1 for e1-type, 2 for eM-type, 3 for eV-type
    ray_fold: np.ndarray  # fold of the axis through the ray
    chamber_rays: np.ndarray  # (2N, 3): ray indices of (g e1, g eM, g eV)
    neighbors: np.ndarray  # (2N, 3): chamber across face S_i
    faces: tuple[Face, ...]
    face_of_pair: dict = field(repr=False)
    _inv_vertices: np.ndarray = field(repr=False)

    @property
    def n_chambers(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def triangle(self, k: int) -> np.ndarray:
        """Vertex directions (rows) of the spherical triangle of chamber k."""
        return self.rays[self.chamber_rays[k]]

    def center(self, k: int) -> np.ndarray:
        return chamber_center(self, k)

    @property
    def centers(self) -> np.ndarray:
        return _centers(self)

    def element_index(self, m: np.ndarray) -> int:
        d = np.max(np.abs(self.elements - m[None]), axis=(1, 2))
        k = int(np.argmin(d))
        if d[k] >= SAME_TOL:
            raise KeyError("matrix is not in the reflection group")
        return k

    def product_table(self) -> np.ndarray:
        return _product_table(self)

    def permutation(self, m: np.ndarray) -> np.ndarray:
        """Chamber permutation induced by left multiplication with m."""
        return np.array([self.element_index(m @ g) for g in self.elements])

    def chambers_at_ray(self, r: int) -> np.ndarray:
        return np.nonzero(np.any(self.chamber_rays == r, axis=1))[0]

    def face_between(self, a: int, b: int) -> int:
        return self.face_of_pair[(min(a, b), max(a, b))]

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.face_of_pair

    def locate(self, x, tol: float = FACE_TOL) -> Location:
        return locate(self, x, tol)


def _unique_rows(points: np.ndarray, tol: float = SAME_TOL):
    reps: list[np.ndarray] = []
    index = np.empty(len(points), dtype=int)
    for i, p in enumerate(points):
        for j, r in enumerate(reps):
            if np.max(np.abs(p - r)) < tol:
                index[i] = j
                break
        else:
            index[i] = len(reps)
            reps.append(p)
    return np.array(reps), index


def build_chamber_complex(group: RotationGroup) -> ChamberComplex:
    return _build_complex(group.kind, group.polyhedron)


def complex_for(kind: str, polyhedron: str | None = None) -> ChamberComplex:
    g = build_rotation_group(kind, polyhedron)
    return _build_complex(g.kind, g.polyhedron)


@lru_cache(maxsize=None)
def _build_complex(kind: str, polyhedron: str) -> ChamberComplex:
    group = build_rotation_group(kind, polyhedron)
    fr = group.frame
    e1, eM, eV = fr.e1, fr.eM, fr.eV
    R1 = reflection_matrix(np.cross(e1, eM))
    R2 = reflection_matrix(np.cross(eM, eV))
    R3 = reflection_matrix(np.cross(e1, eV))
    rots = group.matrices
    elements = np.concatenate([rots, rots @ R1])
    n2 = len(elements)

    base = np.array([e1, eM, eV])
    verts = np.einsum("gij,kj->gki", elements, base)  # (2N, 3, 3) rows are rays
    rays, idx = _unique_rows(verts.reshape(-1, 3))
    chamber_rays = idx.reshape(n2, 3)
    ray_type = np.zeros(len(rays), dtype=int)
    for k in range(n2):
        for t in range(3):
            ray_type[chamber_rays[k, t]] = t + 1

    def index_of(m):
        d = np.max(np.abs(elements - m[None]), axis=(1, 2))
        j = int(np.argmin(d))
        if d[j] >= SAME_TOL:
            raise RuntimeError("reflection group is not closed")
        return j

    refl = (R1, R2, R3)
    neighbors = np.array([[index_of(g @ Ri) for Ri in refl] for g in elements])

    faces: list[Face] = []
    face_of_pair: dict = {}
    ray_pairs = ((0, 1), (1, 2), (0, 2))
    for k in range(n2):
        for i in range(3):
            j = int(neighbors[k, i])
            key = (min(k, j), max(k, j))
            if key in face_of_pair:
                continue
            a, b = ray_pairs[i]
            r = (int(chamber_rays[k, a]), int(chamber_rays[k, b]))
            nrm = np.cross(rays[r[0]], rays[r[1]])
            nrm /= np.linalg.norm(nrm)
            face_of_pair[key] = len(faces)
            faces.append(Face(index=len(faces), normal=nrm, rays=r, chambers=key, kind=i + 1))

    # mirrors: distinct reflections in R~ (trace 1, det -1)
    mir = [m for m in elements[len(rots):] if abs(np.trace(m) - 1) < 1e-9]
    normals = []
    for m in mir:
        w, v = np.linalg.eigh(m)
        normals.append(v[:, int(np.argmin(w))])
    normals = np.array(normals)

    axes = axes_of(group)
    fold = np.zeros(len(rays), dtype=int)
    for r, p in enumerate(rays):
        for ax in axes.axes:
            if np.linalg.norm(np.cross(ax.direction, p)) < 1e-9:
                fold[r] = ax.fold
    if np.any(fold == 0):
        raise RuntimeError("chamber ray off the axis set")

    inv = np.linalg.inv(np.transpose(verts, (0, 2, 1)))
    return ChamberComplex(
        group=group, elements=elements, reflections=np.array(refl), mirrors=np.array(mir),
        mirror_normals=normals, rays=rays, ray_type=ray_type, ray_fold=fold,
        chamber_rays=chamber_rays, neighbors=neighbors, faces=tuple(faces),
        face_of_pair=face_of_pair, _inv_vertices=inv,
    )


def _product_table(cx: ChamberComplex) -> np.ndarray:
    cached = getattr(cx, "_table", None)
    if cached is not None:
        return cached
    E = cx.elements
    n = len(E)
    flat = E.reshape(n, 9)
    table = np.empty((n, n), dtype=int)
    for i in range(n):
        p = np.einsum("ij,njk->nik", E[i], E).reshape(n, 9)
        d = np.max(np.abs(p[:, None, :] - flat[None]), axis=2)
        table[i] = np.argmin(d, axis=1)
    object.__setattr__(cx, "_table", table)
    return table


def _centers(cx: ChamberComplex) -> np.ndarray:
    cached = getattr(cx, "_centers", None)
    if cached is None:
        s = cx.rays[cx.chamber_rays].sum(axis=1)
        cached = s / np.linalg.norm(s, axis=1)[:, None]
        object.__setattr__(cx, "_centers", cached)
    return cached


def chamber_center(cx: ChamberComplex, k: int) -> np.ndarray:
    """Normalized sum of the three vertex directions of chamber k."""
    return _centers(cx)[k].copy()


def barycentric(cx: ChamberComplex, x) -> np.ndarray:
    """Coordinates of x in the ray basis of every chamber, shape (2N, 3)."""
    return np.einsum("gij,j->gi", cx._inv_vertices, np.asarray(x, dtype=float))


def gamma_distance(cx: ChamberComplex, x) -> np.ndarray:
    return axes_of(cx.group).distance(x)


def locate(cx: ChamberComplex, x, tol: float = FACE_TOL) -> Location:
    """Classify a nonzero point as inside a chamber, on a face, or on Gamma.

    Points within ``tol`` (after normalization) of a mirror plane are on a
    face; if also within ``tol`` of an axis they are reported on Gamma.
    Ties between faces resolve to the lowest face index.
    """
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("cannot locate the origin")
    u = x / nx
    if gamma_distance(cx, u)[0] < tol:
        return Location("gamma")
    plane_d = np.abs(cx.mirror_normals @ u)
    if plane_d.min() < tol:
        for f in cx.faces:
            if abs(np.dot(f.normal, u)) >= tol:
                continue
            a, b = cx.rays[f.rays[0]], cx.rays[f.rays[1]]
            coef, *_ = np.linalg.lstsq(np.array([a, b]).T, u, rcond=None)
            if coef.min() > -tol:
                return Location("face", f.index)
        raise RuntimeError("point on a mirror but on no face")
    bc = barycentric(cx, u)
    k = int(np.argmax(bc.min(axis=1)))
    return Location("chamber", k)


def locate_many(cx: ChamberComplex, X) -> np.ndarray:
    """Chamber index for each row of X (assumed off the mirrors)."""
    X = np.asarray(X, dtype=float)
    bc = np.einsum("gij,nj->ngi", cx._inv_vertices, X)
    return np.argmax(bc.min(axis=2), axis=1)


# --- sigma sequences ---------------------------------------------------------


def minimal_period(seq) -> int:
    seq = list(seq)
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and seq == seq[p:] + seq[:p]:
            return p
    return n


def normalize_rotation(seq) -> list[int]:
    """Lexicographically smallest cyclic rotation."""
    seq = [int(s) for s in seq]
    if not seq:
        return seq
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


@dataclass(frozen=True)
class SigmaSequence:
    chambers: tuple[int, ...]
    n: int = 1

    @property
    def period(self) -> int:
        return len(self.chambers)

    def full(self) -> list[int]:
        return list(self.chambers) * self.n


@dataclass
class SequenceReport:
    ok: bool
    condition: str | None = None
    index: int | None = None
    message: str = ""
    period: int | None = None
    n: int | None = None
    normalized: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def common_rays(cx: ChamberComplex, chambers) -> set[int]:
    out = None
    for k in chambers:
        s = set(int(r) for r in cx.chamber_rays[k])
        out = s if out is None else out & s
    return out or set()


def validate_sigma(cx: ChamberComplex, seq, n: int = 1) -> SequenceReport:
    """Check conditions (I), (II), (III) for the periodic chamber list."""
    seq = [int(s) for s in seq]
    if not seq:
        return SequenceReport(False, "I", None, "empty sequence")
    if n < 1:
        return SequenceReport(False, "I", None, "multiplicity must be >= 1")
    K = len(seq)
    for k, c in enumerate(seq):
        if not 0 <= c < cx.n_chambers:
            return SequenceReport(False, "I", k, f"chamber {c} out of range")
    if K < 2:
        return SequenceReport(False, "II", 0, "a single chamber has no face crossing")
    for k in range(K):
        a, b = seq[k], seq[(k + 1) % K]
        if not cx.adjacent(a, b):
            return SequenceReport(False, "II", k, f"chambers {a} and {b} are not mirror images across a face")
        if seq[(k - 1) % K] == b:
            return SequenceReport(False, "II", k, f"backtrack: D_k+1 == D_k-1 == {b}")
    if common_rays(cx, seq):
        return SequenceReport(False, "III", None, "all chambers share a common axis")
    p = minimal_period(seq)
    return SequenceReport(True, period=p, n=n * (K // p), normalized=tuple(normalize_rotation(seq[:p])))


def is_simple(cx: ChamberComplex, seq, n: int = 1) -> bool:
    """False when some run of 2|C|+1 consecutive chambers winds around one axis."""
    seq = [int(s) for s in seq] * n
    L = len(seq)
    ext = seq * 3
    for r in range(len(cx.rays)):
        need = 2 * int(cx.ray_fold[r]) + 1
        at = np.array([r in cx.chamber_rays[c] for c in ext])
        if at[:L].all():
            return False
        run = 0
        for flag in at:
            run = run + 1 if flag else 0
            if run >= need:
                return False
    return True


def complex_to_dict(cx: ChamberComplex) -> dict:
    return {
        "group": cx.group.kind,
        "polyhedron": cx.group.polyhedron,
        "n_chambers": cx.n_chambers,
        "chambers": [
            {"index": k,
             "element": k,
             "proper": bool(k < cx.group.order),
             "triangle": cx.triangle(k).tolist(),
             "center": cx.centers[k].tolist(),
             "neighbors": cx.neighbors[k].tolist()}
            for k in range(cx.n_chambers)
        ],
        "faces": [
            {"index": f.index, "normal": f.normal.tolist(), "chambers": list(f.chambers), "kind": f.kind}
            for f in cx.faces
        ],
    }
