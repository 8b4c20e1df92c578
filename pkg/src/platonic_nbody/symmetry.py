"""Rotation groups of the Platonic solids and their reference frames.

Every group is expressed in the frame attached to a flag (F, L, V) of a
Platonic solid P: xi_1 points from the center to the center of the face F,
the midpoint M of the side L lies in the half-plane {xi_3 = 0, xi_2 > 0}
and the vertex V of L lies in the half-space xi_3 > 0.  The full symmetry
group acts simply transitively on flags, so the coordinates produced here
do not depend on which flag is picked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.spatial import ConvexHull

SAME_TOL = 1e-9
AXIOM_TOL = 1e-12

POLYHEDRA = ("tetrahedron", "cube", "octahedron", "dodecahedron", "icosahedron")
POLY_LETTER = {"T": "tetrahedron", "C": "cube", "O": "octahedron",
               "D": "dodecahedron", "I": "icosahedron"}
GROUP_OF = {"tetrahedron": "T", "cube": "O", "octahedron": "O",
            "dodecahedron": "I", "icosahedron": "I"}
DEFAULT_POLYHEDRON = {"T": "tetrahedron", "O": "cube", "I": "dodecahedron"}
GROUP_ORDER = {"T": 12, "O": 24, "I": 60}


def polyhedron_name(p: str) -> str:
    """Accept either a full name or the one-letter code (T, C, O, D, I)."""
    if p in POLYHEDRA:
        return p
    try:
        return POLY_LETTER[p]
    except KeyError:
        raise ValueError(f"unknown polyhedron {p!r}") from None


def _raw_vertices(name: str) -> np.ndarray:
    phi = (1 + np.sqrt(5)) / 2
    if name == "tetrahedron":
        v = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "cube":
        v = list(product((-1, 1), repeat=3))
    elif name == "octahedron":
        v = [s * e for e in np.eye(3) for s in (1, -1)]
    elif name == "dodecahedron":
        v = list(product((-1, 1), repeat=3))
        for a, b in product((-1, 1), repeat=2):
            v += [(0, a / phi, b * phi), (a / phi, b * phi, 0), (b * phi, 0, a / phi)]
    elif name == "icosahedron":
        v = []
        for a, b in product((-1, 1), repeat=2):
            # dual to the dodecahedron above (same symmetry group)
            v += [(0, a * phi, b), (a * phi, b, 0), (b, 0, a * phi)]
    else:
        raise ValueError(name)
    return np.asarray(v, dtype=float)


def _faces(verts: np.ndarray) -> list[list[int]]:
    """Faces of a convex polyhedron as cyclically ordered vertex lists."""
    hull = ConvexHull(verts)
    groups: dict[tuple, set[int]] = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 8))
        groups.setdefault(key, set()).update(int(i) for i in simplex)
    faces = []
    for idx in groups.values():
        idx = sorted(idx)
        c = verts[idx].mean(axis=0)
        n = c / np.linalg.norm(c)
        a = verts[idx[0]] - c
        b = np.cross(n, a)
        ang = [np.arctan2(np.dot(verts[i] - c, b), np.dot(verts[i] - c, a)) for i in idx]
        faces.append([idx[k] for k in np.argsort(ang)])
    return faces


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about ``axis`` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def reflection_matrix(normal) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - 2 * np.outer(n, n)


def canonical_direction(d) -> np.ndarray:
    """Pick the lexicographically largest of +-d (rounded to tolerance)."""
    d = np.asarray(d, dtype=float)
    d = d / np.linalg.norm(d)
    for x in d:
        if abs(x) > SAME_TOL:
            return d if x > 0 else -d
    return d


def _polar(m: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def same_matrix(a: np.ndarray, b: np.ndarray, tol: float = SAME_TOL) -> bool:
    return float(np.max(np.abs(a - b))) < tol


@dataclass(frozen=True, eq=False)
class Rotation3:
    matrix: np.ndarray
    axis: np.ndarray | None
    angle: float

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Rotation3":
        m = np.asarray(m, dtype=float)
        if same_matrix(m, np.eye(3)):
            return cls(np.eye(3), None, 0.0)
        w, v = np.linalg.eig(m)
        k = int(np.argmin(np.abs(w - 1)))
        axis = canonical_direction(np.real(v[:, k]))
        c = np.clip((np.trace(m) - 1) / 2, -1, 1)
        s = 0.5 * np.dot(axis, [m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
        angle = float(np.arctan2(s, c)) % (2 * np.pi)
        return cls(m, axis, angle)

    @property
    def is_identity(self) -> bool:
        return self.axis is None


@dataclass(frozen=True, eq=False)
class Axis:
    direction: np.ndarray
    fold: int
    elements: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class AxisSet:
    axes: tuple[Axis, ...]

    @property
    def gamma(self) -> np.ndarray:
        """Directions of all axis lines (one per line), shape (n, 3)."""
        return np.array([a.direction for a in self.axes])

    @property
    def folds(self) -> np.ndarray:
        return np.array([a.fold for a in self.axes])

    def census(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a in self.axes:
            out[a.fold] = out.get(a.fold, 0) + 1
        return dict(sorted(out.items(), reverse=True))

    def distance(self, x) -> np.ndarray:
        """Distance of point(s) ``x`` from Gamma (min over axis lines)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        proj = x @ self.gamma.T
        d2 = np.sum(x * x, axis=1)[:, None] - proj**2
        return np.sqrt(np.clip(d2, 0, None)).min(axis=1)

    def loop_distance(self, x) -> float:
        """Distance of the closed polyline through the rows of x from Gamma."""
        x = np.asarray(x, dtype=float)
        d = np.roll(x, -1, axis=0) - x
        G = self.gamma
        a = x[:, None, :] - (x @ G.T)[:, :, None] * G[None]
        b = d[:, None, :] - (d @ G.T)[:, :, None] * G[None]
        bb = np.sum(b * b, axis=2)
        s = np.clip(-np.sum(a * b, axis=2) / np.where(bb > 0, bb, 1.0), 0.0, 1.0)
        return float(np.linalg.norm(a + s[:, :, None] * b, axis=2).min())


@dataclass(frozen=True, eq=False)
class ReferenceFrame:
    polyhedron: str
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    eM: np.ndarray
    eV: np.ndarray
    eAlpha: np.ndarray
    eBeta: np.ndarray
    phiM: float
    phiV: float
    psiAlpha: float
    psiBeta: float
    H: int
    K: int
    basis: np.ndarray = field(repr=False)
    """Rows e1, e2, e3 in the solid's original coordinates."""
    vertices: np.ndarray = field(repr=False)
    """Vertices of P (unit circumradius) in frame coordinates."""


@dataclass(frozen=True, eq=False)
class RotationGroup:
    kind: str
    polyhedron: str
    elements: tuple[Rotation3, ...]
    frame: ReferenceFrame | None = None

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def matrices(self) -> np.ndarray:
        return np.array([g.matrix for g in self.elements])

    def index_of(self, m: np.ndarray) -> int:
        d = np.max(np.abs(self.matrices - m[None]), axis=(1, 2))
        k = int(np.argmin(d))
        if d[k] >= SAME_TOL:
            raise KeyError("matrix is not an element of the group")
        return k

    def multiplication_table(self) -> np.ndarray:
        return _mult_table(self)

    def nontrivial(self) -> np.ndarray:
        """Matrices of R != I, shape (N-1, 3, 3)."""
        return self.matrices[1:]

    def axes(self) -> AxisSet:
        return axes_of(self)


def _mult_table(group: RotationGroup) -> np.ndarray:
    cached = getattr(group, "_table", None)
    if cached is not None:
        return cached
    mats = group.matrices
    n = len(mats)
    table = np.empty((n, n), dtype=int)
    flat = mats.reshape(n, 9)
    for i in range(n):
        prod_ = np.einsum("ij,njk->nik", mats[i], mats).reshape(n, 9)
        d = np.max(np.abs(prod_[:, None, :] - flat[None, :, :]), axis=2)
        table[i] = np.argmin(d, axis=1)
        if np.any(d[np.arange(n), table[i]] > SAME_TOL):
            raise ValueError("set of matrices is not closed under composition")
    object.__setattr__(group, "_table", table)
    return table


def reference_frame(p: str) -> ReferenceFrame:
    return _reference_frame(polyhedron_name(p))


@lru_cache(maxsize=None)
def _reference_frame(name: str) -> ReferenceFrame:
    raw = _raw_vertices(name)
    raw = raw / np.linalg.norm(raw[0])
    faces = _faces(raw)
    face = min(faces, key=lambda f: tuple(np.round(-raw[f].mean(axis=0), 9)))
    c = raw[face].mean(axis=0)
    e1 = c / np.linalg.norm(c)
    a, b = face[0], face[1]
    m = (raw[a] + raw[b]) / 2
    e2 = m - np.dot(m, e1) * e1
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    basis = np.array([e1, e2, e3])
    verts = raw @ basis.T
    M = (verts[a] + verts[b]) / 2
    V = verts[a] if verts[a][2] > 0 else verts[b]
    eM = M / np.linalg.norm(M)
    eV = V / np.linalg.norm(V)
    H = len(face)
    K = len(faces)
    x1 = np.array([1.0, 0.0, 0.0])
    # candidate axis directions live in the frame-coordinate axis set
    dirs = _axis_directions(verts, faces)
    eAlpha, psiA = _closest_beyond(x1, eM, dirs)
    eBeta, psiB = _closest_beyond(x1, eV, dirs)
    return ReferenceFrame(
        polyhedron=name, e1=x1, e2=np.array([0.0, 1.0, 0.0]), e3=np.array([0.0, 0.0, 1.0]),
        eM=eM, eV=eV, eAlpha=eAlpha, eBeta=eBeta,
        phiM=float(np.arccos(np.clip(eM[0], -1, 1))),
        phiV=float(np.arccos(np.clip(eV[0], -1, 1))),
        psiAlpha=psiA, psiBeta=psiB, H=H, K=K, basis=basis, vertices=verts,
    )


def _axis_directions(verts: np.ndarray, faces) -> list[tuple[np.ndarray, int]]:
    """Rotation axes of P with their folds, derived from faces/vertices/edges."""
    out: list[tuple[np.ndarray, int]] = []
    for f in faces:
        c = verts[f].mean(axis=0)
        out.append((c / np.linalg.norm(c), len(f)))
    degree: dict[int, int] = {}
    edges = set()
    for f in faces:
        for i in range(len(f)):
            e = tuple(sorted((f[i], f[(i + 1) % len(f)])))
            edges.add(e)
    for a, b in edges:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
        mid = verts[a] + verts[b]
        out.append((mid / np.linalg.norm(mid), 2))
    for i, v in enumerate(verts):
        out.append((v / np.linalg.norm(v), degree[i]))
    return out


def _closest_beyond(e1, target, dirs) -> tuple[np.ndarray, float]:
    """Axis direction d in plane(e1, target), d not on the lines of e1 or
    target, with target strictly inside the angle (e1, d) and minimal angle."""
    n = np.cross(e1, target)
    n /= np.linalg.norm(n)
    best, best_ang = None, np.inf
    for d, _ in dirs:
        for s in (1.0, -1.0):
            d_ = s * d
            if abs(np.dot(d_, n)) > 1e-9:
                continue
            if np.linalg.norm(np.cross(d_, e1)) < 1e-9 or np.linalg.norm(np.cross(d_, target)) < 1e-9:
                continue
            # target = a e1 + b d with a, b > 0
            A = np.array([e1, d_]).T
            coef, *_ = np.linalg.lstsq(A, target, rcond=None)
            if coef[0] <= 1e-12 or coef[1] <= 1e-12:
                continue
            ang = float(np.arccos(np.clip(np.dot(e1, d_), -1, 1)))
            if ang < best_ang - 1e-12:
                best, best_ang = d_, ang
    if best is None:
        raise ValueError("no auxiliary axis found")
    return best, best_ang


def build_rotation_group(kind: str, polyhedron: str | None = None) -> RotationGroup:
    """Full rotation group T, O or I in the frame of ``polyhedron``.

    The default solid is the tetrahedron, cube and dodecahedron respectively.
    """
    if kind not in GROUP_ORDER:
        raise ValueError(f"group kind must be one of T, O, I (got {kind!r})")
    name = polyhedron_name(polyhedron) if polyhedron else DEFAULT_POLYHEDRON[kind]
    if GROUP_OF[name] != kind:
        raise ValueError(f"{name} does not have rotation group {kind}")
    return _build_group(kind, name)


def group_for_polyhedron(p: str) -> RotationGroup:
    name = polyhedron_name(p)
    return _build_group(GROUP_OF[name], name)


@lru_cache(maxsize=None)
def _build_group(kind: str, name: str) -> RotationGroup:
    frame = _reference_frame(name)
    dirs = _axis_directions(frame.vertices, _faces(frame.vertices))
    mats = [np.eye(3)]
    for d, k in dirs:
        for j in range(1, k):
            m = _polar(rotation_matrix(d, 2 * np.pi * j / k))
            if not any(same_matrix(m, x) for x in mats):
                mats.append(m)
    if len(mats) != GROUP_ORDER[kind]:
        raise RuntimeError(f"built {len(mats)} rotations for {kind}")
    elements = tuple(Rotation3.from_matrix(m) for m in mats)
    return RotationGroup(kind=kind, polyhedron=name, elements=elements, frame=frame)


@lru_cache(maxsize=None)
def klein_four() -> RotationGroup:
    """The group {I, R1, R2, R3} of half-turns about the coordinate axes
    (the symmetry of the four-body cone)."""
    mats = [np.eye(3)] + [np.diag(d) for d in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1))]
    return RotationGroup(kind="D2", polyhedron="none",
                         elements=tuple(Rotation3.from_matrix(m) for m in mats))


def axes_of(group: RotationGroup) -> AxisSet:
    cached = getattr(group, "_axes", None)
    if cached is not None:
        return cached
    buckets: list[tuple[np.ndarray, list[int]]] = []
    for i, g in enumerate(group.elements):
        if g.is_identity:
            continue
        for d, members in buckets:
            if np.max(np.abs(d - g.axis)) < SAME_TOL:
                members.append(i)
                break
        else:
            buckets.append((g.axis, [i]))
    axes = tuple(Axis(direction=d, fold=len(mem) + 1, elements=tuple(mem))
                 for d, mem in sorted(buckets, key=lambda b: (-len(b[1]), tuple(-b[0]))))
    out = AxisSet(axes=axes)
    object.__setattr__(group, "_axes", out)
    return out


def conjugate_across_face(R: Rotation3 | np.ndarray, face_reflection: np.ndarray) -> Rotation3:
    """R^S = R_S R R_S, the rotation with R_S R x = R^S R_S x."""
    m = R.matrix if isinstance(R, Rotation3) else np.asarray(R, dtype=float)
    if same_matrix(m, np.eye(3)):
        raise ValueError("the conjugation map is defined on R \\ {I} only")
    S = np.asarray(face_reflection, dtype=float)
    return Rotation3.from_matrix(S @ m @ S)


def potential_sum(group: RotationGroup, x, alpha: float = 1.0) -> np.ndarray:
    """sum_{R != I} |(R - I) x|^(-alpha) for point(s) x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    diff = np.einsum("rij,nj->nri", group.nontrivial(), x) - x[:, None, :]
    return np.sum(np.linalg.norm(diff, axis=2) ** (-alpha), axis=1)


def group_info(group: RotationGroup) -> dict:
    ax = axes_of(group)
    return {
        "kind": group.kind,
        "polyhedron": group.polyhedron,
        "order": group.order,
        "axes": {str(k): v for k, v in ax.census().items()},
        "n_axes": len(ax.axes),
        "elements": [
            {"matrix": np.round(g.matrix, 15).tolist(),
             "axis": None if g.axis is None else g.axis.tolist(),
             "angle": g.angle}
            for g in group.elements
        ],
    }
