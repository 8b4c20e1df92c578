"""The Archimedean polyhedron Q_R attached to a rotation group.

The seed vertex q sits on the arc S3 of the fundamental chamber, at equal
distance from the mirrors of S1 and S2.  The orbit {R q} gives |R|
vertices; the orbits of [q, q1] and [q, q2], q_i = R~_i q, give the two
classes of edges (class 1 are sides of the polygons around the e1-type
axes, class 2 of those around the eV-type axes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chambers import (ChamberComplex, SequenceReport, complex_for, minimal_period,
                       normalize_rotation)
from .symmetry import SAME_TOL, RotationGroup, axes_of

EDGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ArchimedeanPolyhedron:
    complex: ChamberComplex
    q: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    vertices: np.ndarray  # canonical order
    edges: tuple[tuple[int, int], ...]  # sorted pairs, canonical order
    edge_class: tuple[int, ...]
    faces: tuple[tuple[str, tuple[int, ...]], ...]  # ("square" | "F1" | "F2", cyclic vertex list)
    edge_length: float
    chamber_vertex: np.ndarray  # vertex index of g q for every chamber g
    edge_index: dict = field(repr=False)

    @property
    def group(self) -> RotationGroup:
        return self.complex.group

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edge_index

    def neighbors(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def vertex_index(self, x, tol: float = 1e-9) -> int:
        d = np.max(np.abs(self.vertices - np.asarray(x)[None]), axis=1)
        k = int(np.argmin(d))
        if d[k] >= tol:
            raise KeyError("point is not a vertex")
        return k


def _seed(cx: ChamberComplex) -> np.ndarray:
    fr = cx.group.frame
    e1, eM, eV = fr.e1, fr.eM, fr.eV
    n1 = np.cross(e1, eM)
    n1 *= np.sign(np.dot(n1, eV))
    n2 = np.cross(eM, eV)
    n2 *= np.sign(np.dot(n2, e1))
    n3 = np.cross(e1, eV)
    if abs(np.dot(n1, n2)) / (np.linalg.norm(n1) * np.linalg.norm(n2)) > 1e-12:
        raise ValueError("mirrors of S1 and S2 are not orthogonal")
    n1 /= np.linalg.norm(n1)
    n2 /= np.linalg.norm(n2)
    q = np.cross(n3, n1 - n2)
    q /= np.linalg.norm(q)
    if np.dot(q, e1) < 0:
        q = -q
    coef = np.linalg.lstsq(np.array([e1, eV]).T, q, rcond=None)[0]
    if coef.min() <= 0:
        raise RuntimeError("seed vertex fell outside the arc S3")
    return q


def seed_vertex(cx: ChamberComplex) -> np.ndarray:
    return _seed(cx)


def seed_vertex_bisection(cx: ChamberComplex, tol: float = 1e-15) -> np.ndarray:
    """Independent search for q along the arc from e1 to eV."""
    fr = cx.group.frame
    R1, R2 = cx.reflections[0], cx.reflections[1]
    ang = np.arccos(np.clip(np.dot(fr.e1, fr.eV), -1, 1))
    w = fr.eV - np.dot(fr.eV, fr.e1) * fr.e1
    w /= np.linalg.norm(w)

    def point(s):
        return np.cos(s) * fr.e1 + np.sin(s) * w

    def f(s):
        p = point(s)
        return np.linalg.norm(p - R1 @ p) - np.linalg.norm(p - R2 @ p)

    lo, hi = 0.0, ang
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return point(0.5 * (lo + hi))


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Indices sorting points by descending xi_1, then xi_2, then xi_3."""
    r = np.round(points, 9) + 0.0
    return np.lexsort((-r[:, 2], -r[:, 1], -r[:, 0]))


def build_qr(group: RotationGroup) -> ArchimedeanPolyhedron:
    return _build_qr(group.kind, group.polyhedron)


def qr_for(kind: str, polyhedron: str | None = None) -> ArchimedeanPolyhedron:
    cx = complex_for(kind, polyhedron)
    return _build_qr(cx.group.kind, cx.group.polyhedron)


@lru_cache(maxsize=None)
def _build_qr(kind: str, polyhedron: str) -> ArchimedeanPolyhedron:
    cx = complex_for(kind, polyhedron)
    q = _seed(cx)
    R1, R2, R3 = cx.reflections
    q1, q2 = R1 @ q, R2 @ q

    raw = cx.elements @ q  # (2N, 3): image of q under every chamber element
    reps: list[np.ndarray] = []
    chamber_vertex = np.empty(len(raw), dtype=int)
    for k, p in enumerate(raw):
        for j, r in enumerate(reps):
            if np.max(np.abs(p - r)) < SAME_TOL:
                chamber_vertex[k] = j
                break
        else:
            chamber_vertex[k] = len(reps)
            reps.append(p)
    reps = np.array(reps)
    order = canonical_order(reps)
    relabel = np.empty(len(order), dtype=int)
    relabel[order] = np.arange(len(order))
    vertices = reps[order]
    chamber_vertex = relabel[chamber_vertex]

    edges: dict[tuple[int, int], int] = {}
    for g in range(cx.n_chambers):
        for i in (0, 1):
            a = int(chamber_vertex[g])
            b = int(chamber_vertex[cx.neighbors[g, i]])
            key = (min(a, b), max(a, b))
            if key in edges and edges[key] != i + 1:
                raise RuntimeError("edge belongs to both orbits")
            edges[key] = i + 1
    keys = sorted(edges)
    edge_class = tuple(edges[k] for k in keys)
    edge_index = {k: j for j, k in enumerate(keys)}
    lengths = np.array([np.linalg.norm(vertices[a] - vertices[b]) for a, b in keys])

    faces = _faces(cx, chamber_vertex)
    return ArchimedeanPolyhedron(
        complex=cx, q=q, q1=q1, q2=q2, vertices=vertices, edges=tuple(keys),
        edge_class=edge_class, faces=faces, edge_length=float(lengths.mean()),
        chamber_vertex=chamber_vertex, edge_index=edge_index,
    )


def _faces(cx: ChamberComplex, chamber_vertex: np.ndarray):
    """Faces as cyclic vertex lists.

    Walking around a ray of the complex alternately across the two faces
    meeting there visits the chambers of one face polygon (rays of e1 type
    give F1, eV type give F2, eM type give squares).
    """
    out = []
    seen = set()
    # around ray type t, the two face kinds containing it
    around = {1: (0, 2), 2: (0, 1), 3: (1, 2)}
    label = {1: "F1", 2: "square", 3: "F2"}
    for r in range(len(cx.rays)):
        t = int(cx.ray_type[r])
        start = int(cx.chambers_at_ray(r)[0])
        i, j = around[t]
        cyc = [start]
        cur, flip = start, 0
        while True:
            cur = int(cx.neighbors[cur, (i, j)[flip]])
            flip ^= 1
            if cur == start:
                break
            cyc.append(cur)
        verts: list[int] = []
        for c in cyc:
            v = int(chamber_vertex[c])
            if not verts or verts[-1] != v:
                verts.append(v)
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts.pop()
        key = frozenset(verts)
        if key in seen:
            continue
        seen.add(key)
        out.append((label[t], tuple(verts)))
    out.sort(key=lambda f: ({"F1": 0, "F2": 1, "square": 2}[f[0]], sorted(f[1])))
    return tuple(out)


def edge_orbit_class(poly: ArchimedeanPolyhedron, edge) -> int:
    a, b = int(edge[0]), int(edge[1])
    key = (min(a, b), max(a, b))
    if key not in poly.edge_index:
        raise KeyError(f"({a}, {b}) is not an edge")
    return poly.edge_class[poly.edge_index[key]]


def edge_class_geometric(poly: ArchimedeanPolyhedron, edge) -> int:
    """Orbit class from the face the edge borders (F1 -> 1, F2 -> 2)."""
    s = {int(edge[0]), int(edge[1])}
    for kind, verts in poly.faces:
        if kind == "square":
            continue
        n = len(verts)
        sides = [{verts[k], verts[(k + 1) % n]} for k in range(n)]
        if s in sides:
            return 1 if kind == "F1" else 2
    raise KeyError("edge borders no polygon face")


def vertex_configuration(poly: ArchimedeanPolyhedron, v: int) -> str:
    """Cyclic sequence of face sizes around vertex v, e.g. '3434'."""
    incident = [f for f in poly.faces if v in f[1]]
    x = poly.vertices[v]
    ref = None
    angs = []
    for _, verts in incident:
        c = poly.vertices[list(verts)].mean(axis=0)
        d = c - np.dot(c, x) * x
        if ref is None:
            ref = d / np.linalg.norm(d)
        other = np.cross(x, ref)
        angs.append(np.arctan2(np.dot(d, other), np.dot(d, ref)))
    sizes = [len(incident[k][1]) for k in np.argsort(angs)]
    cands = []
    for s in (sizes, sizes[::-1]):
        cands += [s[i:] + s[:i] for i in range(len(s))]
    return "".join(str(k) for k in min(cands))


def min_distance_to_gamma(poly: ArchimedeanPolyhedron) -> float:
    """Min distance between the edge skeleton L_R and the axis set."""
    dirs = axes_of(poly.group).gamma
    best = np.inf
    for a, b in poly.edges:
        best = min(best, segment_line_distance(poly.vertices[a], poly.vertices[b], dirs).min())
    return float(best)


def segment_line_distance(p0, p1, dirs) -> np.ndarray:
    """Distance of segment [p0, p1] to each line through O along dirs."""
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    out = []
    for u in np.atleast_2d(dirs):
        a = p0 - np.dot(p0, u) * u
        b = d - np.dot(d, u) * u
        bb = np.dot(b, b)
        s = 0.0 if bb == 0 else np.clip(-np.dot(a, b) / bb, 0, 1)
        out.append(np.linalg.norm(a + s * b))
    return np.array(out)


# --- nu sequences ------------------------------------------------------------


@dataclass(frozen=True)
class NuSequence:
    vertices: tuple[int, ...]
    n: int = 1

    @property
    def period(self) -> int:
        return len(self.vertices)


def validate_nu(poly: ArchimedeanPolyhedron, nu, n: int = 1) -> SequenceReport:
    """Conditions [i] (edge path) and [ii] (not inside one face)."""
    nu = [int(v) for v in nu]
    if not nu:
        return SequenceReport(False, "i", None, "empty sequence")
    if n < 1:
        return SequenceReport(False, "i", None, "multiplicity must be >= 1")
    K = len(nu)
    for k, v in enumerate(nu):
        if not 0 <= v < poly.n_vertices:
            return SequenceReport(False, "i", k, f"vertex {v} out of range")
    for k in range(K):
        a, b = nu[k], nu[(k + 1) % K]
        if not poly.has_edge(a, b):
            return SequenceReport(False, "i", k, f"[{a}, {b}] is not an edge")
    for k in range(K):
        if nu[(k - 1) % K] == nu[(k + 1) % K]:
            return SequenceReport(False, "i", k, f"path backtracks at vertex {nu[k]}")
    s = set(nu)
    for kind, verts in poly.faces:
        if s <= set(verts):
            return SequenceReport(False, "ii", None, f"sequence lies in the closure of a {kind} face")
    p = minimal_period(nu)
    return SequenceReport(True, period=p, n=n * (K // p), normalized=tuple(normalize_rotation(nu[:p])))


def nu_from_sigma(poly: ArchimedeanPolyhedron, sigma, n: int = 1) -> tuple[list[int], int]:
    """Map chambers to vertices g -> g q, dropping repeats from S3 crossings."""
    vs = [int(poly.chamber_vertex[c]) for c in sigma]
    out: list[int] = []
    for v in vs:
        if not out or out[-1] != v:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out, n


def chamber_pair(poly: ArchimedeanPolyhedron, a: int, b: int) -> tuple[int, int]:
    """The unique chambers (g, g R~_i) with g q = a and g R~_i q = b."""
    cx = poly.complex
    cls = edge_orbit_class(poly, (a, b))
    for g in np.nonzero(poly.chamber_vertex == a)[0]:
        h = int(cx.neighbors[g, cls - 1])
        if poly.chamber_vertex[h] == b:
            return int(g), h
    raise RuntimeError("no chamber pair for edge")


def sigma_from_nu(poly: ArchimedeanPolyhedron, nu, n: int = 1) -> tuple[list[int], int]:
    nu = [int(v) for v in nu]
    K = len(nu)
    pairs = [chamber_pair(poly, nu[k], nu[(k + 1) % K]) for k in range(K)]
    out: list[int] = []
    for k, (a, b) in enumerate(pairs):
        prev_b = pairs[k - 1][1]
        if prev_b != a:
            out.append(a)
        out.append(b)
    # the cyclic join was handled by pairs[-1]; drop a leading duplicate
    return out, n


def edge_counts(poly: ArchimedeanPolyhedron, nu, n: int = 1) -> tuple[int, int]:
    """(N1, N2): number of class-1 and class-2 edges in n turns of nu."""
    nu = list(nu)
    K = len(nu)
    c = [edge_orbit_class(poly, (nu[k], nu[(k + 1) % K])) for k in range(K)]
    return n * c.count(1), n * c.count(2)


def qr_to_dict(poly: ArchimedeanPolyhedron) -> dict:
    return {
        "group": poly.group.kind,
        "polyhedron": poly.group.polyhedron,
        "q": poly.q.tolist(),
        "q1": poly.q1.tolist(),
        "q2": poly.q2.tolist(),
        "edge_length": poly.edge_length,
        "vertices": poly.vertices.tolist(),
        "edges": [{"vertices": list(e), "orbit": c} for e, c in zip(poly.edges, poly.edge_class)],
        "faces": [{"kind": k, "vertices": list(v)} for k, v in poly.faces],
        "vertex_configuration": vertex_configuration(poly, 0),
    }
