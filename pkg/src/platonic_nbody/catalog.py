"""Built-in cone catalog.

Every entry is a closed edge path on Q_R in canonical 0-based numbering,
in the frame of the polyhedron it belongs to.  The ``nu`` entries carry a
time-reversal/rotation symmetry (reflection R~_Pi, order M, rotation R);
the ``min`` entries are the minimal paths of the cones K^P_i and carry the
start offset and orientation that put the test loop inside the cone.

Paths were reconstructed by matching edge-orbit counts (N1, N2), period
and the symmetry order M; the recorded values are the printed reference
cells used by ``tables --check``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

POLY_OF_LETTER = {"T": "tetrahedron", "C": "cube", "O": "octahedron",
                  "D": "dodecahedron", "I": "icosahedron"}
KIND_OF_LETTER = {"T": "T", "C": "O", "O": "O", "D": "I", "I": "I"}
DEFAULT_POLY = {"T": "tetrahedron", "O": "cube", "I": "dodecahedron"}


@dataclass(frozen=True)
class CatalogEntry:
    cid: str
    kind: str  # rotation group T, O, I
    polyhedron: str
    path: tuple[int, ...]
    counts: tuple[int, int]  # (N1, N2)
    printed: float  # reference A(v)/T^(1/3)
    start: float = 0.0  # in edge units
    M: int | None = None
    rot: int | None = None  # index into the rotation group
    refl: int | None = None  # index into the chamber-complex elements
    index: int | None = None  # i of K^P_i
    orientation: int = 1
    notes: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.path)

    @property
    def is_min(self) -> bool:
        return self.index is not None


def _nu(cid, path, counts, printed, M, rot, refl, st):
    kind = cid[0]
    return CatalogEntry(cid, kind, DEFAULT_POLY[kind], tuple(path), counts, printed,
                        st / 2, M, rot, refl)


def _min(cid, path, counts, printed, st, orientation=1):
    letter = cid[0]
    return CatalogEntry(cid, KIND_OF_LETTER[letter], POLY_OF_LETTER[letter], tuple(path),
                        counts, printed, st / 2, index=int(cid[-1]), orientation=orientation)


_ENTRIES = [
    _nu("T.nu1", [0, 1, 6, 4, 3, 5], (2, 4), 168.0445, 2, 11, 12, 1),
    _nu("T.nu2", [0, 1, 6, 11, 10, 5], (3, 3), 168.0445, 3, 3, 12, 1),
    _nu("T.nu3", [3, 0, 1, 4, 9, 10, 5, 3, 4, 6, 11, 9], (6, 6), 266.7542, 3, 4, 12, 3),
    _nu("O.nu1", [0, 4, 12, 14, 20, 22, 18, 10, 8, 2], (4, 6), 647.2635, 2, 2, 34, 6),
    _nu("O.nu2", [6, 0, 2, 8, 16, 22, 20, 14], (4, 4), 553.1632, 2, 2, 29, 7),
    _nu("O.nu3", [6, 14, 20, 12, 4, 0], (2, 4), 462.9895, 2, 11, 29, 1),
    _nu("O.nu4", [6, 4, 0, 6, 8, 16, 18, 22, 16, 14], (4, 6), 647.2635, 2, 2, 34, 8),
    _nu("O.nu5", [6, 0, 2, 10, 18, 16, 8, 2, 3, 11, 10, 8], (6, 6), 724.8489, 3, 19, 30, 1),
    _nu("O.nu6", [12, 4, 5, 1, 0, 2, 3, 11, 10, 18, 19, 23, 22, 20, 21, 13], (12, 4),
        859.5748, 4, 3, 29, 1),
    _nu("I.nu1", [0, 5, 15, 30, 17, 7], (2, 4), 1556.2362, 2, 27, 80, 0),
    _nu("I.nu2", [0, 5, 15, 17, 7, 0, 1, 6, 5, 7, 9, 2], (6, 6), 2463.1128, 3, 59, 80, 5),
    _nu("I.nu3", [6, 5, 15, 17, 7, 9, 19, 21, 11, 13, 23, 24, 14, 12, 22, 20, 10, 8, 18, 16],
        (15, 5), 3447.1168, 5, 20, 60, 1),
    _min("T.min1", [2, 8, 6, 1, 4, 3, 0, 5, 7], (3, 6), 220.2007, 9),
    _min("T.min2", [7, 8, 6, 4, 3, 5], (3, 3), 168.0446, 7),
    _min("T.min3", [7, 8, 2, 1, 6, 4, 1, 0, 3, 5, 0, 2], (3, 9), 266.7542, 13),
    _min("C.min1", [4, 0, 6, 8, 2, 10, 11, 3, 9, 7, 1, 5], (4, 8), 734.9502, 23),
    _min("C.min2", [4, 6, 8, 10, 11, 9, 7, 5], (4, 4), 553.1633, 15),
    _min("C.min3", [0, 4, 6, 0, 2, 8, 10, 2, 3, 11, 9, 3, 1, 7, 5, 1], (4, 12), 896.4157, 31),
    _min("O.min1", [4, 3, 0, 5, 7, 2, 8, 6, 1], (3, 6), 589.9526, 1),
    _min("O.min2", [10, 4, 3, 9, 5, 7, 11, 8, 6], (3, 6), 589.9526, 3),
    _min("O.min3", [6, 10, 4, 1, 0, 3, 9, 5, 0, 2, 7, 11, 8, 2, 1], (3, 12), 819.8050, 7),
    _min("D.min1", [4, 14, 12, 3, 10, 8, 1, 6, 5, 0, 7, 9, 2, 11, 13], (5, 10), 2866.6116, 15),
    _min("D.min2", [14, 12, 10, 8, 6, 5, 7, 9, 11, 13], (5, 5), 2181.2066, 9),
    _min("D.min3", [14, 4, 3, 12, 10, 3, 1, 8, 6, 1, 0, 5, 7, 0, 2, 9, 11, 2, 4, 13], (5, 15),
         3477.7486, 19),
    _min("I.min1", [1, 4, 3, 0, 5, 7, 2, 8, 6], (3, 6), 2027.2544, 3),
    _min("I.min2", [4, 3, 10, 12, 5, 7, 16, 17, 8, 6, 13, 11], (3, 9), 2452.2053, 1),
    _min("I.min3", [4, 1, 0, 3, 10, 12, 5, 0, 2, 7, 16, 17, 8, 2, 1, 6, 13, 11], (3, 15),
         3208.5266, 3),
]

CATALOG: dict[str, CatalogEntry] = {e.cid: e for e in _ENTRIES}


def catalog_ids() -> list[str]:
    return list(CATALOG)


def get_entry(cid: str) -> CatalogEntry:
    try:
        return CATALOG[cid]
    except KeyError:
        raise KeyError(f"unknown cone id {cid!r}; known ids: {', '.join(CATALOG)}") from None


def entry_poly(entry: CatalogEntry):
    from .archimedean import qr_for
    return qr_for(entry.kind, entry.polyhedron)


def entry_constraint(entry: CatalogEntry):
    """The symmetry constraint attached to a catalog cone."""
    from .loops import abc_constraint, tilde_constraint
    poly = entry_poly(entry)
    if entry.is_min:
        return abc_constraint(poly.group.frame, entry.orientation)
    R = poly.group.matrices[entry.rot]
    Q = poly.complex.elements[entry.refl]
    # the reflection is anchored at t = 0; the loop starts at the reflection point
    return tilde_constraint(Q, entry.M, R)


def entry_grid(entry: CatalogEntry, m: int) -> int:
    """Smallest multiple of the grid quantum that is >= m.

    The quantum puts every vertex and edge midpoint on the grid and makes
    all symmetry shifts integral.
    """
    q = 2 * entry.K
    if entry.is_min:
        H = entry_poly(entry).group.frame.H
        q = int(np.lcm(q, 2 * H))
    else:
        q = int(np.lcm(q, 2 * entry.M))
    return int(-(-m // q) * q)


def entry_loop(entry: CatalogEntry, n: int = 1, T: float = 1.0, m: int = 128):
    """v^(nu, n) for the entry, started so that the attached symmetry holds."""
    from .loops import loop_from_nu
    poly = entry_poly(entry)
    loop = loop_from_nu(poly, entry.path, n, T, entry_grid(entry, m) if n == 1 else m,
                        start=entry.start)
    loop.meta["cid"] = entry.cid
    return loop


def entry_descriptor(entry: CatalogEntry, n: int = 1):
    from .archimedean import sigma_from_nu
    from .loops import ConeDescriptor
    poly = entry_poly(entry)
    sigma = tuple(sigma_from_nu(poly, entry.path, 1)[0])
    return ConeDescriptor("KPi" if entry.is_min else "Knu", poly.group, sigma,
                          entry.path, n, entry_constraint(entry) if n == 1 else None,
                          entry.polyhedron, entry.index, entry.cid)


def entry_summary(entry: CatalogEntry) -> dict:
    d = {"id": entry.cid, "group": entry.kind, "polyhedron": entry.polyhedron,
         "path": list(entry.path), "K": entry.K, "N1": entry.counts[0],
         "N2": entry.counts[1], "printed": entry.printed, "start": entry.start}
    if entry.is_min:
        d.update(i=entry.index, orientation=entry.orientation)
    else:
        d.update(M=entry.M)
    return d
