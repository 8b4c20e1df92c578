import numpy as np
import pytest

from platonic_nbody.archimedean import qr_for, sigma_from_nu
from platonic_nbody.catalog import CATALOG, entry_loop, entry_poly
from platonic_nbody.chambers import normalize_rotation
from platonic_nbody.loops import GeneratingLoop, loop_from_nu, loop_from_sigma
from platonic_nbody.topology import (collision_loci, condition_C_check, crossing_count_audit,
                                     crossing_sequence, cyclic_reduce, invariant_report,
                                     loop_invariant, reduce_to_invariant, same_cone)


def _sig(cid):
    e = CATALOG[cid]
    p = entry_poly(e)
    return p, p.complex, sigma_from_nu(p, e.path)[0]


@pytest.mark.parametrize("cid", list(CATALOG))
def test_invariant_round_trip(cid):
    e = CATALOG[cid]
    p, cx, sig = _sig(cid)
    for n in (1, 2, 3):
        loop = loop_from_sigma(cx, sig, n, 1.0, 8 * len(sig) * n)
        assert loop_invariant(cx, loop) == (normalize_rotation(sig), n)
        v = loop_from_nu(p, e.path, n, 1.0, 16 * len(e.path) * n, start=0.25)
        assert loop_invariant(cx, v) == (normalize_rotation(sig), n)
        audit = crossing_count_audit(cx, loop, sig, n)
        assert audit.ok


def test_crossings_match_sigma_transitions():
    p, cx, sig = _sig("O.nu3")
    loop = entry_loop(CATALOG["O.nu3"], m=96)
    assert len(crossing_sequence(cx, loop)) == len(sig)
    assert all(c.transversal for c in crossing_sequence(cx, loop))


def test_loop_inside_one_chamber():
    cx = qr_for("T").complex
    c = cx.centers[4]
    t = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    a = np.cross(c, [1.0, 0, 0])
    a /= np.linalg.norm(a)
    b = np.cross(c, a)
    loop = GeneratingLoop(1.0, c + 0.01 * (np.outer(np.cos(t), a) + np.outer(np.sin(t), b)), cx.group)
    assert crossing_sequence(cx, loop) == []
    with pytest.raises(ValueError):
        loop_invariant(cx, loop)


def test_reversed_loop_reverses_crossings():
    p, cx, sig = _sig("T.nu1")
    loop = loop_from_sigma(cx, sig, 1, 1.0, 8 * len(sig), start=0.3)
    fwd = [(c.source, c.target) for c in crossing_sequence(cx, loop)]
    bwd = [(c.target, c.source) for c in crossing_sequence(cx, loop.reversed())]
    assert sorted(fwd) == sorted(bwd)
    assert normalize_rotation([a for a, _ in fwd]) == normalize_rotation([b for b, _ in bwd[::-1]])


def test_reduction_rules():
    assert cyclic_reduce([1, 2, 1, 3, 4]) == [1, 3, 4]
    assert cyclic_reduce([1, 1, 2, 3]) == [1, 2, 3]
    red = cyclic_reduce([5, 1, 2, 1, 3, 4])
    assert cyclic_reduce(red) == red
    assert reduce_to_invariant([3, 4, 5, 3, 4, 5]) == ([3, 4, 5], 2)
    with pytest.raises(ValueError):
        reduce_to_invariant([1, 2, 1, 2])


def test_same_cone():
    e = CATALOG["T.nu3"]
    p, cx, sig = _sig("T.nu3")
    v1 = loop_from_nu(p, e.path, 1, 1.0, 12 * 16, start=0.25)
    v2 = loop_from_nu(p, e.path, 2, 1.0, 12 * 32, start=0.25)
    u1 = loop_from_sigma(cx, sig, 1, 1.0, 8 * len(sig))
    rng = np.random.default_rng(0)
    t = v1.times[:, None]
    wiggle = v1.with_x(v1.x + 0.002 * np.sin(2 * np.pi * 3 * t) * rng.normal(size=3))
    assert same_cone(cx, v1, wiggle)
    assert not same_cone(cx, v1, v2)
    assert same_cone(cx, v1, u1)


def test_condition_C():
    for cid in CATALOG:
        _, cx, sig = _sig(cid)
        assert condition_C_check(cx, sig), cid
    cx = qr_for("O").complex
    ring = list(cx.chambers_at_ray(0))
    assert not condition_C_check(cx, ring)
    assert not condition_C_check(cx, [0, int(cx.neighbors[0, 0])])


def test_collision_loci():
    _, cx, sig = _sig("T.min1")
    from platonic_nbody.symmetry import axes_of
    ax = axes_of(cx.group)
    for n in (1, 2):
        loci = collision_loci(cx, sig, n)
        assert len(loci) == n * len(sig)
    loci = collision_loci(cx, sig)
    for lc in loci:
        on = [a for a in ax.axes if np.linalg.norm(np.cross(a.direction, lc.direction)) < 1e-9]
        assert len(on) == 1
    for k in range(len(loci)):
        assert loci[k].ray != loci[(k + 1) % len(loci)].ray


def test_wiggle_adds_crossings():
    e = CATALOG["T.nu2"]
    p, cx, sig = _sig("T.nu2")
    loop = loop_from_sigma(cx, sig, 1, 1.0, 64 * len(sig), start=0.25)
    # push a short stretch back and forth across the face it crosses
    cr = crossing_sequence(cx, loop)[0]
    j = int(round(cr.time / loop.h))
    nrm = cx.faces[cr.face].normal
    x = loop.x.copy()
    x[j - 6:j + 6] += 0.05 * np.sin(np.linspace(0, 3 * np.pi, 12))[:, None] * nrm
    audit = crossing_count_audit(cx, loop.with_x(x), sig, 1)
    assert audit.count > len(sig)


def test_invariant_report():
    e = CATALOG["I.nu1"]
    _, cx, sig = _sig("I.nu1")
    rep = invariant_report(cx, entry_loop(e, m=96))
    assert rep["n"] == 1 and rep["K_sigma"] == len(sig)
    assert rep["simple"] and rep["condition_C"]
    assert len(rep["loci"]) == len(sig)
