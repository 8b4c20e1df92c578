import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from platonic_nbody.action import action
from platonic_nbody.archimedean import qr_for, sigma_from_nu
from platonic_nbody.chambers import locate_many
from platonic_nbody.catalog import CATALOG, entry_constraint, entry_descriptor, entry_loop
from platonic_nbody.loops import (ConeDescriptor, GeneratingLoop, abc_constraint,
                                  cone_membership_report, expand_orbit, group_from_name,
                                  k4_constraint, k4_optimal_rho, k4_test_loop, loop_from_nu,
                                  loop_from_sigma, project, symmetrize, symmetry_residual)
from platonic_nbody.symmetry import build_rotation_group, klein_four
from platonic_nbody.topology import loop_invariant


def random_loop(group, m, seed):
    rng = np.random.default_rng(seed)
    return GeneratingLoop(1.0, rng.normal(size=(m, 3)), group)


def test_grid_and_validation():
    g = build_rotation_group("T")
    loop = random_loop(g, 32, 0)
    assert loop.h == pytest.approx(1 / 32)
    assert np.allclose(np.diff(loop.times), loop.h)
    with pytest.raises(ValueError):
        GeneratingLoop(1.0, np.zeros((8, 3)), g)
    with pytest.raises(ValueError):
        GeneratingLoop(-1.0, np.zeros((32, 3)), g)
    assert np.allclose(loop.at(loop.T + loop.times[3]), loop.x[3])  # periodic


@pytest.mark.parametrize("cid", ["T.nu1", "O.nu6", "I.nu3"])
def test_loop_from_nu_speed_and_length(cid):
    e = CATALOG[cid]
    p = qr_for(e.kind, e.polyhedron)
    K = len(e.path)
    for n in (1, 2):
        loop = loop_from_nu(p, e.path, n, 2.0, 8 * K * n, start=0.0)
        assert loop.length() == pytest.approx(n * K * p.edge_length, rel=1e-12)
        assert np.allclose(loop.speeds(), n * K * p.edge_length / 2.0, rtol=1e-12)
        assert loop.min_gamma_distance() > 0
    one = loop_from_nu(p, e.path, 1, 1.0, 8 * K)
    two = loop_from_nu(p, e.path, 2, 1.0, 16 * K)
    assert np.allclose(np.unique(np.round(one.x, 10), axis=0), np.unique(np.round(two.x, 10), axis=0))


def test_loop_from_sigma_visits_centers():
    e = CATALOG["T.nu2"]
    p = qr_for("T")
    cx = p.complex
    sig, _ = sigma_from_nu(p, e.path)
    loop = loop_from_sigma(cx, sig, 1, 1.0, 4 * len(sig))
    assert np.allclose(loop.x[0], cx.centers[sig[0]])
    seen = [int(c) for c in locate_many(cx, loop.at(loop.times + 0.5 * loop.h))]
    order = [c for k, c in enumerate(seen) if c != seen[k - 1]]
    assert sorted_rot(order) == sorted_rot(sig)
    assert loop.min_gamma_distance() > 0
    assert loop_invariant(cx, loop) == (sorted_rot(sig), 1)


def sorted_rot(seq):
    from platonic_nbody.chambers import normalize_rotation
    return normalize_rotation(seq)


@pytest.mark.parametrize("kind,N", [("T", 12), ("O", 24), ("I", 60)])
def test_expand_orbit(kind, N):
    g = build_rotation_group(kind)
    loop = random_loop(g, 16, 1)
    u = expand_orbit(loop)
    assert u.shape == (N, 16, 3)
    assert np.abs(u.sum(axis=0)).max() < 1e-10
    M = g.matrices
    for i, j in [(0, 5), (3, 7)]:
        d = np.linalg.norm(u[i] - u[j], axis=1)
        alt = np.linalg.norm(loop.x @ (M[i].T @ M[j] - np.eye(3)).T, axis=1)
        assert np.allclose(d, alt, atol=1e-12)


@pytest.mark.parametrize("cid", list(CATALOG))
def test_catalog_test_loops_are_symmetric(cid):
    e = CATALOG[cid]
    loop = entry_loop(e, m=128)
    c = entry_constraint(e)
    assert symmetry_residual(loop, c) < 1e-12
    rep = cone_membership_report(loop, entry_descriptor(e))
    assert rep.member, rep.checks


@given(st.integers(0, 10**6))
def test_projection_is_idempotent_and_lowers_action(seed):
    e = CATALOG["O.min2"]
    c = entry_constraint(e)
    g = build_rotation_group("O")
    m = 48
    base = entry_loop(e, m=m)
    rng = np.random.default_rng(seed)
    loop = base.with_x(base.x + 0.02 * rng.normal(size=base.x.shape))
    once = symmetrize(loop, c)
    assert np.allclose(project(once.x, c), once.x, atol=1e-13)
    assert action(once).total <= action(loop).total + 1e-9


def test_constraint_group_is_finite():
    fr = build_rotation_group("O").frame
    c = abc_constraint(fr)
    els = c.elements(48)
    assert len(els) == 2 * fr.H
    with pytest.raises(ValueError):
        c.elements(50)


def test_k4_loop():
    for T in (1.0, 3.0):
        rho = k4_optimal_rho(T)
        loop = k4_test_loop(rho, T, 256)
        assert symmetry_residual(loop, k4_constraint()) < 1e-12
        u = expand_orbit(loop)
        for i in range(4):
            for j in range(i + 1, 4):
                assert np.linalg.norm(u[i] - u[j], axis=1).min() >= 2 * rho - 1e-12
        assert action(loop).total < 18 * 3 ** (-1 / 3) * np.pi ** (2 / 3) * T ** (1 / 3)
        rep = cone_membership_report(loop, ConeDescriptor("K4", klein_four(), symmetry=k4_constraint()))
        assert rep.member, rep.checks
    with pytest.raises(ValueError):
        k4_test_loop(0.0)


def test_membership_flags_boundary():
    e = CATALOG["T.nu1"]
    loop = entry_loop(e, m=48)
    ax = build_rotation_group("T").elements[1].axis
    bad = loop.with_x(np.tile(ax, (loop.m, 1)) + 1e-3 * loop.x)
    bad.x[0] = ax
    rep = cone_membership_report(bad, entry_descriptor(e))
    assert not rep.member and rep.min_gamma_distance == pytest.approx(0, abs=1e-12)


def test_group_from_name():
    assert group_from_name("D2").order == 4
    assert group_from_name("O", "octahedron").polyhedron == "octahedron"


def test_resample_and_shift():
    loop = random_loop(build_rotation_group("T"), 32, 3)
    assert np.allclose(loop.resampled(64).x[::2], loop.x)
    assert np.allclose(loop.shifted(5).x[0], loop.x[5])
    r = loop.reversed()
    assert np.allclose(r.x[1], loop.x[-1]) and np.allclose(r.x[0], loop.x[0])
