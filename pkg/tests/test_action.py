import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import quad

from platonic_nbody.action import (ActionBreakdown, CollisionError, action, action_gradient,
                                   action_parts, analytic_action, analytic_test_action,
                                   optimal_scaling, scaled_min_newton, upsilon,
                                   upsilon_tetrahedral_closed_form)
from platonic_nbody.archimedean import qr_for
from platonic_nbody.catalog import CATALOG
from platonic_nbody.loops import (GeneratingLoop, full_action, k4_optimal_rho, k4_test_loop,
                                  loop_from_nu)
from platonic_nbody.symmetry import build_rotation_group

UPSILON_T = 9.5083832641  # frozen from the closed-form expression


def smooth_loop(group, m, T=1.0, seed=0):
    rng = np.random.default_rng(seed)
    c = np.array([0.3, 0.5, 0.8])
    a, b = rng.normal(size=(2, 3)) * 0.1
    t = np.arange(m) / m * 2 * np.pi
    return GeneratingLoop(T, c + np.outer(np.cos(t), a) + np.outer(np.sin(2 * t), b), group)


def test_breakdown_signs_and_scaling():
    g = build_rotation_group("T")
    b = action(smooth_loop(g, 64))
    assert b.kinetic > 0 and b.potential > 0
    lam, amin = optimal_scaling(b)
    assert amin <= b.total
    assert amin == pytest.approx(scaled_min_newton(b.kinetic, b.potential), rel=1e-12)


@given(st.floats(0.1, 10.0))
def test_homogeneity(lam):
    g = build_rotation_group("O")
    loop = smooth_loop(g, 64)
    b = action(loop)
    b2 = action(loop.scaled(lam))
    assert b2.total == pytest.approx(lam**2 * b.kinetic + b.potential / lam, rel=1e-12)


def test_balanced_breakdown_is_stationary():
    b = ActionBreakdown(2.0, 4.0)
    lam, amin = optimal_scaling(b)
    assert lam == pytest.approx(1.0, abs=1e-14) and amin == pytest.approx(b.total)


def test_scaled_min_below_random_homotheties(rng):
    b = ActionBreakdown(3.7, 1.3)
    _, amin = optimal_scaling(b)
    for lam in rng.uniform(0.05, 20, 20):
        assert amin <= lam**2 * b.kinetic + b.potential / lam + 1e-12


def test_general_alpha_scaling():
    b = ActionBreakdown(2.0, 5.0, alpha=2.5)
    lam, amin = optimal_scaling(b)
    grid = np.linspace(0.2, 5, 20001)
    vals = grid**2 * b.kinetic + b.potential / grid**2.5
    assert amin == pytest.approx(vals.min(), rel=1e-6)


def test_reduction_matches_full_pair_sum():
    # the reduced action equals the unreduced N-body action
    for kind in ("T", "O"):
        loop = smooth_loop(build_rotation_group(kind), 32)
        assert action(loop).total == pytest.approx(full_action(loop), rel=1e-12)


def test_collision_raises():
    g = build_rotation_group("T")
    ax = g.elements[1].axis
    x = smooth_loop(g, 32).x
    x[3] = ax * 0.7
    with pytest.raises(CollisionError) as exc:
        action_parts(g, x, 1.0)
    assert exc.value.args  # carries the sample and pair


def test_second_order_refinement():
    g = build_rotation_group("T")
    A = [action(smooth_loop(g, m)).total for m in (64, 128, 256, 512)]
    d = np.abs(np.diff(A))
    assert np.all(d[:-1] / d[1:] > 3.5)

    # continuum value by adaptive quadrature of the smooth Lagrangian
    c = np.array([0.3, 0.5, 0.8])
    a, b = np.random.default_rng(0).normal(size=(2, 3)) * 0.1
    D = g.nontrivial() - np.eye(3)
    w = 2 * np.pi

    def lag(s):
        x = c + np.cos(w * s) * a + np.sin(2 * w * s) * b
        v = -w * np.sin(w * s) * a + 2 * w * np.cos(2 * w * s) * b
        return 0.5 * 12 * (v @ v + np.sum(1 / np.linalg.norm(D @ x, axis=1)))

    exact = quad(lag, 0, 1, epsabs=1e-12, limit=200)[0]
    assert abs(A[-1] - exact) < abs(A[0] - exact) / 50


def test_k4_test_loop_action():
    for T in (1.0, 2.5):
        rho = k4_optimal_rho(T)
        b = action(k4_test_loop(rho, T, 512))
        assert b.kinetic == pytest.approx(32 * np.pi**2 * rho**2 / T, rel=1e-4)
        assert b.potential < 3 * T / rho
        assert b.total < 32 * np.pi**2 * rho**2 / T + 3 * T / rho


def test_upsilon_tetrahedral():
    p = qr_for("T")
    u1, u2 = upsilon(p, 1), upsilon(p, 2)
    cf = upsilon_tetrahedral_closed_form()
    assert cf == pytest.approx(UPSILON_T, abs=1e-6)
    assert u1 == pytest.approx(cf, abs=1e-8)
    assert u2 == pytest.approx(cf, abs=1e-8)


@pytest.mark.parametrize("kind", ("T", "O", "I"))
def test_upsilon_conjugation_invariance(kind, rng):
    p = qr_for(kind)
    for i in (1, 2):
        base = upsilon(p, i)
        for k in rng.choice(np.arange(1, p.group.order), 5, replace=False):
            R = p.group.matrices[k]
            assert upsilon(p, i, R) == pytest.approx(base, abs=1e-10)


def test_upsilon_rejects_bad_index():
    with pytest.raises(ValueError):
        upsilon(qr_for("T"), 3)


@pytest.mark.parametrize("cid,value", [("T.nu1", 168.0445), ("T.nu2", 168.0445), ("T.nu3", 266.7542)])
def test_analytic_test_action_tetrahedral(cid, value):
    e = CATALOG[cid]
    p = qr_for("T")
    ups = upsilon_tetrahedral_closed_form()
    n1, n2 = e.counts
    A = analytic_action(12, p.edge_length, n1, n2, ups, ups)
    assert A == pytest.approx(value, abs=1e-3)
    assert analytic_test_action(p, e.path) == pytest.approx(value, abs=1e-3)


def test_analytic_action_covering_and_period():
    p = qr_for("T")
    nu = CATALOG["T.nu1"].path
    A1 = analytic_test_action(p, nu, 1)
    assert analytic_test_action(p, nu, 2) == pytest.approx(2 ** (2 / 3) * A1, rel=1e-12)
    assert analytic_test_action(p, nu, 1, T=8.0) == pytest.approx(2 * A1, rel=1e-12)


@pytest.mark.parametrize("cid", ["T.nu1", "O.nu3", "I.nu1"])
def test_discrete_pipeline_matches_closed_form(cid):
    # constant-speed polyline: the discrete action converges to A(v)
    e = CATALOG[cid]
    p = qr_for(e.kind, e.polyhedron)
    loop = loop_from_nu(p, e.path, 1, 1.0, 200 * len(e.path), start=0.5)
    A = analytic_test_action(p, e.path)
    assert action(loop).scaledMin == pytest.approx(A, rel=1e-3)


@given(st.integers(0, 10**6), st.sampled_from(["T", "O"]))
def test_gradient_matches_finite_differences(seed, kind):
    g = build_rotation_group(kind)
    loop = smooth_loop(g, 24, seed=seed)
    assume(loop.min_gamma_distance() > 0.05)
    G = action_gradient(g, loop.x, loop.T)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=loop.x.shape)
    eps = 1e-6
    fd = (action_parts(g, loop.x + eps * d, 1.0).total - action_parts(g, loop.x - eps * d, 1.0).total) / (2 * eps)
    assert np.sum(G * d) == pytest.approx(fd, rel=1e-6)
