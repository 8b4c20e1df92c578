import numpy as np
import pytest

from platonic_nbody.action import action, action_parts
from platonic_nbody.catalog import CATALOG, entry_constraint, entry_loop, entry_poly
from platonic_nbody.loops import (GeneratingLoop, k4_constraint, k4_optimal_rho, k4_test_loop,
                                  project, symmetry_residual)
from platonic_nbody.optimizer import (FlowParams, alpha_sweep, cylinder_ratio, discrete_gradient,
                                      energy, gradient_flow, newton_force, second_derivative,
                                      sobolev_apply, sobolev_direction, verify_solution)
from platonic_nbody.symmetry import axes_of, build_rotation_group
from platonic_nbody.topology import loop_invariant

FAST = dict(gtol=1e-10, ftol=1e-14, window=100, max_iter=20000, metric="H1")


@pytest.fixture(scope="module")
def tnu2():
    e = CATALOG["T.nu2"]
    c = entry_constraint(e)
    cx = entry_poly(e).complex
    loop, tr = gradient_flow(entry_loop(e, m=264), FlowParams(**FAST), c, cx)
    return e, c, cx, loop, tr


def test_flow_descends_and_keeps_cone(tnu2):
    e, c, cx, loop, tr = tnu2
    assert tr.monotone and tr.converged
    assert tr.final_action < 168.05
    assert loop_invariant(cx, loop) == loop_invariant(cx, entry_loop(e, m=264))
    assert symmetry_residual(loop, c) < 1e-10
    assert all(ok for _, ok in tr.invariant_checks)
    assert min(tr.min_gamma) > 0.1


def test_l2_and_h1_reach_the_same_minimizer(tnu2):
    e, c, cx, loop, tr = tnu2
    l2, tr2 = gradient_flow(entry_loop(e, m=264), FlowParams(gtol=1e-10, ftol=1e-15, window=200), c, cx)
    assert tr2.monotone
    assert tr2.final_action == pytest.approx(tr.final_action, rel=1e-8)


def test_critical_point_does_not_move(tnu2):
    e, c, cx, loop, tr = tnu2
    again, tr2 = gradient_flow(loop, FlowParams(gtol=1e-8, rescale=False), c, cx)
    assert tr2.iterations <= 1
    assert np.abs(again.x - loop.x).max() < 1e-8


def test_refinement_order(tnu2):
    e, c, cx, loop, tr = tnu2
    res = []
    cur = loop
    for m in (528, 1056, 2112):
        cur, _ = gradient_flow(cur.resampled(m), FlowParams(**FAST, rescale=False), c, cx)
        res.append(verify_solution(cur).residual)
    r = np.array(res)
    assert np.all(r[:-1] / r[1:] > 3.5)
    v = verify_solution(cur)
    assert v.energy_drift < 1e-4


def test_gradient_is_symmetric_after_projection():
    e = CATALOG["O.nu3"]
    c = entry_constraint(e)
    loop = entry_loop(e, m=96)
    rng = np.random.default_rng(1)
    pert = loop.with_x(project(loop.x + 0.01 * rng.normal(size=loop.x.shape), c))
    g = discrete_gradient(pert, 1.0, c)
    assert np.abs(project(g, c) - g).max() < 1e-10 * np.abs(g).max()
    d = sobolev_direction(g, pert)
    assert np.abs(project(d, c) - d).max() < 1e-10 * np.abs(d).max()
    assert np.allclose(sobolev_apply(d, pert), g, atol=1e-10 * np.abs(g).max())


def test_circle_about_axis_has_no_mean_tangential_gradient():
    g = build_rotation_group("O")
    ax = axes_of(g).axes[0]  # four-fold
    a = ax.direction
    b1 = np.cross(a, [0.3, 0.1, 0.9])
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(a, b1)
    m = 96
    th = 2 * np.pi * np.arange(m) / m
    loop = GeneratingLoop(1.0, 0.8 * a + 0.3 * (np.outer(np.cos(th), b1) + np.outer(np.sin(th), b2)), g)
    G = discrete_gradient(loop)
    tang = -np.sin(th)[:, None] * b1 + np.cos(th)[:, None] * b2
    gt = np.sum(G * tang, axis=1)
    assert abs(gt.mean()) < 1e-10 * np.abs(G).max()


def test_circular_surrogate_residual():
    # circular orbit of x'' = -k x / |x|^3
    k, r = 11 / 4, 0.7
    w = np.sqrt(k / r**3)
    T = 2 * np.pi / w
    m = 1024
    t = np.arange(m) * T / m
    x = r * np.stack([np.cos(w * t), np.sin(w * t), np.zeros(m)], axis=1)
    loop = GeneratingLoop(T, x, build_rotation_group("T"))
    force = lambda y: -k * y / np.linalg.norm(y, axis=1)[:, None] ** 3
    v = verify_solution(loop, force=force)
    assert v.residual < 1e-8
    assert verify_solution(loop, force=force, order=2).residual > v.residual


def test_second_derivative_orders():
    m, T = 64, 1.0
    t = np.arange(m) / m
    x = np.stack([np.sin(2 * np.pi * t)] * 3, axis=1)
    exact = -(2 * np.pi) ** 2 * x
    e2 = np.abs(second_derivative(x, T / m, 2) - exact).max()
    e4 = np.abs(second_derivative(x, T / m, 4) - exact).max()
    assert e4 < e2 / 100
    with pytest.raises(ValueError):
        second_derivative(x, 0.1, 3)


def test_newton_force_is_minus_potential_gradient():
    g = build_rotation_group("T")
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 3))
    F = newton_force(g, x)
    eps = 1e-6
    D = g.nontrivial() - np.eye(3)
    U = lambda y: np.sum(1 / np.linalg.norm(D @ y, axis=1))
    for j in range(4):
        num = np.array([(U(x[j] + eps * e) - U(x[j] - eps * e)) / (2 * eps) for e in np.eye(3)])
        assert np.allclose(F[j], 0.5 * num, rtol=1e-6)


def test_k4_flow_keeps_time_reflection():
    c = k4_constraint()
    loop = k4_test_loop(k4_optimal_rho(), 1.0, 128)
    out, tr = gradient_flow(loop, FlowParams(**FAST), c)
    assert tr.monotone
    x = out.x
    refl = np.roll(x[::-1], 1, axis=0) * np.array([1, 1, -1])
    assert np.abs(x - refl).max() < 1e-9


def test_sweep_shrinks_cube_orbit():
    e = CATALOG["C.min2"]
    c = entry_constraint(e)
    cx = entry_poly(e).complex
    pts, loops = alpha_sweep(entry_loop(e, m=256), [1.0, 3.0, 1.5, 0.5], FlowParams(**FAST), c, cx)
    sup = [p.sup_norm for p in pts[1:]]
    assert sup[0] > sup[1] > sup[2]
    assert all(p.cylinder_ratio > 0 for p in pts)
    assert all(p.l1_speed == pytest.approx(l.length(), rel=1e-12) for p, l in zip(pts, loops))


def test_boundary_floor_aborts():
    e = CATALOG["T.nu1"]
    loop = entry_loop(e, m=96)
    out, tr = gradient_flow(loop, FlowParams(min_dist_floor=10.0), entry_constraint(e))
    assert tr.reason == "possible boundary minimizer" and not tr.converged


def test_flow_params_from_dict():
    assert FlowParams.from_dict({"alpha": 2.0}).alpha == 2.0
    with pytest.raises(ValueError):
        FlowParams.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        FlowParams.from_dict({"metric": "H2"})


def test_energy_of_circular_k4_limit_is_constant():
    c = k4_constraint()
    loop = k4_test_loop(k4_optimal_rho(), 1.0, 256)
    out, _ = gradient_flow(loop, FlowParams(**FAST), c)
    E = energy(out)
    assert (E.max() - E.min()) / abs(E.mean()) < 1e-3
    assert cylinder_ratio(out) > 0
