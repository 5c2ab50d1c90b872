"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run with `pytest -s tests/test_acceptance.py` to see the PASS/FAIL lines.
"""

import math
import time

import numpy as np
import pytest

from netheat import (GraphFunction, KernelParams, PEConfig, PPConfig,
                     apply_semigroup, build_network, elliptic_solve,
                     enumerate_paths, eval_H, get_engine, run_pe, run_pp,
                     verify_elliptic_bounds, verify_vertex_conditions)
from netheat.verification import decay_slopes, random_weighted_network

from reference import FDGraphLaplacian


def report(criterion, passed, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def interval():
    return build_network([("a", "b", 1.0)])


@pytest.fixture(scope="module")
def star():
    return build_network([("c", "a", 1.0), ("c", "b", 1.0), ("c", "d", 1.0)])


@pytest.fixture(scope="module")
def multigraph():
    return build_network([("a", "b", 1.0), ("a", "b", 2.0),
                          ("b", "c", 1.5), ("a", "c", 1.0)])


@pytest.fixture(scope="module")
def params():
    return KernelParams(tol=1e-10)


def normalized_bump(net, n):
    def fn(j, xi):
        return np.where(j == 0, np.exp(-(xi - 0.5) ** 2 / 0.02), 0.0) + 0.05
    u = GraphFunction.from_callable(net, n, fn)
    return GraphFunction(net, u.values / u.integral())


def test_c01_kernel_oracle_interval(interval, params):
    def image(t, xi, eta, nmax=25):
        s = 0.0
        for k in range(-nmax, nmax + 1):
            s += math.exp(-(xi - eta + 2 * k) ** 2 / (4 * t))
            s += math.exp(-(xi + eta + 2 * k) ** 2 / (4 * t))
        return s / math.sqrt(4 * math.pi * t)

    start = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 41)
    worst = 0.0
    for t in (0.01, 0.1, 1.0):
        for xi in grid:
            x = interval.point(0, xi)
            for eta in grid:
                got = eval_H(interval, params, t, x, interval.point(0, eta))
                worst = max(worst, abs(got.value - image(t, xi, eta)))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-8 and elapsed < 5.0,
           f"interval image-charge max err {worst:.3e} (tol 1e-8), "
           f"runtime {elapsed:.1f}s (< 5s)")


def test_c02_kernel_oracle_graphs(star, multigraph, params):
    def data(j, xi):
        return np.exp(-(xi - 0.5) ** 2 / 0.12) + 0.1 * (j + 1) * np.sin(
            np.pi * xi) + 1.0

    start = time.perf_counter()
    worst = 0.0
    for net in (star, multigraph):
        f0 = GraphFunction.from_callable(net, 200, data)
        oracle = FDGraphLaplacian(net, 800)
        fine = GraphFunction.from_callable(net, 800, data)
        for t in (0.05, 0.5):
            ref = oracle.evolve(fine.values, t)[:, ::4]
            ours = apply_semigroup(net, params, t, f0)
            worst = max(worst, float(np.abs(ours.values - ref).max()))
    elapsed = time.perf_counter() - start
    report(2, worst <= 1e-4 and elapsed < 60.0,
           f"semigroup vs h=1/800 reference max err {worst:.3e} (tol 1e-4), "
           f"runtime {elapsed:.1f}s (< 60s)")


def test_c03_mass_identity(star, multigraph, params):
    worst = 0.0
    for net in (star, multigraph):
        eng = get_engine(net, params, 200)
        for t in (0.01, 0.1, 1.0):
            M = eng.kernel_matrix(t)
            worst = max(worst, float(np.abs(M @ eng.w - 1.0).max()))
        split = apply_semigroup(net, params, 10.0,
                                GraphFunction.constant(net, 200, 1.0))
        worst = max(worst, float(np.abs(split.values - 1.0).max()))
    report(3, worst <= 5e-7,
           f"max |int H dy - 1| = {worst:.3e} over t in {{0.01,0.1,1,10}} "
           "(tol 5e-7, t=10 via splitting)")


def test_c04_symmetry_and_vertex_conditions(star, multigraph, params):
    rng = np.random.default_rng(7)
    sym = 0.0
    jump = 0.0
    residual = 0.0
    for net in (star, multigraph):
        pts = [net.point(int(rng.integers(net.n_edges)),
                         float(rng.uniform(0.05, 0.95))) for _ in range(6)]
        for x in pts:
            for y in pts:
                sym = max(sym, abs(eval_H(net, params, 0.1, x, y).value
                                   - eval_H(net, params, 0.1, y, x).value))
        rep = verify_vertex_conditions(net, params, 0.1, pts[0], n=400)
        jump = max(jump, rep.max_jump)
        residual = max(residual, rep.max_residual)
    ok = sym <= 1e-7 and jump <= 1e-7 and residual <= 1e-5
    report(4, ok, f"symmetry {sym:.2e} (tol 1e-7), continuity jump {jump:.2e} "
                  f"(tol 1e-7), Kirchhoff residual {residual:.2e} (tol 1e-5)")


def test_c05_decay_scaling(star, params):
    s_h, s_dh, _, _ = decay_slopes(star, params,
                                   tgrid=np.logspace(-3, -1, 7))
    ok = s_h <= -0.45 and s_dh <= -0.9
    report(5, ok, f"sup|H| slope {s_h:.3f} (<= -0.45), "
                  f"sup|dH| slope {s_dh:.3f} (<= -0.9) over t in [1e-3,1e-1]")


def test_c06_pp_solver(star):
    n = 100
    cfg = PPConfig(epsilon=1.0, alpha=1.0, dt=0.01, T=2.0, picard_tol=1e-10)
    u0 = normalized_bump(star, n)
    c0 = GraphFunction.constant(star, n, 0.0)
    start = time.perf_counter()
    res = run_pp(star, cfg, u0, c0)
    elapsed = time.perf_counter() - start
    drift = max(abs(s.mass - res.mass0) for s in res.states) / res.mass0
    min_u = min(float(s.u.values.min()) for s in res.states)
    energies = np.array([s.energy for s in res.states])
    slack = 1e-6 * (1 + abs(energies[0]))
    rise = float(np.diff(energies).max())
    tail_ratios = []
    for rep in res.window_reports:
        meaningful = [r for i, r in enumerate(rep.ratios)
                      if rep.increments[i + 1] > 100 * cfg.picard_tol]
        if meaningful:
            tail_ratios.append(meaningful[-1])
    ratios_ok = bool(tail_ratios) and max(tail_ratios) < 0.9
    ok = (drift <= 1e-6 and min_u >= -1e-8 and rise <= slack and ratios_ok
          and elapsed < 300.0)
    report(6, ok,
           f"mass drift {drift:.2e} (tol 1e-6), min u {min_u:.2e} (>= -1e-8), "
           f"max energy step {rise:.2e} (slack {slack:.2e}), "
           f"worst final Picard ratio {max(tail_ratios):.2f} (< 0.9), "
           f"runtime {elapsed:.0f}s (< 300s)")


def test_c07_pe_solver(star):
    dt = 0.02
    res80 = run_pe(star, PEConfig(alpha=1.0, dt=dt, T=50.0, picard_tol=1e-10),
                   normalized_bump(star, 80))
    res40 = run_pe(star, PEConfig(alpha=1.0, dt=dt, T=50.0, picard_tol=1e-10),
                   normalized_bump(star, 40))
    res25 = run_pe(star, PEConfig(alpha=1.0, dt=dt, T=25.0, picard_tol=1e-10),
                   normalized_bump(star, 80))
    mean_dev = res80.mean_identity_max
    sup80 = max(r.lp_norms_u[np.inf] for r in res80.records)
    sup40 = max(r.lp_norms_u[np.inf] for r in res40.records)
    mesh_gap = abs(sup80 - sup40) / sup80
    w_ratio = max(res80.w1inf_c) / max(res25.w1inf_c)
    ok = (mean_dev <= 1e-9 * res80.mass0 and mesh_gap <= 0.02
          and w_ratio <= 1.01)
    report(7, ok,
           f"alpha*int(c)=M deviation {mean_dev:.2e} (tol {1e-9 * res80.mass0:.0e}), "
           f"sup_t||u|| mesh-halving gap {mesh_gap:.2%} (<= 2%), "
           f"W1inf running-max T-doubling ratio {w_ratio:.4f} (<= 1.01)")


def test_c08_elliptic_solver(interval, star):
    const = elliptic_solve(star, 2.0, GraphFunction.constant(star, 100, 2.0))
    const_err = float(np.abs(const.values - 1.0).max())
    errs = []
    for n in (100, 200, 400):
        z = GraphFunction.from_callable(interval, n,
                                        lambda j, xi: np.cos(np.pi * xi))
        w = elliptic_solve(interval, 1.0, z)
        ref = np.cos(np.pi * np.linspace(0, 1, n + 1)) / (1 + np.pi ** 2)
        errs.append(float(np.abs(w.values[0] - ref).max()))
    order = min(math.log2(errs[i] / errs[i + 1]) for i in range(2))
    zb = GraphFunction.from_callable(
        star, 200, lambda j, xi: np.exp(-(xi - 0.4) ** 2 / 0.05) * (j + 1))
    rep = verify_elliptic_bounds(star, 1.3, zb, elliptic_solve(star, 1.3, zb))
    bounds_ok = (rep.sign_ok and rep.max_principle_ok
                 and rep.derivative_bound_ok and rep.mean_identity_ok)
    ok = const_err <= 1e-12 and order >= 1.8 and bounds_ok
    report(8, ok, f"constant case err {const_err:.1e}, interval eigen order "
                  f"{order:.2f} (>= 1.8), max-principle/derivative/mean checks "
                  f"{'PASS' if bounds_ok else 'FAIL'}")


def test_c09_epsilon_limit(star):
    n = 60
    def smooth(j, xi):
        return (1.0 + 0.8 * np.exp(-(xi - 0.5) ** 2 / 0.03) * (j == 0)
                + 0.2 * np.sin(np.pi * xi) * (j == 1))
    u0 = GraphFunction.from_callable(star, n, smooth)
    c0 = elliptic_solve(star, 1.0, u0)
    T, dt = 1.0, 2e-3
    pe = run_pe(star, PEConfig(alpha=1.0, dt=dt, T=T, picard_tol=1e-10), u0)
    u_pe = pe.states[-1].u.values
    gaps = []
    for eps in (1e-1, 1e-2, 1e-3):
        cfg = PPConfig(epsilon=eps, alpha=1.0, dt=dt, T=T, picard_tol=1e-10)
        pp = run_pp(star, cfg, u0, c0)
        gaps.append(float(np.abs(pp.states[-1].u.values - u_pe).max()))
    ok = gaps[0] > gaps[1] > gaps[2]
    report(9, ok, "PP->PE sup gaps at eps {1e-1,1e-2,1e-3}: "
                  + ", ".join(f"{g:.3e}" for g in gaps)
                  + (" (monotone)" if ok else " (NOT monotone)"))


def test_c10_combinatorial_identities():
    rng = np.random.default_rng(20240612)
    worst_out = 0.0
    worst_rev = 0.0
    for _ in range(1000):
        g = random_weighted_network(rng)
        eps = g.transfer_matrix
        for a in range(2 * g.n_edges):
            v = g.arc_T(a)
            total = sum(g.weights[b // 2] * eps[a, b] for b in g.out_arcs[v])
            worst_out = max(worst_out, abs(total - g.weights[a // 2]))
        x = g.point(0, 0.3)
        y = g.point(g.n_edges - 1, 0.7)
        for k in (2, 3):
            for p in enumerate_paths(g, x, y, k)[:40]:
                pr = p.reverse(g)
                lhs = p.weight / g.weights[p.arcs[0] // 2]
                rhs = pr.weight / g.weights[pr.arcs[0] // 2]
                worst_rev = max(worst_rev, abs(lhs - rhs))
    ok = worst_out <= 1e-12 and worst_rev <= 1e-12
    report(10, ok, f"outflow identity max dev {worst_out:.2e}, reversal "
                   f"identity max dev {worst_rev:.2e} over 1000 random graphs "
                   "(round-off)")
