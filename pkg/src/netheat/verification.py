"""Property suites behind `netheat verify`: measured values against tolerances.

Each check returns (name, passed, measured, tolerance, note).  The kernel
suite exercises the mass identity, symmetry, vertex conditions, and the decay
scaling laws; the solver suites run short canned simulations and check the
conserved quantities and sign/energy structure; the combinatorial suite
replays the coefficient identities on random weighted multigraphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network as netmod
from .chemotaxis_pe import PEConfig, run_pe
from .chemotaxis_pp import PPConfig, run_pp
from .elliptic import elliptic_solve, verify_elliptic_bounds
from .errors import NetheatError
from .functions import GraphFunction
from .kernel import (KernelParams, apply_semigroup, eval_H,
                     verify_vertex_conditions, get_engine, _series_values,
                     _depth_from_bound)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    note: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: measured {self.measured:.6g} "
                f"vs tolerance {self.tolerance:.6g}"
                + (f" ({self.note})" if self.note else ""))


def _probe_points(net, rng, count=6):
    pts = []
    for _ in range(count):
        e = int(rng.integers(net.n_edges))
        pts.append(net.point(e, float(rng.uniform(0.05, 0.95))))
    return pts


def sup_H(net, params, t):
    """Pointwise sup of |H(t)| over probes adapted to the kernel width."""
    best = 0.0
    K, _ = _depth_from_bound(net, t, params.tol, params.k_max)
    for e in range(net.n_edges):
        etas = np.clip(0.5 + np.sqrt(t) * np.array([0.0, 0.5, 1.0, 2.0]), 0.0, 1.0)
        vals, _ = _series_values(net, t, e, 0.5, e, etas, K)
        best = max(best, float(np.abs(vals).max()))
    return best


def sup_dH(net, params, t):
    best = 0.0
    K, _ = _depth_from_bound(net, t, params.tol, params.k_max, deriv=True)
    offsets = np.sqrt(t) * np.array([0.25, 0.5, 1.0, 1.41, 2.0, 3.0])
    for e in range(net.n_edges):
        etas = np.clip(np.concatenate([0.5 + offsets, 0.5 - offsets]), 1e-4,
                       1 - 1e-4)
        vals, _ = _series_values(net, t, e, 0.5, e, etas, K, deriv=True)
        best = max(best, float(np.abs(vals).max()))
    return best


def decay_slopes(net, params, tgrid=None):
    """Fitted log-log slopes of sup|H|, sup|dH| and the L1 norms over tgrid."""
    if tgrid is None:
        tgrid = np.logspace(-3, -1, 7)
    sh = [sup_H(net, params, t) for t in tgrid]
    sdh = [sup_dH(net, params, t) for t in tgrid]
    eng = get_engine(net, params, 200)
    l1h, l1dh = [], []
    for t in tgrid:
        M = eng.kernel_matrix(t)
        D = eng.kernel_matrix(t, deriv=True)
        l1h.append(float((np.abs(M) @ eng.w).max()))
        l1dh.append(float((np.abs(D) @ eng.w).max()))
    logt = np.log(tgrid)
    fit = lambda v: float(np.polyfit(logt, np.log(v), 1)[0])
    return fit(sh), fit(sdh), fit(l1h), fit(l1dh)


def kernel_suite(net, params=None, n=200):
    params = params or KernelParams()
    checks = []
    rng = np.random.default_rng(20240611)

    f1 = GraphFunction.constant(net, n, 1.0)
    mass_dev = 0.0
    for t in (0.01, 0.1, 1.0, 10.0):
        out = apply_semigroup(net, params, t, f1)
        mass_dev = max(mass_dev, float(np.abs(out.values - 1.0).max()))
    checks.append(CheckResult("kernel.mass_identity", mass_dev <= 5e-7,
                              mass_dev, 5e-7, "t in {0.01,0.1,1,10}"))

    sym = 0.0
    pts = _probe_points(net, rng)
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            sym = max(sym, abs(eval_H(net, params, 0.1, x, y).value
                               - eval_H(net, params, 0.1, y, x).value))
    checks.append(CheckResult("kernel.symmetry", sym <= 1e-7, sym, 1e-7))

    rep = verify_vertex_conditions(net, params, 0.1, net.point(0, 0.3), n=400)
    checks.append(CheckResult("kernel.vertex_continuity", rep.max_jump <= 1e-7,
                              rep.max_jump, 1e-7, "t=0.1 h=1/400"))
    checks.append(CheckResult("kernel.kirchhoff_residual",
                              rep.max_residual <= 1e-5, rep.max_residual, 1e-5,
                              "t=0.1 h=1/400"))

    s_h, s_dh, s_l1h, s_l1dh = decay_slopes(net, params)
    checks.append(CheckResult("kernel.decay_supH", s_h <= -0.45, s_h, -0.45,
                              "log-log slope"))
    checks.append(CheckResult("kernel.decay_supdH", s_dh <= -0.9, s_dh, -0.9,
                              "log-log slope"))
    checks.append(CheckResult("kernel.l1_H_bounded", abs(s_l1h) <= 0.1, s_l1h,
                              0.1, "slope magnitude"))
    checks.append(CheckResult("kernel.l1_dH_scaling",
                              -0.6 <= s_l1dh <= -0.4, s_l1dh, -0.5,
                              "slope vs t^-1/2"))
    return checks


def _bump_data(net, n):
    def fn(j, xi):
        base = np.exp(-(xi - 0.5) ** 2 / 0.02) if j == 0 else np.zeros_like(xi)
        return base + 0.2
    u0 = GraphFunction.from_callable(net, n, fn)
    return GraphFunction(net, u0.values / u0.integral())


def pp_suite(net, n=80):
    cfg = PPConfig(epsilon=1.0, alpha=1.0, dt=0.01, T=0.3, picard_tol=1e-10)
    u0 = _bump_data(net, n)
    c0 = GraphFunction.constant(net, n, 0.0)
    res = run_pp(net, cfg, u0, c0)
    checks = []
    drift = max(abs(s.mass - res.mass0) for s in res.states) / abs(res.mass0)
    checks.append(CheckResult("pp.mass_conservation", drift <= 1e-6, drift,
                              1e-6, "relative"))
    min_u = min(float(s.u.values.min()) for s in res.states)
    min_c = min(float(s.c.values.min()) for s in res.states)
    checks.append(CheckResult("pp.positivity_u", min_u >= -1e-8, min_u, -1e-8))
    checks.append(CheckResult("pp.positivity_c", min_c >= -1e-8, min_c, -1e-8))
    energies = [s.energy for s in res.states]
    slack = 1e-6 * (1 + abs(energies[0]))
    rise = max(np.diff(energies).max(), 0.0)
    checks.append(CheckResult("pp.energy_nonincreasing", rise <= slack, rise,
                              slack, "max per-step increase"))
    ratios = [r.ratios[-1] for r in res.window_reports if r.ratios]
    worst = max(ratios) if ratios else 0.0
    checks.append(CheckResult("pp.picard_contraction", worst < 0.9, worst, 0.9,
                              "final increment ratio"))
    return checks


def pe_suite(net, n=80):
    checks = []
    z = GraphFunction.from_callable(
        net, 200, lambda j, xi: np.exp(-(xi - 0.4) ** 2 / 0.05) * (j + 1) * 0.5)
    w = elliptic_solve(net, 1.3, z)
    rep = verify_elliptic_bounds(net, 1.3, z, w)
    checks.append(CheckResult("pe.elliptic_sign", rep.sign_ok,
                              rep.min_w, 0.0, "min w for z >= 0"))
    checks.append(CheckResult("pe.elliptic_max_principle",
                              rep.max_principle_ok, rep.max_w, rep.bound_high))
    checks.append(CheckResult("pe.elliptic_derivative_bound",
                              rep.derivative_bound_ok, rep.max_grad,
                              rep.grad_bound))
    checks.append(CheckResult("pe.elliptic_mean_identity",
                              rep.mean_identity_ok, rep.mean_residual, 1e-9))

    cfg = PEConfig(alpha=1.0, dt=0.01, T=0.3, picard_tol=1e-10)
    res = run_pe(net, cfg, _bump_data(net, n))
    drift = max(abs(s.mass - res.mass0) for s in res.states) / abs(res.mass0)
    checks.append(CheckResult("pe.mass_conservation", drift <= 1e-6, drift,
                              1e-6, "relative"))
    checks.append(CheckResult("pe.resolvent_mean_identity",
                              res.mean_identity_max <= 1e-9 * res.mass0,
                              res.mean_identity_max, 1e-9 * res.mass0,
                              "alpha int c = int u"))
    min_u = min(float(s.u.values.min()) for s in res.states)
    checks.append(CheckResult("pe.positivity_u", min_u >= -1e-8, min_u, -1e-8))
    supu = max(r.lp_norms_u[np.inf] for r in res.records)
    checks.append(CheckResult("pe.sup_bounded", np.isfinite(supu), supu,
                              float("inf"), "no blow-up"))
    return checks


def random_weighted_network(rng, max_vertices=5, max_edges=6):
    while True:
        nv = int(rng.integers(2, max_vertices + 1))
        ne = int(rng.integers(max(1, nv - 1), max_edges + 1))
        edges = []
        for _ in range(ne):
            u, v = rng.choice(nv, 2, replace=False)
            edges.append((int(u), int(v), float(rng.uniform(0.2, 5.0))))
        try:
            return netmod.build_network(edges)
        except NetheatError:
            continue


def combinatorial_suite(net, n_random=1000, seed=20240612):
    rng = np.random.default_rng(seed)
    worst_out = 0.0
    worst_rev = 0.0
    nets = [net] + [random_weighted_network(rng) for _ in range(n_random)]
    for g in nets:
        E = g.transfer_matrix
        for a in range(2 * g.n_edges):
            v = g.arc_T(a)
            s = sum(g.weights[b // 2] * E[a, b] for b in g.out_arcs[v])
            worst_out = max(worst_out, abs(s - g.weights[a // 2]))
        x = g.point(0, 0.3)
        y = g.point(g.n_edges - 1, 0.7)
        for k in (2, 3):
            for p in netmod.enumerate_paths(g, x, y, k)[:40]:
                pr = p.reverse(g)
                lhs = p.weight / g.weights[p.arcs[0] // 2]
                rhs = pr.weight / g.weights[pr.arcs[0] // 2]
                worst_rev = max(worst_rev, abs(lhs - rhs))
    return [
        CheckResult("comb.weighted_outflow", worst_out <= 1e-12, worst_out,
                    1e-12, f"{len(nets)} graphs"),
        CheckResult("comb.reversal_identity", worst_rev <= 1e-12, worst_rev,
                    1e-12, f"{len(nets)} graphs"),
    ]


def run_suite(net, suite, n_mesh=200):
    checks = []
    if suite in ("kernel", "all"):
        checks += kernel_suite(net, n=n_mesh)
    if suite in ("pp", "all"):
        checks += pp_suite(net)
    if suite in ("pe", "all"):
        checks += pe_suite(net)
    if suite == "all":
        checks += combinatorial_suite(net, n_random=200)
    return checks
