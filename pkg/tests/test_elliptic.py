import math

import numpy as np
import pytest

from netheat import GraphFunction, build_network, elliptic_solve, verify_elliptic_bounds
from netheat.errors import SingularSystem


def test_constant_solution(star):
    z = GraphFunction.constant(star, 100, 2.0)
    w = elliptic_solve(star, 2.0, z)
    assert np.abs(w.values - 1.0).max() < 1e-12


def test_interval_eigenfunction(interval):
    n = 200
    z = GraphFunction.from_callable(interval, n,
                                    lambda j, xi: np.cos(np.pi * xi))
    w = elliptic_solve(interval, 1.0, z)
    ref = np.cos(np.pi * np.linspace(0, 1, n + 1)) / (1 + np.pi ** 2)
    assert np.abs(w.values[0] - ref).max() < 5e-6


def test_convergence_order(interval):
    errs = []
    for n in (100, 200, 400):
        z = GraphFunction.from_callable(interval, n,
                                        lambda j, xi: np.cos(np.pi * xi))
        w = elliptic_solve(interval, 1.0, z)
        ref = np.cos(np.pi * np.linspace(0, 1, n + 1)) / (1 + np.pi ** 2)
        errs.append(np.abs(w.values[0] - ref).max())
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8


def test_self_convergence_star(star):
    def bump(j, xi):
        return np.where(j == 0, np.exp(-(xi - 0.5) ** 2 / 0.02), 0.0)

    fine = elliptic_solve(star, 1.0, GraphFunction.from_callable(star, 800, bump))
    e80 = np.abs(elliptic_solve(star, 1.0,
                                GraphFunction.from_callable(star, 80, bump))
                 .values - fine.values[:, ::10]).max()
    e160 = np.abs(elliptic_solve(star, 1.0,
                                 GraphFunction.from_callable(star, 160, bump))
                  .values - fine.values[:, ::5]).max()
    assert math.log2(e80 / e160) >= 1.8


def test_mean_identity_exact(weighted_star, rng):
    z = GraphFunction(weighted_star, rng.uniform(0.5, 2.0, (3, 121)))
    alpha = 1.7
    w = elliptic_solve(weighted_star, alpha, z)
    assert abs(alpha * w.integral() - z.integral()) < 1e-10


def test_vertex_continuity_and_kirchhoff(multigraph):
    z = GraphFunction.from_callable(
        multigraph, 200,
        lambda j, xi: np.exp(-(xi - 0.3) ** 2 / 0.05) * (j + 1))
    w = elliptic_solve(multigraph, 0.8, z)
    assert w.vertex_gap() == 0.0  # shared unknowns make continuity exact
    # Kirchhoff flux balance from one-sided 3-point stencils, O(h^2)
    h = w.h
    for v in range(multigraph.n_vertices):
        flux = 0.0
        for j in multigraph.incident_edges[v]:
            u0, u1, _ = multigraph.edges[j]
            vals = w.values[j]
            if u0 == v:
                inward = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
                flux += multigraph.weights[j] * (-inward)
            if u1 == v:
                inward = (-3 * vals[-1] + 4 * vals[-2] - vals[-3]) / (2 * h)
                flux += multigraph.weights[j] * (-inward)
        assert abs(flux) < 5e-3  # residual of the one-sided probe, O(h^2)*|z|


def test_bounds_report(star):
    z = GraphFunction.from_callable(
        star, 200, lambda j, xi: np.exp(-(xi - 0.4) ** 2 / 0.05) * (j + 1))
    w = elliptic_solve(star, 1.3, z)
    rep = verify_elliptic_bounds(star, 1.3, z, w)
    assert rep.sign_ok and rep.max_principle_ok
    assert rep.derivative_bound_ok and rep.mean_identity_ok

    zc = GraphFunction.constant(star, 100, 1.0)
    wc = elliptic_solve(star, 2.0, zc)
    rep = verify_elliptic_bounds(star, 2.0, zc, wc)
    assert rep.max_w == pytest.approx(0.5, abs=1e-12)
    assert rep.mean_residual < 1e-11


def test_alpha_zero_rejected(star):
    z = GraphFunction.constant(star, 50, 1.0)
    with pytest.raises(SingularSystem):
        elliptic_solve(star, 0.0, z)
