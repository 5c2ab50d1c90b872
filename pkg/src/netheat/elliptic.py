"""Elliptic network problem -w'' + alpha*w = z with Kirchhoff vertex coupling.

Discretization: P1 finite elements on the shared-vertex mesh with lumped
(trapezoid) mass.  Continuity is built into the unknown layout; the vertex
rows are the variational flux-balance rows, so the assembled matrix is
symmetric positive definite and summing all equations telescopes the fluxes,
making the discrete identity alpha * int(w) = int(z) hold to solver roundoff.
Interior accuracy is second order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem
from .functions import GraphFunction


class EllipticSystem:
    """Assembled and factorized operator for one (network, alpha, mesh)."""

    def __init__(self, net, alpha, n):
        if not alpha > 0:
            raise SingularSystem("the elliptic network problem needs alpha > 0")
        self.net = net
        self.alpha = float(alpha)
        self.n = int(n)
        self.h = 1.0 / self.n
        self.n_dof = net.n_vertices + net.n_edges * (self.n - 1)
        self._assemble()

    def index(self, j, l):
        if l == 0:
            return self.net.edges[j][0]
        if l == self.n:
            return self.net.edges[j][1]
        return self.net.n_vertices + j * (self.n - 1) + (l - 1)

    def _assemble(self):
        net, n, h = self.net, self.n, self.h
        rows, cols, vals = [], [], []
        lump = np.zeros(self.n_dof)  # lumped mass (kappa-weighted cell sizes)
        for j in range(net.n_edges):
            kj = net.weights[j]
            for l in range(n):
                a, b = self.index(j, l), self.index(j, l + 1)
                s = kj / h
                rows += [a, a, b, b]
                cols += [a, b, a, b]
                vals += [s, -s, -s, s]
                lump[a] += kj * h / 2.0
                lump[b] += kj * h / 2.0
        stiff = sp.csr_matrix((vals, (rows, cols)), shape=(self.n_dof, self.n_dof))
        self.lump = lump
        self.matrix = (stiff + self.alpha * sp.diags(lump)).tocsc()
        try:
            self._solve = spla.factorized(self.matrix)
        except RuntimeError as exc:  # pragma: no cover - alpha > 0 keeps it SPD
            raise SingularSystem(str(exc)) from exc

    def pack_rhs(self, z):
        """Lumped load vector; vertex entries sum the incident half cells."""
        rhs = np.zeros(self.n_dof)
        net, n, h = self.net, self.n, self.h
        for j in range(net.n_edges):
            kj = net.weights[j]
            for l in range(n + 1):
                cell = h if 0 < l < n else h / 2.0
                rhs[self.index(j, l)] += kj * cell * z[j, l]
        return rhs

    def unpack(self, vec):
        out = np.empty((self.net.n_edges, self.n + 1))
        for j in range(self.net.n_edges):
            out[j, 0] = vec[self.index(j, 0)]
            out[j, self.n] = vec[self.index(j, self.n)]
            out[j, 1 : self.n] = vec[
                self.net.n_vertices + j * (self.n - 1) :
                self.net.n_vertices + (j + 1) * (self.n - 1)
            ]
        return out

    def solve(self, z):
        sol = self._solve(self.pack_rhs(z))
        if not np.all(np.isfinite(sol)):
            raise SingularSystem("elliptic solve produced non-finite values")
        return self.unpack(sol)


@lru_cache(maxsize=32)
def get_elliptic_system(net, alpha, n):
    return EllipticSystem(net, alpha, n)


def elliptic_solve(net, alpha, z):
    """Solve -w'' + alpha w = z with vertex continuity and Kirchhoff fluxes."""
    sys_ = get_elliptic_system(net, alpha, z.n_intervals)
    return GraphFunction(net, sys_.solve(z.values))


@dataclass
class EllipticBoundsReport:
    sign_ok: bool
    max_principle_ok: bool
    derivative_bound_ok: bool
    mean_identity_ok: bool
    min_w: float
    max_w: float
    bound_low: float
    bound_high: float
    max_grad: float
    grad_bound: float
    mean_residual: float


def verify_elliptic_bounds(net, alpha, z, w, tol=1e-10):
    """Check the elliptic a-priori bounds on a computed solution.

    (a) nonnegative data gives a nonnegative solution;
    (b) min(z)/alpha <= w <= max(z)/alpha (classical max principle);
    (c) the edge-wise derivative is bounded by sup|z| up to O(h^2);
    (d) alpha * int(w) = int(z) to solver tolerance.
    """
    zmin, zmax = float(z.values.min()), float(z.values.max())
    wmin, wmax = float(w.values.min()), float(w.values.max())
    grad = w.edgewise_derivative()
    max_grad = float(np.abs(grad.values).max())
    h2 = w.h ** 2
    scale = max(1.0, abs(zmax), abs(zmin))
    mean_res = abs(alpha * w.integral() - z.integral())
    return EllipticBoundsReport(
        sign_ok=(zmin >= 0 and wmin >= -1e-10 * scale) or zmin < 0,
        max_principle_ok=(zmin / alpha - tol * scale <= wmin
                          and wmax <= zmax / alpha + tol * scale),
        derivative_bound_ok=max_grad <= max(abs(zmin), abs(zmax)) * (1 + 50 * h2) + tol,
        mean_identity_ok=mean_res <= 1e-9 * scale * net.total_measure,
        min_w=wmin,
        max_w=wmax,
        bound_low=zmin / alpha,
        bound_high=zmax / alpha,
        max_grad=max_grad,
        grad_bound=max(abs(zmin), abs(zmax)),
        mean_residual=mean_res,
    )
