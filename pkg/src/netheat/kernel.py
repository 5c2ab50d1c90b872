"""Heat kernel on the network via the truncated path-sum series.

The kernel is

    H(t, x, y) = delta_ij / kappa_i * G(t, d(x, y))
               + 1/kappa_i * sum_k sum_C eps(C) * G(t, d_C(x, y))

with G the 1-D Gaussian and the inner sum over all paths of length k+2 from
x's edge to y's edge.  Because d_C only depends on the first arc, the last
arc and the path length, the path sum collapses exactly onto the aggregated
weights E^(k+1)[a, b] (transfer-matrix powers) held by the Network.

Everything mesh-sized goes through a KernelEngine, which caches dense kernel
matrices per (t, mesh) and the exact time-integrated (band) matrices used by
the Volterra solvers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from .errors import NonPositiveTime, TruncationUnreachable, VertexPoint
from .functions import GraphFunction, mesh_coordinates, quad_weights

_SQRT_PI = math.sqrt(math.pi)


def gauss_kernel(t, z):
    """1-D heat kernel G(t, z) = exp(-z^2/4t) / sqrt(4 pi t)."""
    if t <= 0:
        raise NonPositiveTime(f"gauss_kernel needs t > 0, got {t}")
    return math.exp(-z * z / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)


@dataclass(frozen=True)
class KernelParams:
    """Truncation tolerance, series cap, and the semigroup splitting threshold."""

    tol: float = 1e-10
    k_max: int = 400
    t_switch: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")
        if not self.t_switch > 0:
            raise ValueError("t_switch must be positive")


@dataclass(frozen=True)
class KernelValue:
    value: float
    truncation_error_bound: float
    terms_used: int


def _tail_terms(net, t, deriv):
    """Generator of the series tail bound terms b_k, k = 0, 1, ...

    b_k bounds the k-th layer: card <= 2 D^(k+1), |eps(C)| <= eps_bar^(k+1),
    and twice the Gaussian factor maximized over distances >= k.  Computed in
    log space; the geometric growth overflows floats long before the Gaussian
    takes over when t is large.
    """
    log_growth = math.log(net.epsilon_bar * net.max_degree)
    base = -math.log(net.kappa0) - 0.5 * math.log(math.pi * t)
    k = 0
    while True:
        if deriv:
            zstar = max(float(k), math.sqrt(2.0 * t))
            log_gmax = math.log(zstar / (2.0 * t)) - zstar * zstar / (4.0 * t)
        else:
            log_gmax = -k * k / (4.0 * t)
        yield math.exp(min(base + (k + 1) * log_growth + log_gmax, 700.0))
        k += 1


def _depth_from_bound(net, t, tol, k_max, deriv=False):
    """Minimal K with tail(k > K) < tol, plus the per-K suffix sums."""
    if t <= 0:
        raise NonPositiveTime(f"truncation depth needs t > 0, got {t}")
    growth = net.epsilon_bar * net.max_degree
    k_peak = 2.0 * t * math.log(growth) + 1.0
    terms = []
    gen = _tail_terms(net, t, deriv)
    k = 0
    while True:
        b = next(gen)
        terms.append(b)
        if k > k_peak and (b < tol * 1e-8 or b == 0.0):
            break
        if k > max(100 * k_max, 100000):
            raise TruncationUnreachable(
                f"tail bound does not decay at t={t}; series too slow"
            )
        k += 1
    suffix = np.cumsum(terms[::-1])[::-1]
    # suffix[i] = sum of terms k >= i; want minimal K with suffix[K+1] < tol
    for K in range(len(suffix)):
        rem = suffix[K + 1] if K + 1 < len(suffix) else 0.0
        if rem < tol:
            if K > k_max:
                break
            return K, rem
    raise TruncationUnreachable(
        f"cannot reach tol={tol} at t={t} within k_max={k_max}"
    )


def truncation_depth(net, t, tol, k_max=400):
    """Series cutoff from the explicit tail bound (max-degree variant)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if math.isinf(tol):
        return 0
    return _depth_from_bound(net, t, tol, k_max)[0]


# ---------------------------------------------------------------------------
# scalar series evaluation
# ---------------------------------------------------------------------------

def _series_values(net, t, i, xi, j, etas, kdepth, deriv=False):
    """Raw series evaluation H(t, x, .) (or d/d_eta) at points on edge j.

    Works with the explicit (edge, coordinate) representation; no vertex
    canonicalization, so it can probe each side of a vertex separately.
    Returns (values, terms_used).
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    stack = net.weight_stack(kdepth)
    W = stack[:, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
    ks = np.arange(kdepth + 1, dtype=float)
    xoff = np.array([1.0 - xi, xi])
    yoff = np.stack([etas, 1.0 - etas])  # (2, nE)
    z = ks[:, None, None, None] + xoff[None, :, None, None] + yoff[None, None, :, :]
    q = 1.0 / (4.0 * t)
    c = 1.0 / math.sqrt(4.0 * math.pi * t)
    if deriv:
        sgn = np.array([1.0, -1.0])[None, None, :, None]
        terms = W[..., None] * sgn * (-z / (2.0 * t)) * np.exp(-z * z * q)
    else:
        terms = W[..., None] * np.exp(-z * z * q)
    vals = c * terms.sum(axis=(0, 1, 2))
    nterms = int(np.count_nonzero(W))
    if i == j:
        zd = etas - xi
        if deriv:
            vals += c * (-zd / (2.0 * t)) * np.exp(-zd * zd * q)
        else:
            vals += c * np.exp(-zd * zd * q)
        nterms += 1
    return vals / net.weights[i], nterms


def eval_H(net, params, t, x, y):
    """Kernel value with a certified truncation bound."""
    if t <= 0:
        raise NonPositiveTime(f"eval_H needs t > 0, got {t}")
    x = net.point(x.edge, x.xi)
    y = net.point(y.edge, y.xi)
    K, rem = _depth_from_bound(net, t, params.tol, params.k_max)
    vals, nterms = _series_values(net, t, x.edge, x.xi, y.edge, [y.xi], K)
    return KernelValue(float(vals[0]), float(rem), nterms)


def eval_dH_dy(net, params, t, x, y):
    """Series derivative in y's local coordinate; y must be edge-interior."""
    if t <= 0:
        raise NonPositiveTime(f"eval_dH_dy needs t > 0, got {t}")
    x = net.point(x.edge, x.xi)
    y = net.point(y.edge, y.xi)
    if y.xi in (0.0, 1.0):
        raise VertexPoint("derivative at a vertex is parametrization-ambiguous")
    K, rem = _depth_from_bound(net, t, params.tol, params.k_max, deriv=True)
    vals, nterms = _series_values(net, t, x.edge, x.xi, y.edge, [y.xi], K, deriv=True)
    return KernelValue(float(vals[0]), float(rem), nterms)


# ---------------------------------------------------------------------------
# mesh-sized machinery
# ---------------------------------------------------------------------------

class KernelEngine:
    """Dense kernel matrices on the standard mesh, with caching.

    Matrix orientation: M[ix, iy] = kernel(t, x=mesh[ix], y=mesh[iy]) with the
    flat edge-major mesh layout of GraphFunction.  Applications:

      P_t f           -> M.T @ (w * f)       (integrate over x)
      (dyH * u)(y)    -> D.T @ (w * u)       (D = dkernel matrix)
      (dxH * g)(y)    -> D @ (w * g)         (symmetry swaps the slots)

    Band matrices are exact time integrals over [T1, T2] against an optional
    exp(-alpha T) damping; they power the singular Volterra convolutions.
    """

    def __init__(self, net, params, n):
        self.net = net
        self.params = params
        self.n = int(n)
        self.xi = mesh_coordinates(self.n)
        self.w = quad_weights(net, self.n)
        self.size = net.n_edges * (self.n + 1)
        self._cache = {}
        self.stat_K = 0.0  # running max of sup_y ||H(t,.,y)||_L1

    # -- assembly -----------------------------------------------------------

    def _blocks(self, fill):
        m = self.net.n_edges
        npts = self.n + 1
        M = np.empty((self.size, self.size))
        out = np.empty((npts, npts))
        for i in range(m):
            scale = 1.0 / self.net.weights[i]
            for j in range(m):
                fill(out, i, j, scale)
                M[i * npts : (i + 1) * npts, j * npts : (j + 1) * npts] = out
        return M

    def _weight_block(self, stack, i, j):
        return np.ascontiguousarray(stack[:, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2])

    def kernel_matrix(self, t, deriv=False):
        key = ("dH" if deriv else "H", float(t))
        if key in self._cache:
            return self._cache[key]
        if t <= 0:
            raise NonPositiveTime(f"kernel matrix needs t > 0, got {t}")
        if self.n > 0 and 1.0 / self.n > math.sqrt(t):
            warnings.warn(
                f"mesh h=1/{self.n} does not resolve the kernel width sqrt(t)="
                f"{math.sqrt(t):.3g}; refine the mesh or increase t",
                stacklevel=2,
            )
        K, _ = _depth_from_bound(self.net, t, self.params.tol, self.params.k_max,
                                 deriv=deriv)
        stack = self.net.weight_stack(K)
        block = _accel.dgauss_block if deriv else _accel.gauss_block

        def fill(out, i, j, scale):
            block(out, self.xi, self.xi, self._weight_block(stack, i, j),
                  float(t), i == j, scale)

        M = self._blocks(fill)
        if not deriv:
            self.stat_K = max(self.stat_K, float((np.abs(M).T @ self.w).max()))
        self._cache[key] = M
        return M

    def band_depth(self, t2, alpha, tol):
        """Adaptive series depth for band integrals, from actual weights."""
        k, below = 0, 0
        while True:
            stack = self.net.weight_stack(k)
            wmax = float(np.abs(stack[k]).max())
            bound = 4.0 * wmax * _accel._fband_py(t2, float(k), alpha) / self.net.kappa0
            if bound < tol * 1e-2:
                below += 1
                if below >= 3:
                    return k
            else:
                below = 0
            k += 1
            if k > 5000:
                raise TruncationUnreachable(
                    f"band series at T={t2} needs more than 5000 layers"
                )

    def band_matrix(self, t1, t2, alpha, deriv=False):
        """Exact int_{t1}^{t2} exp(-alpha T) H(T) dT (or its y-derivative)."""
        key = ("dB" if deriv else "B", float(t1), float(t2), float(alpha))
        if key in self._cache:
            return self._cache[key]
        if alpha > 0 and alpha * t1 > 700:
            M = np.zeros((self.size, self.size))
            self._cache[key] = M
            return M
        K = self.band_depth(t2, alpha, self.params.tol)
        stack = self.net.weight_stack(K)
        block = _accel.dband_block if deriv else _accel.band_block

        def fill(out, i, j, scale):
            block(out, self.xi, self.xi, self._weight_block(stack, i, j),
                  float(t1), float(t2), float(alpha), i == j, scale)

        M = self._blocks(fill)
        self._cache[key] = M
        return M

    # -- applications ---------------------------------------------------------

    def apply_matrix(self, M, flat):
        """P_t-style application: integrate the kernel against flat over x."""
        return M.T @ (self.w * flat)

    def apply_dx(self, D, flat):
        """(dxH * g)(y) using the y-derivative matrix D via kernel symmetry."""
        return D @ (self.w * flat)

    def propagate(self, t, flat):
        """Semigroup application with splitting above t_switch."""
        if t == 0:
            return flat.copy()
        nsplit = max(1, math.ceil(t / self.params.t_switch - 1e-12))
        M = self.kernel_matrix(t / nsplit)
        out = flat
        for _ in range(nsplit):
            out = self.apply_matrix(M, out)
        return out


@lru_cache(maxsize=32)
def get_engine(net, params, n):
    return KernelEngine(net, params, n)


def apply_semigroup(net, params, t, f):
    """P_t f on f's mesh; t = 0 is the identity, large t splits the step."""
    if t < 0:
        raise NonPositiveTime(f"apply_semigroup needs t >= 0, got {t}")
    if t == 0:
        return f.copy()
    eng = get_engine(net, params, f.n_intervals)
    out = eng.propagate(t, f.flat)
    return GraphFunction(net, out.reshape(f.values.shape))


# ---------------------------------------------------------------------------
# vertex condition verification
# ---------------------------------------------------------------------------

@dataclass
class VertexConditionReport:
    jumps: np.ndarray       # per-vertex max continuity jump of H(t, x, .)
    residuals: np.ndarray   # per-vertex |sum_j kappa_j dH/dn|
    max_jump: float
    max_residual: float


def _one_sided_normal_derivative(vals, h):
    """Exterior normal derivative from 3 samples marching inward from the vertex.

    The exterior normal points out of the edge at both ends, i.e. opposite to
    the inward sampling direction, so the sign flip is the same at either end.
    The h^2 stencil errors cancel in the Kirchhoff sum (odd normal derivatives
    of H satisfy the same flux identity), so 3 points suffice.
    """
    f0, f1, f2, _ = vals
    inward = (-3 * f0 + 4 * f1 - f2) / (2 * h)
    return -inward


def verify_vertex_conditions(net, params, t, x, n=400):
    """Continuity jumps and Kirchhoff residuals of H(t, x, .) at every vertex.

    Uses the raw per-edge series (no canonicalization) so each incident edge
    is probed from its own side, with one-sided finite differences for the
    normal derivatives.
    """
    if t <= 0:
        raise NonPositiveTime(f"verify_vertex_conditions needs t > 0, got {t}")
    x = net.point(x.edge, x.xi)
    K, _ = _depth_from_bound(net, t, params.tol, params.k_max)
    h = 1.0 / n
    jumps = np.zeros(net.n_vertices)
    residuals = np.zeros(net.n_vertices)
    for v in range(net.n_vertices):
        values = []
        flux = 0.0
        for j in net.incident_edges[v]:
            u0, u1, _ = net.edges[j]
            ends = []
            if u0 == v:
                ends.append(True)
            if u1 == v:
                ends.append(False)
            for at_start in ends:
                etas = np.array([0.0, h, 2 * h, 3 * h]) if at_start else \
                    np.array([1.0, 1.0 - h, 1.0 - 2 * h, 1.0 - 3 * h])
                vals, _ = _series_values(net, t, x.edge, x.xi, j, etas, K)
                values.append(vals[0])
                flux += net.weights[j] * _one_sided_normal_derivative(vals, h)
        jumps[v] = max(values) - min(values)
        residuals[v] = abs(flux)
    return VertexConditionReport(jumps, residuals, float(jumps.max()),
                                 float(residuals.max()))
