"""Mesh-sampled functions on a network and the weighted quadrature they share.

A GraphFunction stores one uniform sample array per edge, shape (m, n+1) with
n intervals per edge.  Vertex samples are duplicated across incident edges;
continuity is a property of the data, not of the type (initial cell densities
are allowed to jump at vertices).
"""

from __future__ import annotations

import numpy as np

from .errors import IncompatibleMesh, NonFiniteData


class GraphFunction:
    __slots__ = ("net", "values")

    def __init__(self, net, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != net.n_edges or values.shape[1] < 2:
            raise IncompatibleMesh(
                f"expected shape ({net.n_edges}, n+1), got {values.shape}"
            )
        self.net = net
        self.values = values

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, net, n, value):
        return cls(net, np.full((net.n_edges, n + 1), float(value)))

    @classmethod
    def from_callable(cls, net, n, fn):
        """Sample fn(edge_index, xi_array) on every edge."""
        xi = np.linspace(0.0, 1.0, n + 1)
        vals = np.array([np.broadcast_to(fn(j, xi), xi.shape) for j in range(net.n_edges)],
                        dtype=float)
        return cls(net, vals)

    # -- basic queries ---------------------------------------------------------

    @property
    def n_intervals(self):
        return self.values.shape[1] - 1

    @property
    def h(self):
        return 1.0 / self.n_intervals

    @property
    def flat(self):
        """Edge-major flat view of the samples, length m*(n+1)."""
        return self.values.reshape(-1)

    def copy(self):
        return GraphFunction(self.net, self.values.copy())

    def check_finite(self, what="data"):
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteData(f"{what} contains non-finite values")
        return self

    def __add__(self, other):
        o = other.values if isinstance(other, GraphFunction) else other
        return GraphFunction(self.net, self.values + o)

    def __sub__(self, other):
        o = other.values if isinstance(other, GraphFunction) else other
        return GraphFunction(self.net, self.values - o)

    def __mul__(self, other):
        o = other.values if isinstance(other, GraphFunction) else other
        return GraphFunction(self.net, self.values * o)

    __rmul__ = __mul__

    # -- vertex handling --------------------------------------------------------

    def _vertex_slots(self, v):
        """(edge, column) pairs holding the sample at vertex v."""
        slots = []
        for j in self.net.incident_edges[v]:
            u, w, _ = self.net.edges[j]
            if u == v:
                slots.append((j, 0))
            if w == v:
                slots.append((j, self.n_intervals))
        return slots

    def vertex_gap(self):
        """Maximum spread of duplicated samples over all vertices."""
        gap = 0.0
        for v in range(self.net.n_vertices):
            vals = [self.values[j, c] for j, c in self._vertex_slots(v)]
            gap = max(gap, max(vals) - min(vals))
        return gap

    def reconcile_vertices(self):
        """Average duplicated vertex samples in place (returns self)."""
        for v in range(self.net.n_vertices):
            slots = self._vertex_slots(v)
            mean = np.mean([self.values[j, c] for j, c in slots])
            for j, c in slots:
                self.values[j, c] = mean
        return self

    # -- calculus ----------------------------------------------------------------

    def edgewise_derivative(self):
        """Second-order derivative samples per edge (one-sided at edge ends).

        The result is edge-wise data: its vertex samples are one-sided limits
        and generally disagree across edges.
        """
        v = self.values
        h = self.h
        d = np.empty_like(v)
        d[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
        d[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * h)
        d[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * h)
        return GraphFunction(self.net, d)

    def integral(self):
        """Weighted integral: sum_j kappa_j * trapezoid over the edge."""
        v = self.values
        per_edge = self.h * (v[:, 1:-1].sum(axis=1) + 0.5 * (v[:, 0] + v[:, -1]))
        return float(np.dot(self.net.weights, per_edge))


def quad_weights(net, n):
    """Flat trapezoid quadrature weights matching GraphFunction.flat layout."""
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    return (net.weights[:, None] * (w / n)[None, :]).reshape(-1)


def mesh_coordinates(n):
    return np.linspace(0.0, 1.0, n + 1)
