"""Finite weighted metric networks and their path combinatorics.

A network is a finite connected multigraph without self-loops.  Every edge is
parametrized over [0,1]; the two orientations of edge ``j`` are the arcs
``2*j`` (first endpoint -> second endpoint) and ``2*j + 1`` (reversed).  Each
edge carries a positive weight ``kappa`` that drives how heat signals split at
the vertices: crossing from arc ``a`` into arc ``b`` at the vertex
``T(a) == I(b)`` picks up the factor

    2*kappa(edge(a)) / kappa_vertex(T(a))          (transmission, b != -a)
    2*kappa(edge(a)) / kappa_vertex(T(a)) - 1      (reflection,   b == -a)

with ``kappa_vertex(v)`` the sum of the weights of the edges incident to
``v``.  The weight of a path is the product of these factors over consecutive
arc pairs; it can be negative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    BrokenChain,
    DisconnectedGraph,
    NonPositiveWeight,
    PointNotOnPath,
    SelfLoop,
)

_VERTEX_EPS = 1e-12


class Network:
    """Immutable weighted network.

    Construct through :func:`build_network`; all derived tables (arcs,
    adjacency, transfer-coefficient matrix, path-count matrices) are built
    once and are safe for concurrent read-only use.
    """

    def __init__(self, edges, vertex_ids):
        self.vertex_ids = tuple(vertex_ids)
        self.edges = tuple((int(u), int(v), float(w)) for u, v, w in edges)
        self.n_vertices = len(self.vertex_ids)
        self.n_edges = len(self.edges)
        self.weights = np.array([w for _, _, w in self.edges])
        self.kappa0 = float(self.weights.min())
        self.kappa1 = float(self.weights.max())
        self.total_measure = float(self.weights.sum())

        # arc tables: arc 2j runs u->v, arc 2j+1 runs v->u
        m = self.n_edges
        self.arc_tail = np.empty(2 * m, dtype=np.int64)  # I(a)
        self.arc_head = np.empty(2 * m, dtype=np.int64)  # T(a)
        for j, (u, v, _) in enumerate(self.edges):
            self.arc_tail[2 * j] = u
            self.arc_head[2 * j] = v
            self.arc_tail[2 * j + 1] = v
            self.arc_head[2 * j + 1] = u

        self.incident_edges = tuple(
            tuple(j for j, (u, v, _) in enumerate(self.edges) if vi in (u, v))
            for vi in range(self.n_vertices)
        )
        self.degrees = np.array([len(e) for e in self.incident_edges])
        self.max_degree = int(self.degrees.max())
        self.kappa_vertex = np.array(
            [sum(self.weights[j] for j in inc) for inc in self.incident_edges]
        )

        # arcs leaving each vertex (one per incident edge)
        self.out_arcs = tuple(
            tuple(2 * j if self.edges[j][0] == vi else 2 * j + 1
                  for j in self.incident_edges[vi])
            for vi in range(self.n_vertices)
        )

        self._transfer = self._build_transfer_matrix()
        self._count_powers = [np.eye(2 * m, dtype=np.int64)]  # A^0
        self._weight_powers = [self._transfer.copy()]  # E^1

    # -- construction helpers -------------------------------------------------

    def _build_transfer_matrix(self):
        m = self.n_edges
        eps = np.zeros((2 * m, 2 * m))
        for a in range(2 * m):
            v = self.arc_head[a]
            base = 2.0 * self.weights[a // 2] / self.kappa_vertex[v]
            for b in self.out_arcs[v]:
                eps[a, b] = base - 1.0 if b == (a ^ 1) else base
        return eps

    # -- arc helpers ----------------------------------------------------------

    def arc(self, edge, reverse=False):
        return 2 * edge + (1 if reverse else 0)

    def arc_edge(self, a):
        return a // 2

    def arc_reverse(self, a):
        return a ^ 1

    def arc_I(self, a):
        return int(self.arc_tail[a])

    def arc_T(self, a):
        return int(self.arc_head[a])

    @property
    def transfer_matrix(self):
        """(2m, 2m) matrix of transfer/reflection coefficients."""
        return self._transfer

    @property
    def epsilon_bar(self):
        """Uniform bound 2*kappa1/kappa0 on the coefficient magnitudes."""
        return 2.0 * self.kappa1 / self.kappa0

    # -- memoized powers ------------------------------------------------------

    def count_matrix(self, r):
        """Number of arc chains of length r+1 (r coefficient steps) per arc pair."""
        adj = self._count_powers
        base = (np.abs(self._transfer) > 0).astype(np.int64)
        while len(adj) <= r:
            adj.append(adj[-1] @ base)
        return adj[r]

    def weight_stack(self, kmax):
        """Aggregated path weights E^(k+1) for k = 0..kmax, shape (kmax+1, 2m, 2m).

        Entry [k, a, b] is the sum of eps(C) over all paths of length k+2
        starting with arc a and ending with arc b.
        """
        pw = self._weight_powers
        while len(pw) <= kmax:
            pw.append(pw[-1] @ self._transfer)
        return np.array(pw[: kmax + 1])

    # -- points ---------------------------------------------------------------

    def point(self, edge, xi):
        """Canonicalized point: vertex points snap to the lowest incident edge."""
        if not 0 <= edge < self.n_edges:
            raise PointNotOnPath(f"edge index {edge} out of range")
        xi = float(xi)
        if not -_VERTEX_EPS <= xi <= 1.0 + _VERTEX_EPS:
            raise PointNotOnPath(f"coordinate {xi} outside [0, 1]")
        xi = min(max(xi, 0.0), 1.0)
        if xi <= _VERTEX_EPS or xi >= 1.0 - _VERTEX_EPS:
            xi = round(xi)
            v = self.edges[edge][0] if xi == 0.0 else self.edges[edge][1]
            j = self.incident_edges[v][0]
            u0, _, _ = self.edges[j]
            return PointOnGraph(j, 0.0 if u0 == v else 1.0)
        return PointOnGraph(edge, xi)

    def point_vertex(self, p):
        """Vertex index if p sits on a vertex, else None."""
        if p.xi == 0.0:
            return self.edges[p.edge][0]
        if p.xi == 1.0:
            return self.edges[p.edge][1]
        return None

    def point_on_edge(self, p, edge):
        """Local coordinate of p on the given edge, or None if p is not on it."""
        if p.edge == edge:
            return p.xi
        v = self.point_vertex(p)
        if v is None:
            return None
        u, w, _ = self.edges[edge]
        if v == u:
            return 0.0
        if v == w:
            return 1.0
        return None

    # -- serialization-friendly equality --------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.vertex_ids == other.vertex_ids
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.vertex_ids, self.edges))

    def __repr__(self):
        return f"Network(n={self.n_vertices}, m={self.n_edges}, |G|={self.total_measure})"


@dataclass(frozen=True)
class PointOnGraph:
    """Location on the network in local edge coordinates (canonical form)."""

    edge: int
    xi: float


@dataclass(frozen=True)
class GraphPath:
    """Oriented chain of arcs; weight is the product of transfer coefficients."""

    arcs: tuple
    weight: float

    def __len__(self):
        return len(self.arcs)

    def reverse(self, net):
        arcs = tuple(net.arc_reverse(a) for a in reversed(self.arcs))
        return GraphPath(arcs, path_weight(net, arcs))


def build_network(edges, vertex_ids=None):
    """Validate an edge list ``[(u, v, weight), ...]`` into a Network.

    ``u``/``v`` may be arbitrary hashable labels; they are mapped to indices
    in first-appearance order unless ``vertex_ids`` gives the order.
    """
    if not edges:
        raise DisconnectedGraph("a network needs at least one edge")
    if vertex_ids is None:
        seen = {}
        for u, v, _ in edges:
            for lbl in (u, v):
                if lbl not in seen:
                    seen[lbl] = len(seen)
        vertex_ids = list(seen)
    index = {lbl: i for i, lbl in enumerate(vertex_ids)}
    if len(index) != len(vertex_ids):
        raise DisconnectedGraph("duplicate vertex id")
    if len(index) < 2:
        raise SelfLoop("a network needs at least two vertices")

    resolved = []
    for u, v, w in edges:
        if u not in index or v not in index:
            raise DisconnectedGraph(f"edge ({u}, {v}) references unknown vertex")
        if u == v:
            raise SelfLoop(f"edge ({u}, {v}) is a self-loop")
        if not (w > 0) or not np.isfinite(w):
            raise NonPositiveWeight(f"edge ({u}, {v}) has weight {w}")
        resolved.append((index[u], index[v], float(w)))

    # connectivity over vertices actually present
    adj = {i: set() for i in range(len(vertex_ids))}
    for u, v, _ in resolved:
        adj[u].add(v)
        adj[v].add(u)
    stack, reached = [resolved[0][0]], {resolved[0][0]}
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in reached:
                reached.add(nb)
                stack.append(nb)
    if len(reached) != len(vertex_ids):
        raise DisconnectedGraph("graph is not connected")

    return Network(resolved, [str(lbl) for lbl in vertex_ids])


def transfer_coefficient(net, from_arc, to_arc):
    """Coefficient picked up crossing from one arc into another (0 if they do not meet)."""
    return float(net.transfer_matrix[from_arc, to_arc])


def path_weight(net, arcs):
    """Product of transfer coefficients along an arc chain."""
    arcs = tuple(arcs)
    if len(arcs) < 2:
        raise BrokenChain("a path needs at least two arcs")
    w = 1.0
    for a, b in zip(arcs, arcs[1:]):
        if net.arc_T(a) != net.arc_I(b):
            raise BrokenChain(f"arcs {a} -> {b} do not meet")
        w *= net.transfer_matrix[a, b]
    return float(w)


def make_path(net, arcs):
    return GraphPath(tuple(arcs), path_weight(net, arcs))


def enumerate_paths(net, x, y, k):
    """All arc chains of length k whose first arc carries x and last arc carries y.

    Depth-first over the arc adjacency with memoized chain counts for pruning.
    Cardinality is bounded by 2 * max_degree**(k-1).
    """
    if k < 2:
        raise BrokenChain("paths have length >= 2")
    x = net.point(x.edge, x.xi) if isinstance(x, PointOnGraph) else net.point(*x)
    y = net.point(y.edge, y.xi) if isinstance(y, PointOnGraph) else net.point(*y)
    starts = (2 * x.edge, 2 * x.edge + 1)
    targets = (2 * y.edge, 2 * y.edge + 1)
    counts = net.count_matrix(k - 1)
    out = []

    def extend(chain):
        rem = k - len(chain)
        if rem == 0:
            if chain[-1] in targets:
                out.append(make_path(net, chain))
            return
        reach = net.count_matrix(rem - 1)
        for b in net.out_arcs[net.arc_T(chain[-1])]:
            if reach[b, targets[0]] or reach[b, targets[1]]:
                chain.append(b)
                extend(chain)
                chain.pop()

    for a in starts:
        if counts[a, targets[0]] or counts[a, targets[1]]:
            extend([a])
    return out


def path_distance(x, y, path):
    """Distance from x to y along the path: d(x, T(a1)) + d(y, I(ak)) + |C| - 2."""
    arcs = path.arcs if isinstance(path, GraphPath) else tuple(path)
    if x.edge != arcs[0] // 2:
        raise PointNotOnPath("x is not on the first arc of the path")
    if y.edge != arcs[-1] // 2:
        raise PointNotOnPath("y is not on the last arc of the path")
    # arc 2j heads to local coordinate 1, arc 2j+1 heads to coordinate 0
    dx = 1.0 - x.xi if arcs[0] % 2 == 0 else x.xi
    dy = y.xi if arcs[-1] % 2 == 0 else 1.0 - y.xi
    return dx + dy + len(arcs) - 2


def geodesic_data(net, x, y):
    """(L, rho): minimal path length joining x and y, and rho = L - 2."""
    x = net.point(x.edge, x.xi)
    y = net.point(y.edge, y.xi)
    starts = (2 * x.edge, 2 * x.edge + 1)
    targets = (2 * y.edge, 2 * y.edge + 1)
    for k in range(2, 4 * net.n_edges + 5):
        counts = net.count_matrix(k - 1)
        if any(counts[a, b] for a, b in itertools.product(starts, targets)):
            return k, k - 2
    raise DisconnectedGraph("no path found; network invariant violated")
