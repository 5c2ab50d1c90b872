"""Monitored functionals shared by both chemotaxis solvers.

All integrals use the kappa-weighted trapezoid measure of the mesh.  The
sup norm is reported in two flavors: the plain pointwise sup and the
kappa-weighted per-edge variant max_j kappa_j * sup |u_j| (the latter is the
convention some of the a-priori estimates are stated in; the two differ by
weight factors only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeDensity
from .functions import GraphFunction

_ENTROPY_FLOOR = 1e-300


def weighted_integral(net, f):
    """sum_j kappa_j * trapezoid(f_j) over the unit-length edges."""
    if isinstance(f, GraphFunction):
        return f.integral()
    return GraphFunction(net, f).integral()


def lp_norm(net, f, p):
    if p == np.inf:
        return float(np.abs(f.values).max())
    absp = GraphFunction(net, np.abs(f.values) ** p)
    return float(absp.integral() ** (1.0 / p))


def weighted_sup(net, f):
    """max_j kappa_j * sup |f_j| (weighted L-infinity convention)."""
    return float((net.weights * np.abs(f.values).max(axis=1)).max())


def entropy(net, u):
    """int u log u with the continuous extension 0 log 0 = 0."""
    vals = u.values
    if vals.min() < -1e-8:
        raise NegativeDensity(f"entropy of a density with min {vals.min():.3e}")
    clipped = np.maximum(vals, 0.0)
    integrand = np.where(clipped > _ENTROPY_FLOOR,
                         clipped * np.log(np.maximum(clipped, _ENTROPY_FLOOR)), 0.0)
    return GraphFunction(net, integrand).integral()


def free_energy(net, u, c, grad_c, alpha):
    """E = int u log u - int u c + 1/2 int |dc|^2 + alpha/2 int c^2."""
    e = entropy(net, u)
    e -= GraphFunction(net, u.values * c.values).integral()
    e += 0.5 * GraphFunction(net, grad_c.values ** 2).integral()
    e += 0.5 * alpha * GraphFunction(net, c.values ** 2).integral()
    return float(e)


def dissipation(net, u, c, grad_c, dt_c_prev=None, epsilon=0.0):
    """Discrete dissipation functional int u |d(log u - c)|^2 + eps int (dc/dt)^2.

    The first integrand is formed as (du - u*dc)^2 / u with a relative floor,
    which is the stable rewriting of u*(d log u - dc)^2 near u = 0.
    """
    du = u.edgewise_derivative().values
    uv = np.maximum(u.values, 0.0)
    floor = 1e-12 * max(uv.max(), 1.0)
    num = (du - u.values * grad_c.values) ** 2
    integrand = np.where(uv > floor, num / np.maximum(uv, floor), 0.0)
    d = GraphFunction(net, integrand).integral()
    if epsilon > 0.0 and dt_c_prev is not None:
        d += epsilon * GraphFunction(net, dt_c_prev.values ** 2).integral()
    return float(d)


def dissipation_residual(net, state_prev, state_next, dt, epsilon=0.0):
    """(E_next - E_prev)/dt + D_next; O(dt + h^2) for smooth states."""
    dtc = GraphFunction(net, (state_next.c.values - state_prev.c.values) / dt)
    d_next = dissipation(net, state_next.u, state_next.c, state_next.grad_c,
                         dt_c_prev=dtc, epsilon=epsilon)
    return (state_next.energy - state_prev.energy) / dt + d_next


@dataclass
class DiagnosticsRecord:
    t: float
    mass_u: float
    mass_c: float
    lp_norms_u: dict = field(default_factory=dict)
    sup_u_weighted: float = 0.0
    energy: float = 0.0
    energy_dissipation_residual: float = float("nan")
    min_u: float = 0.0
    min_c: float = 0.0
    sup_grad_c: float = 0.0

    FIELDS = ("t", "mass_u", "mass_c", "l1_u", "l2_u", "l4_u", "l8_u",
              "linf_u", "sup_u_weighted", "energy",
              "energy_dissipation_residual", "min_u", "min_c", "sup_grad_c")

    def row(self):
        return [self.t, self.mass_u, self.mass_c,
                self.lp_norms_u[1], self.lp_norms_u[2], self.lp_norms_u[4],
                self.lp_norms_u[8], self.lp_norms_u[np.inf],
                self.sup_u_weighted, self.energy,
                self.energy_dissipation_residual, self.min_u, self.min_c,
                self.sup_grad_c]


def record(net, state, alpha, prev=None, dt=None, epsilon=0.0):
    """DiagnosticsRecord for one solver state."""
    rec = DiagnosticsRecord(
        t=state.t,
        mass_u=state.u.integral(),
        mass_c=state.c.integral(),
        lp_norms_u={p: lp_norm(net, state.u, p) for p in (1, 2, 4, 8, np.inf)},
        sup_u_weighted=weighted_sup(net, state.u),
        energy=state.energy,
        min_u=float(state.u.values.min()),
        min_c=float(state.c.values.min()),
        sup_grad_c=float(np.abs(state.grad_c.values).max()),
    )
    if prev is not None and dt:
        rec.energy_dissipation_residual = dissipation_residual(
            net, prev, state, dt, epsilon=epsilon)
    return rec
