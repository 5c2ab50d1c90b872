"""Windowed Picard iteration on the chemotaxis integral equations.

The cell density obeys

    u(t) = H(t) * u0 + int_0^t (dxH(t-s) * (u(s) dx c(s))) ds

on each window, restarted from the window-start state (exact at the
continuous level by the semigroup property).  The weakly singular memory
kernel is treated by product integration: the smooth factor u*dxc is held at
sub-interval midpoints (trapezoid average of the endpoint samples) while the
kernel factor is integrated exactly in time, per series term, through the
closed forms in _accel.  The iteration is the method of successive
approximations; failure to contract signals that the window is too long and
the caller halves it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .errors import PicardDiverged
from .functions import GraphFunction
from .kernel import get_engine

_DAMP_FLOOR = 1e-280


@dataclass
class SimState:
    t: float
    u: GraphFunction
    c: GraphFunction
    grad_c: GraphFunction
    mass: float
    energy: float


@dataclass
class WindowReport:
    t_start: float
    n_steps: int
    sweeps: int
    increments: list = field(default_factory=list)
    ratios: list = field(default_factory=list)


def make_state(net, t, u, c, grad_c, alpha):
    mass = u.integral()
    energy = diagnostics.free_energy(net, u, c, grad_c, alpha)
    return SimState(t, u, c, grad_c, mass, energy)


class _WindowSolver:
    """One time window of the fixed-point map, for either coupling model."""

    def __init__(self, eng, dt, picard_tol, picard_max):
        self.eng = eng
        self.dt = dt
        self.picard_tol = picard_tol
        self.picard_max = picard_max
        # vertex slot groups for reconciliation of computed states
        net, n = eng.net, eng.n
        self._slots = []
        for v in range(net.n_vertices):
            idx = []
            for j in net.incident_edges[v]:
                u0, u1, _ = net.edges[j]
                if u0 == v:
                    idx.append(j * (n + 1))
                if u1 == v:
                    idx.append(j * (n + 1) + n)
            self._slots.append(np.array(idx))

    def reconcile(self, flat):
        for idx in self._slots:
            flat[idx] = flat[idx].mean()
        return flat

    def du_band(self, r):
        return self.eng.band_matrix(r * self.dt, (r + 1) * self.dt, 0.0, deriv=True)

    def run(self, state0, q_steps, c_model):
        """Iterate u -> Psi(u) on q_steps of dt; returns (list of SimState, report)."""
        eng, dt = self.eng, self.dt
        w = eng.w
        u0 = state0.u.flat.copy()
        heat = [None]
        for p in range(1, q_steps + 1):
            heat.append(self.reconcile(eng.propagate(p * dt, u0)))
        bands = [self.du_band(r) for r in range(q_steps)]

        u_list = [u0] + [heat[p].copy() for p in range(1, q_steps + 1)]
        scale = max(1.0, np.abs(u0).max())
        report = WindowReport(t_start=state0.t, n_steps=q_steps, sweeps=0)

        for sweep in range(self.picard_max):
            c_list, g_list = c_model(u_list)
            phi = [u_list[q] * g_list[q] for q in range(q_steps + 1)]
            phim = [w * 0.5 * (phi[q] + phi[q + 1]) for q in range(q_steps)]
            delta = 0.0
            new_list = [u0]
            for p in range(1, q_steps + 1):
                acc = heat[p].copy()
                for q in range(p):
                    acc += bands[p - 1 - q] @ phim[q]
                self.reconcile(acc)
                delta = max(delta, float(np.abs(acc - u_list[p]).max()))
                new_list.append(acc)
            u_list = new_list
            report.sweeps = sweep + 1
            report.increments.append(delta)
            if len(report.increments) >= 2 and report.increments[-2] > 0:
                report.ratios.append(delta / report.increments[-2])
            if not math.isfinite(delta) or delta > 1e8 * scale:
                raise PicardDiverged(
                    f"fixed-point sweep blew up on [{state0.t}, "
                    f"{state0.t + q_steps * dt}]",
                    window=q_steps * dt, increments=report.increments)
            if delta <= self.picard_tol * (1.0 + scale):
                break
        else:
            raise PicardDiverged(
                f"no contraction after {self.picard_max} sweeps on "
                f"[{state0.t}, {state0.t + q_steps * dt}]",
                window=q_steps * dt, increments=report.increments)

        c_list, g_list = c_model(u_list)
        states = []
        shape = state0.u.values.shape
        net = eng.net
        for p in range(1, q_steps + 1):
            u = GraphFunction(net, u_list[p].reshape(shape).copy())
            c = GraphFunction(net, c_list[p].reshape(shape).copy())
            g = GraphFunction(net, g_list[p].reshape(shape).copy())
            states.append(make_state(net, state0.t + p * dt, u, c, g,
                                     c_model.alpha))
        return states, report


class PPCoupling:
    """Chemoattractant from the damped heat memory integral (epsilon > 0)."""

    def __init__(self, eng, dt, epsilon, alpha, state0, q_max):
        self.eng = eng
        self.dt = dt
        self.epsilon = epsilon
        self.alpha = alpha
        self.q_max = q_max
        self.dte = dt / epsilon
        self.c0 = state0.c.flat.copy()
        self.g0 = state0.grad_c.flat.copy()
        self._bands_c = [self._band(r, deriv=False) for r in range(q_max)]
        self._bands_g = [self._band(r, deriv=True) for r in range(q_max)]
        self._prop_c, self._prop_g = self._propagate_initial(q_max)

    def _band(self, r, deriv):
        return self.eng.band_matrix(r * self.dte, (r + 1) * self.dte,
                                    self.alpha, deriv=deriv)

    def _propagate_initial(self, q_max):
        """Damped semigroup applied to c0 (and its derivative route), by step."""
        eng = self.eng
        chunk = min(self.dte, eng.params.t_switch)
        dmat = eng.kernel_matrix(chunk, deriv=True)
        prop_c, prop_g = [self.c0], [self.g0]
        raw = self.c0
        for q in range(1, q_max + 1):
            damp = math.exp(-self.alpha * q * self.dte)
            if damp < _DAMP_FLOOR:
                prop_c.append(np.zeros_like(raw))
                prop_g.append(np.zeros_like(raw))
                continue
            pre = eng.propagate(self.dte - chunk, raw) if self.dte > chunk else raw
            grad = dmat.T @ (eng.w * pre)
            raw = eng.propagate(self.dte, raw)
            prop_c.append(damp * raw)
            prop_g.append(damp * grad)
        return prop_c, prop_g

    def __call__(self, u_list):
        eng, w = self.eng, self.eng.w
        q_steps = len(u_list) - 1
        umid = [w * 0.5 * (u_list[q] + u_list[q + 1]) for q in range(q_steps)]
        c_list = [self.c0]
        g_list = [self.g0]
        for q in range(1, q_steps + 1):
            c = self._prop_c[q].copy()
            g = self._prop_g[q].copy()
            for r in range(q):
                c += self._bands_c[q - 1 - r].T @ umid[r]
                g += self._bands_g[q - 1 - r].T @ umid[r]
            c_list.append(c)
            g_list.append(g)
        return c_list, g_list


class PECoupling:
    """Chemoattractant from the elliptic resolvent at every step (epsilon = 0)."""

    def __init__(self, eng, alpha, state0):
        from .elliptic import get_elliptic_system

        self.eng = eng
        self.alpha = alpha
        self.system = get_elliptic_system(eng.net, alpha, eng.n)
        self.c0 = state0.c.flat.copy()
        self.g0 = state0.grad_c.flat.copy()
        self.shape = state0.u.values.shape

    def _solve(self, u_flat):
        c2d = self.system.solve(u_flat.reshape(self.shape))
        g2d = GraphFunction(self.eng.net, c2d).edgewise_derivative().values
        return c2d.reshape(-1), g2d.reshape(-1)

    def __call__(self, u_list):
        c_list = [self.c0]
        g_list = [self.g0]
        for q in range(1, len(u_list)):
            c, g = self._solve(u_list[q])
            c_list.append(c)
            g_list.append(g)
        return c_list, g_list


def run_windowed(net, cfg, state0, make_coupling):
    """March windows of the fixed-point map to cfg.T, halving on divergence.

    Returns (states from t=0 to T on the dt grid, list of WindowReport).
    """
    eng = get_engine(net, cfg.kernel, state0.u.n_intervals)
    solver = _WindowSolver(eng, cfg.dt, cfg.picard_tol, cfg.picard_max)
    total = int(round(cfg.T / cfg.dt))
    if abs(total * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ValueError("T must be a multiple of dt")
    q_window = max(1, int(round(cfg.window / cfg.dt)))
    states = [state0]
    reports = []
    done = 0
    while done < total:
        q = min(q_window, total - done)
        coupling = make_coupling(eng, states[-1], q)
        try:
            new_states, rep = solver.run(states[-1], q, coupling)
        except PicardDiverged:
            if q_window == 1:
                raise
            q_window = max(1, q_window // 2)
            continue
        states.extend(new_states)
        reports.append(rep)
        done += q
    return states, reports
