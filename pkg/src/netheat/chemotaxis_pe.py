"""Parabolic-elliptic Keller-Segel solver (epsilon = 0).

Inside every fixed-point sweep the chemoattractant is the solution of the
network elliptic problem -c'' + alpha c = u, so alpha > 0 is required.  The
a-priori identities of the elliptic route (alpha int c = int u, uniform
W^(1,inf) bound of c in terms of the mass) are tracked per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .errors import IncompatibleMesh
from .functions import GraphFunction
from .kernel import KernelParams, get_engine
from .picard import PECoupling, make_state, run_windowed


@dataclass(frozen=True)
class PEConfig:
    alpha: float
    dt: float
    T: float
    picard_tol: float = 1e-9
    picard_max: int = 60
    window: float = 0.0
    kernel: KernelParams = field(default_factory=KernelParams)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("parabolic-elliptic model needs alpha > 0")
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.window == 0.0:
            object.__setattr__(self, "window", 10 * self.dt)
        if self.window < self.dt:
            raise ValueError("window must cover at least one step")


@dataclass
class PEResult:
    states: list
    records: list
    window_reports: list
    mass0: float
    mean_identity_max: float   # max_t |alpha int c - int u|
    w1inf_c: list              # per-step plain ||c||_W1inf time series


def init_pe(net, cfg, u0):
    """State at t = 0 with c0 from the elliptic solve of u0."""
    from .elliptic import elliptic_solve

    u0.check_finite("u0")
    if u0.values.min() < 0:
        raise IncompatibleMesh("the parabolic-elliptic theory needs u0 >= 0")
    c0 = elliptic_solve(net, cfg.alpha, u0)
    return make_state(net, 0.0, u0.copy(), c0, c0.edgewise_derivative(),
                      cfg.alpha)


def _coupling_factory(cfg):
    def make(eng, state, q):
        return PECoupling(eng, cfg.alpha, state)

    return make


def run_pe(net, cfg, u0):
    """Windowed Picard continuation; divergence here is a discretization failure."""
    state0 = init_pe(net, cfg, u0)
    states, reports = run_windowed(net, cfg, state0, _coupling_factory(cfg))
    records = []
    prev = None
    mean_dev = 0.0
    w1inf = []
    for s in states:
        records.append(diagnostics.record(net, s, cfg.alpha, prev=prev,
                                          dt=cfg.dt, epsilon=0.0))
        mean_dev = max(mean_dev, abs(cfg.alpha * s.c.integral() - s.mass))
        w1inf.append(max(float(np.abs(s.c.values).max()),
                         float(np.abs(s.grad_c.values).max())))
        prev = s
    return PEResult(states, records, reports, mass0=state0.mass,
                    mean_identity_max=mean_dev, w1inf_c=w1inf)
