"""Command-line surface: kernel tabulation, simulation runs, verification suites.

Exit codes: 0 success, 1 input error, 2 numerical error, 3 verification
failure.  Output files are byte-deterministic for fixed inputs: floats are
serialized as shortest round-trip decimals and JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .chemotaxis_pe import PEConfig, run_pe
from .chemotaxis_pp import PPConfig, run_pp
from .diagnostics import DiagnosticsRecord
from .errors import InputError, NetheatError, NumericalError
from .functions import GraphFunction, mesh_coordinates
from .io import format_float, load_network_file
from .kernel import KernelParams, eval_H
from .verification import run_suite


def _configure_threads():
    workers = os.environ.get("NETHEAT_NUM_THREADS")
    if workers:
        try:
            import numba

            numba.set_num_threads(max(1, int(workers)))
        except (ImportError, ValueError):
            pass


def _write_lines(path, lines):
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_kernel(args):
    spec = load_network_file(args.netfile)
    net = spec.net
    if args.t <= 0:
        raise InputError("kernel tabulation needs t > 0 (t = 0 is the identity)")
    params = KernelParams(tol=args.tol)
    rows = ["t,edge_x,xi,edge_y,eta,H,err_bound"]

    def emit(ex, xi, ey, eta):
        kv = eval_H(net, params, args.t, net.point(ex, xi), net.point(ey, eta))
        rows.append(",".join([format_float(args.t), str(ex), format_float(xi),
                              str(ey), format_float(eta),
                              format_float(kv.value),
                              format_float(kv.truncation_error_bound)]))

    if args.x is not None and args.y is not None:
        ex, xi = args.x
        ey, eta = args.y
        emit(int(ex), xi, int(ey), eta)
    else:
        grid = mesh_coordinates(args.mesh)
        for ex in range(net.n_edges):
            for ey in range(net.n_edges):
                for xi in grid:
                    for eta in grid:
                        emit(ex, float(xi), ey, float(eta))
    _write_lines(args.out, rows)
    return 0


def _point_arg(text):
    try:
        edge, xi = text.split(",")
        return int(edge), float(xi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'edge,xi' (e.g. '0,0.5'), got {text!r}") from None


def _trajectory_rows(states, stride):
    rows = ["t,edge,xi,u,c"]
    for s in states[::stride]:
        n = s.u.n_intervals
        xis = mesh_coordinates(n)
        for j in range(s.u.values.shape[0]):
            for l, xi in enumerate(xis):
                rows.append(",".join([format_float(s.t), str(j),
                                      format_float(xi),
                                      format_float(s.u.values[j, l]),
                                      format_float(s.c.values[j, l])]))
    return rows


def _diagnostics_rows(records, stride):
    rows = [",".join(DiagnosticsRecord.FIELDS)]
    for rec in records[::stride]:
        rows.append(",".join(format_float(v) for v in rec.row()))
    return rows


def _summary(result, cfg, model):
    states = result.states
    masses = [s.mass for s in states]
    energies = [s.energy for s in states]
    drift = max(abs(m - result.mass0) for m in masses) / max(abs(result.mass0),
                                                             1e-300)
    rise = float(max(np.diff(energies).max(), 0.0)) if len(energies) > 1 else 0.0
    slack = 1e-6 * (1 + abs(energies[0]))
    min_u = min(float(s.u.values.min()) for s in states)
    min_c = min(float(s.c.values.min()) for s in states)
    checks = {
        "mass_conservation": {"measured": drift, "tolerance": 1e-6,
                              "passed": drift <= 1e-6},
        "positivity_u": {"measured": min_u, "tolerance": -1e-8,
                         "passed": min_u >= -1e-8},
        "positivity_c": {"measured": min_c, "tolerance": -1e-8,
                         "passed": min_c >= -1e-8},
        "energy_nonincreasing": {"measured": rise, "tolerance": slack,
                                 "passed": rise <= slack},
    }
    if model == "pe":
        dev = result.mean_identity_max
        checks["resolvent_mean_identity"] = {
            "measured": dev, "tolerance": 1e-9 * abs(result.mass0),
            "passed": dev <= 1e-9 * abs(result.mass0)}
    summary = {
        "model": model,
        "T": cfg.T,
        "dt": cfg.dt,
        "alpha": cfg.alpha,
        "epsilon": getattr(cfg, "epsilon", 0.0),
        "steps": len(states) - 1,
        "windows": [r.n_steps for r in result.window_reports],
        "picard_sweeps": [r.sweeps for r in result.window_reports],
        "mass0": result.mass0,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks.values()),
    }
    return summary


def cmd_simulate(args):
    spec = load_network_file(args.netfile)
    net = spec.net
    if args.mesh:
        spec.n_mesh = args.mesh
    u0 = spec.initial_u()
    if u0 is None:
        raise InputError("the network file has no [initial.u] section")
    kernel = KernelParams(tol=args.kernel_tol)
    if args.model == "pp":
        if not args.epsilon > 0:
            raise InputError("model pp needs --epsilon > 0")
        cfg = PPConfig(epsilon=args.epsilon, alpha=args.alpha, dt=args.dt,
                       T=args.T, picard_tol=args.tol,
                       window=args.window or 0.0, kernel=kernel)
        c0 = spec.initial_c() or GraphFunction.constant(net, spec.n_mesh, 0.0)
        result = run_pp(net, cfg, u0, c0)
    else:
        if not args.alpha > 0:
            raise InputError("model pe needs --alpha > 0")
        cfg = PEConfig(alpha=args.alpha, dt=args.dt, T=args.T,
                       picard_tol=args.tol, window=args.window or 0.0,
                       kernel=kernel)
        result = run_pe(net, cfg, u0)

    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    stride = max(1, args.snapshot_stride)
    _write_lines(os.path.join(outdir, "trajectory.csv"),
                 _trajectory_rows(result.states, stride))
    _write_lines(os.path.join(outdir, "diagnostics.csv"),
                 _diagnostics_rows(result.records, stride))
    summary = _summary(result, cfg, args.model)
    with open(os.path.join(outdir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, chk in summary["checks"].items():
        status = "PASS" if chk["passed"] else "FAIL"
        print(f"{status} {name}: {chk['measured']:.6g} vs {chk['tolerance']:.6g}")
    return 0


def cmd_verify(args):
    spec = load_network_file(args.netfile)
    checks = run_suite(spec.net, args.suite, n_mesh=min(spec.n_mesh, 200))
    payload = {
        "suite": args.suite,
        "checks": [{"name": c.name, "passed": bool(c.passed),
                    "measured": float(c.measured),
                    "tolerance": float(c.tolerance),
                    "note": c.note} for c in checks],
        "all_passed": bool(all(c.passed for c in checks)),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for c in checks:
        print(c.line())
    return 0 if payload["all_passed"] else 3


def build_parser():
    ap = argparse.ArgumentParser(
        prog="netheat",
        description="Heat kernels and Keller-Segel chemotaxis on metric graphs")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="tabulate H(t, x, y) as CSV")
    k.add_argument("netfile")
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--x", type=_point_arg, help="edge,xi of x")
    k.add_argument("--y", type=_point_arg, help="edge,eta of y")
    k.add_argument("--mesh", type=int, default=10,
                   help="tabulate on a (mesh+1)^2 grid per edge pair")
    k.add_argument("--tol", type=float, default=1e-10)
    k.add_argument("--out", default=None)
    k.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("simulate", help="run a chemotaxis simulation")
    s.add_argument("netfile")
    s.add_argument("--model", choices=("pp", "pe"), required=True)
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-9,
                   help="Picard fixed-point tolerance")
    s.add_argument("--kernel-tol", type=float, default=1e-10)
    s.add_argument("--window", type=float, default=None)
    s.add_argument("--mesh", type=int, default=None)
    s.add_argument("--snapshot-stride", type=int, default=1)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_simulate)

    v = sub.add_parser("verify", help="run property verification suites")
    v.add_argument("netfile")
    v.add_argument("--suite", choices=("kernel", "pp", "pe", "all"),
                   default="all")
    v.add_argument("--out", default=None)
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None):
    _configure_threads()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except NetheatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
