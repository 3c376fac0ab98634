"""Command-line interface.

Exit codes: 0 success, 2 parse or parameter error, 3 resource cap,
4 backend cannot handle the circuit, 1 anything else.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import bounds, circuit_file, cutting, sim_fock, sim_superpos
from .errors import CircuitParseError, EmptyProjectionError, ExpEnergyError, IncompatibleBackendError
from .errors import InadmissibleParameterError, ResourceLimitError
from .kerr import RationalKerr, convergents, decompose_kerr, diophantine_approx, hurwitz_holds, one_norm

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_RESOURCE = 3
EXIT_BACKEND = 4


# ------------------------------------------------------------- output


def _text_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, float):
        return circuit_file.format_real(v)
    if isinstance(v, complex):
        return circuit_file.format_complex(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_text_value(x) for x in v)
    return str(v)


def _json_value(v):
    if isinstance(v, complex):
        return circuit_file.format_complex(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def emit(records: Sequence[dict], fmt: str, out=None) -> None:
    """Write records as JSON lines, CSV or ``key=value`` text."""
    out = sys.stdout if out is None else out
    if fmt == "json":
        for rec in records:
            out.write(json.dumps({k: _json_value(v) for k, v in rec.items()}) + "\n")
    elif fmt == "csv":
        keys: list = []
        for rec in records:
            keys += [k for k in rec if k not in keys]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: _text_value(v) for k, v in rec.items()})
        out.write(buf.getvalue())
    else:
        for rec in records:
            out.write(" ".join(f"{k}={_text_value(v)}" for k, v in rec.items()) + "\n")


# ------------------------------------------------------------ parsing


def parse_alphas(text: str) -> list[complex]:
    try:
        return [circuit_file.parse_complex(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise CircuitParseError(f"--alphas: {e}") from e


def parse_grid(text: str) -> list[list[complex]]:
    """``R:N`` is an ``N x N`` grid over ``[-R, R]^2`` for the first mode."""
    try:
        R, N = text.split(":")
        R, N = float(R), int(N)
    except ValueError as e:
        raise CircuitParseError(f"--grid: expected R:N, got {text!r}") from e
    if not (R > 0 and N >= 1):
        raise CircuitParseError("--grid: need R > 0 and N >= 1")
    xs = np.linspace(-R, R, N) if N > 1 else np.zeros(1)
    return [[complex(x, y)] for y in xs for x in xs]


def _points(args, m: int, full: bool = False) -> list[list[complex]]:
    if getattr(args, "grid", None):
        if full and m != 1:
            raise InadmissibleParameterError("--grid covers one mode; full-mode estimates need --alphas")
        return parse_grid(args.grid)
    pts = parse_alphas(args.alphas) if args.alphas else [0j] * m
    if full and len(pts) != m:
        raise InadmissibleParameterError(f"need {m} amplitudes, got {len(pts)}")
    if not 1 <= len(pts) <= m:
        raise InadmissibleParameterError(f"need between 1 and {m} amplitudes, got {len(pts)}")
    return [pts]


# ------------------------------------------------------------ commands


def cmd_bounds(args) -> list[dict]:
    circ = circuit_file.load(args.circuit)
    env = circ.envelope()
    cert = bounds.circuit_exp_energy_bound(env)
    ts = bounds.t_schedule(env.r_max, env.L)
    s = cert.t if args.s is None else args.s
    if not 1 < s <= cert.t:
        raise InadmissibleParameterError(f"--s must lie in (1, t_L = {cert.t}], got {s}")
    # <s^N> <= <t^N>^(ln s/ln t) for s <= t, so the t-exponent carries over
    E = cert.tight_exponent
    nbar = bounds.energy_bound(env)
    vacuum = env.alpha_max == 0 and env.r_max == 0
    return [{
        "m": env.m,
        "L": env.L,
        "alpha_max": env.alpha_max,
        "r_max": env.r_max,
        "t_schedule_tail": ts[-min(3, len(ts)):],
        "t_L": cert.t,
        "s": s,
        "exp_energy_log_bound": cert.log_bound,
        "exp_energy_bound": cert.bound,
        "exp_energy_exponent": E,
        "energy_bound": nbar,
        "eps": args.eps,
        "exp_energy_cutoff": 0 if vacuum else bounds.exp_energy_cutoff(E, s, args.eps),
        "energy_cutoff": 0 if vacuum else bounds.energy_cutoff(nbar, args.eps),
    }]


def cmd_decompose(args) -> list[dict]:
    records = []
    if args.x is not None:
        if args.p is not None or args.q is not None:
            raise InadmissibleParameterError("give either --x or --p/--q")
        p, q = diophantine_approx(args.x, args.qmax)
        err = abs(args.x - p / q)
        records.append({"x": args.x, "qmax": args.qmax, "p": p, "q": q, "abs_error": err,
                        "hurwitz_limit": 1 / (math.sqrt(5) * q * q), "hurwitz": hurwitz_holds(args.x, p, q),
                        "convergents": [f"{a}/{b}" for a, b in convergents(args.x) if b <= args.qmax]})
    else:
        if args.p is None or args.q is None:
            raise InadmissibleParameterError("decompose needs --p and --q, or --x with --qmax")
        p, q = args.p, args.q
    gate = RationalKerr(p, q, args.kind, (0,) if args.kind == "self" else (0, 1))
    d = decompose_kerr(gate.p, gate.q, args.kind, gate.modes)
    for j, (c, ang) in enumerate(d.branches):
        records.append({"branch": j, "coefficient": c, "angles": list(ang)})
    records.append({"kind": args.kind, "p": gate.p, "q": gate.q, "branches": len(d), "one_norm": one_norm(d)})
    return records


def _fock_run(circ, args):
    if args.cutoff is not None:
        return sim_fock.simulate(circ, args.cutoff)
    k = sim_fock.certified_cutoff(circ, args.eps)
    return sim_fock.simulate(circ, k, sim_fock.prefix_certificates(circ))


def _superpos_run(circ, args):
    rc = sim_superpos.RationalizedCircuit(circ)
    if not circ.is_rational:
        if args.rationalize is None:
            raise IncompatibleBackendError("superposition backend needs rational Kerr parameters; pass --rationalize DELTA")
        rc = sim_superpos.rationalize(circ, args.rationalize)
    sup = sim_superpos.simulate(rc, term_cap=args.term_cap)
    return rc, sup


def _simulate_records(circ, args, backend: str) -> list[dict]:
    pts = _points(args, circ.m)
    t0 = time.perf_counter()
    if backend == "fock":
        res = _fock_run(circ, args)
        dens = sim_fock.heterodyne_density(res.state, pts)
        trace = res.total_error_bound
        size = {"cutoff": res.cutoff}
    else:
        rc, sup = _superpos_run(circ, args)
        dens = sim_superpos.density(sup, pts)
        trace = min(1.0, rc.total_error_bound)
        size = {"terms": len(sup), "q": [r[3] for r in rc.replacements]}
    wall = time.perf_counter() - t0
    return [{"alpha": list(pt), "probability": float(p), "error_bound": trace, "backend": backend, **size,
             "wall_time": wall} for pt, p in zip(pts, dens)]


def cmd_simulate(args) -> list[dict]:
    return _simulate_records(circuit_file.load(args.circuit), args, args.backend)


def cmd_compare(args) -> list[dict]:
    circ = circuit_file.load(args.circuit)
    fock = _simulate_records(circ, args, "fock")
    sup = _simulate_records(circ, args, "superpos")
    out = []
    for a, b in zip(fock, sup):
        diff = abs(a["probability"] - b["probability"])
        bound = a["error_bound"] + b["error_bound"]
        out.append({"alpha": a["alpha"], "p_fock": a["probability"], "p_superpos": b["probability"],
                    "abs_diff": diff, "bound": bound, "consistent": diff <= bound + 1e-8,
                    "cutoff": a["cutoff"], "terms": b["terms"]})
    return out


def cmd_estimate(args) -> list[dict]:
    circ = circuit_file.load(args.circuit)
    rc = sim_superpos.RationalizedCircuit(circ)
    if not circ.is_rational:
        if args.rationalize is None:
            raise IncompatibleBackendError("cutting needs rational Kerr parameters; pass --rationalize DELTA")
        rc = sim_superpos.rationalize(circ, args.rationalize)
    pts = _points(args, circ.m, full=True)
    plan = cutting.make_plan(rc, args.eps, args.delta, seed=args.seed)
    records = []
    for pt in pts:
        t0 = time.perf_counter()
        est, half = cutting.estimate(plan, pt)
        N = 1 if plan.is_exact else plan.N
        records.append({"alpha": list(pt), "estimate": est, "half_width": half, "N": N,
                        "one_norm": plan.one_norm_total, "seed": plan.seed,
                        "rationalization_error": rc.total_error_bound, "wall_time": time.perf_counter() - t0})
    return records


# --------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("json", "csv", "text"), default="text")
    common.add_argument("--threads", type=int, default=None, help="worker threads (sets EXPENERGY_THREADS)")

    parser = argparse.ArgumentParser(prog="expenergy", description="Bounds and simulators for bosonic circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="energy bounds and cutoffs for a circuit")
    p.add_argument("circuit")
    p.add_argument("--s", type=float, default=None, help="base s <= t_L (default t_L)")
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("decompose", parents=[common], help="phase-shifter decomposition of a Kerr gate")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--qmax", type=int, default=1000)
    p.add_argument("--kind", choices=("self", "cross"), default="self")
    p.set_defaults(func=cmd_decompose)

    def sim_flags(p):
        p.add_argument("circuit")
        p.add_argument("--cutoff", type=int, default=None, help="Fock cutoff (measured ledger)")
        p.add_argument("--eps", type=float, default=0.1, help="certified error target when no cutoff is given")
        p.add_argument("--alphas", default=None, help="comma-separated amplitudes, e.g. '0.1+0.2i,0'")
        p.add_argument("--grid", default=None, help="R:N grid over the first mode")
        p.add_argument("--rationalize", type=float, default=None, metavar="DELTA")
        p.add_argument("--term-cap", type=int, default=sim_superpos.DEFAULT_TERM_CAP)

    p = sub.add_parser("simulate", parents=[common], help="heterodyne densities from one backend")
    sim_flags(p)
    p.add_argument("--backend", choices=("fock", "superpos"), default="fock")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="run both backends and diff")
    sim_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("estimate", parents=[common], help="Monte-Carlo estimate by circuit cutting")
    p.add_argument("circuit")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphas", default=None)
    p.add_argument("--rationalize", type=float, default=None, metavar="DELTA")
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.threads is not None:
        os.environ["EXPENERGY_THREADS"] = str(args.threads)
    try:
        records = args.func(args)
    except (CircuitParseError, InadmissibleParameterError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError as e:
        print(f"resource limit: out of memory ({e})", file=sys.stderr)
        return EXIT_RESOURCE
    except IncompatibleBackendError as e:
        print(f"incompatible backend: {e}", file=sys.stderr)
        return EXIT_BACKEND
    except (EmptyProjectionError, ExpEnergyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    emit(records, args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
