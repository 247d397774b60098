"""Command-line front end: solve, audit, converge, sweep, oracle.

Exit codes: 0 success, 2 invalid input, 3 non-convergence, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .audit import identity_residual, proof_terms
from .config import SolverConfig
from .energy import energy_report, kinetic_crosscheck
from .manifest import audit_files, dumps, write_atomic, write_run
from .oracle import KINDS, ManufacturedField, green_identity_audit
from .params import WaveParameters
from .solver import CONVERGED, REFUSED, refine, solve_steady

EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_INTERNAL = 0, 2, 3, 4
OUTPUT_ENV = "SOLWAVE_OUTPUT_DIR"
FORMS = {"deep": "deep-capillary-gravity", "finite": "finite-depth-gravity"}

# successive values both below this count as converged, not as an increase
NOISE_FLOOR = 1e-12


class InputError(Exception):
    pass


def _parse_ladder(text: str) -> tuple[tuple[int, float], ...]:
    rungs = []
    for item in text.split(","):
        try:
            n, l = item.split(":")
            rungs.append((int(n), float(l)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad ladder rung {item!r}; use N:L") from None
    return tuple(rungs)


def _add_physics(p):
    p.add_argument("formulation", choices=sorted(FORMS))
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--a", type=float, default=None, help="crest elevation (finite depth)")


def _add_solver(p):
    p.add_argument("--config", type=Path, help="JSON solver configuration")
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-newton", type=int, dest="max_newton")
    p.add_argument("--out", type=Path, help=f"output directory (env {OUTPUT_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solwave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one wave and audit it")
    _add_physics(p)
    _add_solver(p)

    p = sub.add_parser("audit", help="recompute audits from a manifest and profile")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, help="write the audit JSON here as well")

    p = sub.add_parser("converge", help="run a refinement ladder")
    _add_physics(p)
    _add_solver(p)
    p.add_argument("--ladder", type=_parse_ladder, help="N:L pairs, e.g. 512:40,1024:40,2048:40")

    p = sub.add_parser("sweep", help="solve over a list of parameter values")
    _add_physics(p)
    _add_solver(p)
    p.add_argument("--param", required=True, choices=("a", "c", "T", "g", "d"))
    p.add_argument("--values", required=True,
                   type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("oracle", help="manufactured-field Green identity audit")
    p.add_argument("which", choices=("green",))
    p.add_argument("--field", required=True, choices=KINDS)
    p.add_argument("--s", type=float, default=1.0, help="strength")
    p.add_argument("--a", type=float, default=1.0, help="height of the singularity")
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--resolution", type=int, default=24)
    return ap


# -- helpers -------------------------------------------------------------------

def _config(args) -> SolverConfig:
    cfg = SolverConfig.load(args.config) if getattr(args, "config", None) else SolverConfig()
    cfg = cfg.with_overrides(N=args.N, L=args.L, tol=args.tol, max_newton=args.max_newton)
    if getattr(args, "ladder", None):
        cfg = cfg.with_overrides(ladder=args.ladder)
    return cfg


def _problem(args, overrides=None):
    """Parameters, amplitude and formulation from flags; every problem listed."""
    v = dict(g=args.g, T=args.T, c=args.c, d=args.d, a=args.a)
    v.update(overrides or {})
    form = FORMS[args.formulation]
    errs = []
    if form == FORMS["deep"]:
        if v["d"] is not None:
            errs.append("deep water takes no --d")
        if v["c"] is None:
            errs.append("deep water needs --c")
        if v["T"] is None:
            errs.append("deep water needs --T")
        if v["a"] is not None:
            errs.append("deep water is solved at fixed --c; --a is not used")
    else:
        if v["d"] is None:
            errs.append("finite depth needs --d")
        if v["a"] is None and v["g"] > 0:
            errs.append("finite depth needs --a")
        if v["T"] not in (None, 0.0):
            errs.append("finite depth is pure gravity; --T must be 0")
    if errs:
        raise InputError("; ".join(errs))
    try:
        params = WaveParameters(g=v["g"], T=v["T"] or 0.0, c=v["c"] or 0.0, d=v["d"])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return form, params, v["a"]


def _checked_problem(args, errs):
    """``_problem`` with its errors reported together with ``errs``."""
    try:
        out = _problem(args)
    except InputError as exc:
        errs.append(str(exc))
    if errs:
        raise InputError("; ".join(errs))
    return out


def _outdir(args, cfg: SolverConfig) -> Path:
    if getattr(args, "out", None):
        return args.out
    return Path(os.environ.get(OUTPUT_ENV, cfg.output_dir))


def _solve(form, params, amp, cfg):
    return solve_steady(form, params, cfg, amplitude=amp)


def _emit(obj):
    sys.stdout.write(dumps(obj))


def monotone_decreasing(values, floor: float = NOISE_FLOOR) -> bool:
    """Strict decrease between neighbours, except where both sit below ``floor``."""
    vals = [abs(v) for v in values]
    return all(b < a or max(a, b) <= floor for a, b in zip(vals, vals[1:]))


# -- commands ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _config(args)
    errs = cfg.validate()
    form, params, amp = _checked_problem(args, errs)
    sol = _solve(form, params, amp, cfg)
    out = _outdir(args, cfg)
    m = write_run(sol, out)
    _emit({"manifest": str(out / "manifest.json"), "status": sol.status,
           "residual_norm": sol.residual_norm, "identity": m["audit"]["identity"],
           "verdict": m["audit"]["verdict"]})
    return EXIT_OK if sol.status in (CONVERGED, REFUSED) else EXIT_NONCONV


def cmd_audit(args) -> int:
    if not args.manifest.exists():
        raise InputError(f"no such manifest: {args.manifest}")
    try:
        rep = audit_files(args.manifest)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"schema violation: {exc}") from None
    text = dumps(rep)
    if args.out:
        write_atomic(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _rung_record(sol):
    rep = energy_report(sol)
    ident = identity_residual(rep, sol.params)
    terms = proof_terms(sol)
    kc = kinetic_crosscheck(sol)
    D = terms.dirichlet or 1.0
    return {
        "N": sol.grid.N, "L": sol.grid.L, "status": sol.status,
        "residual_norm": sol.residual_norm, "c": sol.params.c, "amplitude": sol.amplitude,
        "identity_residual": ident.relative_residual,
        "identity_residual_full_tension": ident.relative_residual_full_tension,
        "kinetic_gap": kc.relative_gap,
        "I1_rel": terms.gap_I1 / D, "I2_rel": terms.gap_I2 / D, "sum_rel": terms.sum_gap / D,
    }


def cmd_converge(args) -> int:
    cfg = _config(args)
    errs = cfg.validate()
    if len(cfg.ladder) < 3:
        errs.append("ladder needs at least three rungs")
    form, params, amp = _checked_problem(args, errs)
    rungs, prev, failed = [], None, None
    for N, L in cfg.ladder:
        c = cfg.with_overrides(N=N, L=L)
        sol = _solve(form, params, amp, c) if prev is None else refine(prev, N, L, c)
        if sol.status == REFUSED:
            rungs.append({"N": N, "L": L, "status": sol.status})
            continue
        if sol.status != CONVERGED:
            failed = {"N": N, "L": L, "status": sol.status, "residual_norm": sol.residual_norm}
            break
        rungs.append(_rung_record(sol))
        prev = sol
    report = {"schema": "solwave-converge/1", "formulation": form, "params": params.to_dict(),
              "rungs": rungs, "failed": failed}
    if len(rungs) >= 2 and "identity_residual" in rungs[0]:
        ir = [r["identity_residual"] for r in rungs]
        amps = np.array([r["amplitude"] for r in rungs])
        cs = np.array([r["c"] for r in rungs])
        report["identity_monotone"] = monotone_decreasing(ir[-3:])
        report["identity_monotone_full_tension"] = monotone_decreasing(
            [r["identity_residual_full_tension"] for r in rungs][-3:])
        report["amplitude_drift"] = float(np.max(np.abs(np.diff(amps)) / np.abs(amps[1:])))
        report["speed_drift"] = float(np.max(np.abs(np.diff(cs)) / np.abs(cs[1:])))
        report["noise_floor"] = NOISE_FLOOR
    _emit(report)
    out = _outdir(args, cfg)
    write_atomic(out / "converge.json", dumps(report))
    return EXIT_NONCONV if failed else EXIT_OK


def _sweep_point(payload):
    form, pdict, amp, cfgd, out = payload
    sol = solve_steady(form, WaveParameters(**pdict), SolverConfig.from_dict(cfgd), amplitude=amp)
    write_run(sol, out)
    return {"status": sol.status, "residual_norm": sol.residual_norm, "c": sol.params.c,
            "amplitude": sol.amplitude, "dir": str(out)}


def cmd_sweep(args) -> int:
    cfg = _config(args)
    errs = cfg.validate()
    if errs:
        raise InputError("; ".join(errs))
    out = _outdir(args, cfg)
    cfgd = cfg.to_dict()
    cfgd["ladder"] = [tuple(r) for r in cfgd["ladder"]]
    payloads = []
    for i, val in enumerate(args.values):
        form, params, amp = _problem(args, {args.param: val})
        payloads.append((form, params.to_dict(), amp, cfgd, out / f"point-{i:03d}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            points = list(ex.map(_sweep_point, payloads))
    else:
        points = [_sweep_point(p) for p in payloads]
    for val, p in zip(args.values, points):
        p["value"] = val
    report = {"schema": "solwave-sweep/1", "param": args.param, "points": points}
    write_atomic(out / "sweep.json", dumps(report))
    _emit(report)
    ok = all(p["status"] in (CONVERGED, REFUSED) for p in points)
    return EXIT_OK if ok else EXIT_NONCONV


def cmd_oracle(args) -> int:
    try:
        f = ManufacturedField(args.field, args.s, args.a)
        rep = green_identity_audit(f, args.R, args.resolution)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit({"schema": "solwave-oracle/1", **rep.to_dict()})
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "audit": cmd_audit, "converge": cmd_converge,
            "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (InputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"solwave: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # bad values caught only once the solver sees them
        print(f"solwave: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
