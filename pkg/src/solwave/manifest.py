"""Run manifests (JSON) and surface profiles (CSV).

Floats go through ``repr``, which round-trips every double exactly, so an
audit recomputed from the files sees bit-identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .audit import full_audit
from .config import SolverConfig
from .conformal import SurfaceState
from .params import WaveParameters
from .solver import WaveSolution, bernoulli_residual
from .spectral import make_grid

SCHEMA = "solwave-manifest/1"
AUDIT_SCHEMA = "solwave-audit/1"
PROFILE_COLUMNS = ("xi", "x", "y", "phi_trace", "psi_trace")
PROFILE_NAME = "profile.csv"
MANIFEST_NAME = "manifest.json"


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- profile -------------------------------------------------------------------

def profile_csv(state: SurfaceState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    cols = (state.grid.nodes, state.x, state.y, state.phi_trace, state.psi_trace)
    for row in zip(*cols):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_profile(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != PROFILE_COLUMNS:
        raise ValueError(f"profile header must be {','.join(PROFILE_COLUMNS)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"malformed profile row: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(PROFILE_COLUMNS):
        raise ValueError("profile rows must have five columns")
    return {name: data[:, i] for i, name in enumerate(PROFILE_COLUMNS)}


# -- manifest ------------------------------------------------------------------

def _audit_dict(audit: dict) -> dict:
    return {
        "energy": audit["energy"].to_dict(),
        "identity": audit["identity"].to_dict(),
        "terms": audit["terms"].to_dict(),
        "verdict": None if audit["verdict"] is None else audit["verdict"].to_dict(),
        "steady_residual": audit["steady_residual"],
    }


def build_manifest(solution: WaveSolution, *, timestamp: str | None = None) -> dict:
    summary = solution.summary()
    summary["residual_history"] = list(solution.residual_history)
    summary["amplitude_target"] = solution.amplitude_target
    summary["peak_to_trough"] = float(np.max(solution.state.y) - np.min(solution.state.y))
    m = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "formulation": solution.formulation,
        "config": (solution.config or SolverConfig()).to_dict(),
        "params": solution.params.to_dict(),
        "solution": summary,
        "profile": PROFILE_NAME,
        "audit": _audit_dict(full_audit(solution)),
        "timestamps": {"created": timestamp or datetime.now(timezone.utc).isoformat()},
    }
    return m


def write_run(solution: WaveSolution, directory: str | Path) -> dict:
    """Write ``profile.csv`` then ``manifest.json`` into ``directory``."""
    d = Path(directory)
    write_atomic(d / PROFILE_NAME, profile_csv(solution.state))
    m = build_manifest(solution)
    write_atomic(d / MANIFEST_NAME, dumps(m))
    return m


def strip_timestamps(manifest: dict) -> dict:
    return {k: v for k, v in manifest.items() if k != "timestamps"}


_REQUIRED = ("schema", "formulation", "config", "params", "solution", "profile")


def load_manifest(path: str | Path) -> dict:
    try:
        m = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(m, dict):
        raise ValueError("manifest must be a JSON object")
    missing = [k for k in _REQUIRED if k not in m]
    if missing:
        raise ValueError(f"manifest lacks {', '.join(missing)}")
    if m["schema"] != SCHEMA:
        raise ValueError(f"unsupported manifest schema {m['schema']!r}")
    return m


def solution_from_files(manifest_path: str | Path) -> WaveSolution:
    """Rebuild a solution from a manifest and its profile, without solving."""
    m = load_manifest(manifest_path)
    try:
        params = WaveParameters(**m["params"])
        cfg = SolverConfig.from_dict(m["config"])
        sol = m["solution"]
        N, L = int(sol["N"]), float(sol["L"])
    except (TypeError, KeyError) as exc:
        raise ValueError(f"manifest field error: {exc}") from None
    prof = read_profile(Path(manifest_path).parent / m["profile"])
    grid = make_grid(N, L)
    if prof["y"].size != N:
        raise ValueError("profile length does not match N")
    if not np.array_equal(prof["xi"], grid.nodes):
        raise ValueError("profile abscissae do not match the grid")
    state = SurfaceState(grid, prof["y"], params.c, params.d)
    res = float(np.max(np.abs(bernoulli_residual(state, params))))
    return WaveSolution(m["formulation"], params, state, sol["status"], res,
                        int(sol["newton_iterations"]), tuple(sol.get("residual_history", ())),
                        sol.get("amplitude_target"), cfg)


def audit_files(manifest_path: str | Path) -> dict:
    """Recompute every audit from the persisted surface data."""
    sol = solution_from_files(manifest_path)
    return {"schema": AUDIT_SCHEMA, "tool_version": __version__,
            "audit": _audit_dict(full_audit(sol))}
