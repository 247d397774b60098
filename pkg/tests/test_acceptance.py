"""One test per acceptance criterion; each records a PASS/FAIL line with
the measured numbers, shown in the terminal summary."""

import itertools
import json
import math
import subprocess
import sys

import numpy as np

from solwave import SolverConfig, WaveParameters, solve_steady
from solwave.audit import corollary_verdict, identity_residual, proof_terms, scale_solution
from solwave.cli import monotone_decreasing
from solwave.energy import EnergyReport, energy_report, kinetic_crosscheck
from solwave.manifest import dumps, strip_timestamps
from solwave.oracle import ManufacturedField, bulk_dirichlet_energy, green_identity_audit

from conftest import AMPLITUDES, DEEP, FINITE


def _suite(finite_ladders, deep_wave, deep_wave_half):
    sols = [s for a in AMPLITUDES for s in finite_ladders[a]] + [deep_wave_half, deep_wave]
    return [s for s in sols if s.converged]


def _tag(s):
    kind = "finite" if s.params.d is not None else "deep"
    return f"{kind} N={s.grid.N} L={s.grid.L:g}"


def test_c1_green_identity_oracle(criterion):
    pole = green_identity_audit(ManufacturedField("pole2d", 1.0, 1.0), 100, 24)
    pole_D = bulk_dirichlet_energy(ManufacturedField("pole2d", 1.0, 1.0), 100).value
    src_D = bulk_dirichlet_energy(ManufacturedField("source3d", 1.0, 1.0), 100).value
    e_pole = abs(pole_D - math.pi / 4)
    e_src = abs(src_D - math.pi)
    defect = max(pole.identity1_defect, pole.identity2_defect)
    ok = e_pole <= 1e-6 and defect <= 1e-8 and e_src <= 1e-5
    assert criterion("C1 green-identity oracle", ok,
                     f"|D_pole - pi/4| = {e_pole:.2e}, pole defects <= {defect:.2e}, "
                     f"|D_source - pi| = {e_src:.2e}")


def test_c2_finite_depth_identity(finite_ladders, criterion):
    parts, ok = [], True
    for a in AMPLITUDES:
        sols = finite_ladders[a]
        assert all(s.converged for s in sols)
        reps = [identity_residual(energy_report(s), s.params) for s in sols]
        res = [r.relative_residual for r in reps]
        top = reps[-1]
        P = energy_report(sols[-1]).potential_integral
        ratio_l, ratio_r = top.lhs / P, top.rhs / P
        bound = 0.35 * a / 0.3
        mono = monotone_decreasing(res)
        good = (sols[-1].grid.N == 4096 and res[-1] <= 1e-6 and mono
                and abs(ratio_l - 1.5) <= bound and abs(ratio_r - 1.5) <= bound)
        ok &= good
        parts.append(f"a={a}: res {res[-1]:.2e} monotone={mono} lhs/P={ratio_l:.4f}")
    assert criterion("C2 finite-depth identity", ok, "; ".join(parts))


def test_c3_deep_identity(deep_wave_half, deep_wave, criterion):
    assert deep_wave.converged and deep_wave_half.converged
    assert (deep_wave.grid.N, deep_wave.grid.L) == (4096, 200.0)
    short, full = (identity_residual(energy_report(s), s.params)
                   for s in (deep_wave_half, deep_wave))
    ok = full.relative_residual <= 1e-6 and full.relative_residual < short.relative_residual
    assert criterion("C3 deep capillary-gravity identity", ok,
                     f"relative residual {full.relative_residual:.6e} at N=4096 L=200, "
                     f"{short.relative_residual:.6e} at N=2048 L=100 "
                     f"(with tension coefficient n-1: {full.relative_residual_full_tension:.2e})")


def test_c4_kinetic_crosscheck(finite_ladders, deep_wave, deep_wave_half, criterion):
    gaps = [(kinetic_crosscheck(s).relative_gap, _tag(s))
            for s in _suite(finite_ladders, deep_wave, deep_wave_half)]
    worst = max(gaps)
    ok = worst[0] <= 1e-8
    assert criterion("C4 kinetic energy two ways", ok,
                     f"{len(gaps)} solutions, worst gap {worst[0]:.2e} ({worst[1]})")


def test_c5_proof_terms(finite_ladders, deep_wave, deep_wave_half, criterion):
    worst = {"I1": (0.0, ""), "I2": (0.0, ""), "sum finite": (0.0, ""), "sum deep": (0.0, "")}
    cell = 0.0
    sols = _suite(finite_ladders, deep_wave, deep_wave_half)
    for s in sols:
        t = proof_terms(s)
        D = t.dirichlet
        tag = "sum deep" if s.params.d is None else "sum finite"
        for key, gap in (("I1", abs(t.I1)), ("I2", t.gap_I2), (tag, t.sum_gap)):
            worst[key] = max(worst[key], (gap / D, _tag(s)))
        if t.cell_gap is not None:
            cell = max(cell, t.cell_gap / D)
    ok = (worst["I1"][0] <= 1e-8 and worst["I2"][0] <= 1e-7
          and worst["sum finite"][0] <= 1e-7 and worst["sum deep"][0] <= 1e-7)
    detail = ", ".join(f"{k} {v:.2e} ({where})" for k, (v, where) in worst.items())
    assert criterion("C5 proof-term audit", ok,
                     f"{len(sols)} solutions, worst/dirichlet: {detail}; "
                     f"deep sum with side-wall flux {cell:.2e}")


def test_c6_scaling_symmetry(finite_waves, criterion):
    parts, ok = [], True
    for a, lam in itertools.product(AMPLITUDES, (0.5, 2.0)):
        s = finite_waves[a]
        t = scale_solution(s, lam)
        good = (t.residual_norm <= 10 * s.config.tol
                and math.isclose(t.params.c, s.params.c / math.sqrt(lam), rel_tol=1e-15)
                and math.isclose(t.params.d, s.params.d / lam, rel_tol=1e-15))
        ok &= good
        parts.append(f"a={a} lam={lam}: {t.residual_norm:.1e}")
    assert criterion("C6 scaling symmetry", ok,
                     f"residual vs 10*tol = {10 * SolverConfig().tol:.0e}; " + ", ".join(parts))


def test_c7_nonexistence_verdict(criterion):
    tol = 1e-10
    n_cases, wrong = 0, 0
    for g, D, P in itertools.product((-3.0, -1.0, -1e-6, 0.0),
                                     (0.0, 1e-15, 0.5 * tol, tol, 2 * tol, 1e-4, 0.5, 7.0),
                                     (0.0, -1e-9, -0.5, -4.0)):
        rep = EnergyReport(D, P, 0.0, 0.0, 64, 10.0, g, 0.0, None, 0.0, 0.0, None)
        v = corollary_verdict(identity_residual(rep, WaveParameters(g=g)), rep, tol)
        n_cases += 1
        wrong += v.conclusion != ("trivial" if D <= tol else "inconsistent")
    amps = []
    for form, p in ((DEEP, WaveParameters(g=-1.0, c=1.0)), (DEEP, WaveParameters(g=0.0, c=0.5)),
                    (FINITE, WaveParameters(g=-1.0, d=1.0, c=1.0))):
        s = solve_steady(form, p, SolverConfig(N=512, L=40.0))
        amps.append(float(np.max(np.abs(s.state.y))))
    ok = wrong == 0 and max(amps) <= 1e-8
    assert criterion("C7 non-existence verdict", ok,
                     f"{n_cases - wrong}/{n_cases} grid verdicts correct, "
                     f"g <= 0 solver amplitudes <= {max(amps):.1e}")


def test_c8_determinism_round_trip(tmp_path, criterion):
    argv = ["solve", "finite", "--g", "1", "--d", "1", "--a", "0.2", "--N", "1024", "--L", "40"]
    runs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        subprocess.run([sys.executable, "-m", "solwave.cli", *argv, "--out", str(out)],
                       check=True, capture_output=True)
        runs.append(out)
    m = [json.loads((r / "manifest.json").read_text()) for r in runs]
    same = (dumps(strip_timestamps(m[0])) == dumps(strip_timestamps(m[1]))
            and (runs[0] / "profile.csv").read_bytes() == (runs[1] / "profile.csv").read_bytes())
    audit = subprocess.run([sys.executable, "-m", "solwave.cli", "audit",
                            str(runs[0] / "manifest.json")],
                           check=True, capture_output=True, text=True)
    exact = json.loads(audit.stdout)["audit"] == m[0]["audit"]
    assert criterion("C8 determinism and round-trip", same and exact,
                     f"manifests byte-identical={same}, audit-from-files exact={exact}")
