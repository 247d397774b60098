import json
import math

import numpy as np
import pytest
from conftest import DEEP, FINITE, deep_params, finite_params

from solwave import (SolverConfig, SurfaceState, WaveParameters, continue_branch,
                     initial_guess, linear_speed, make_grid, minimum_speed,
                     physical_residual, refine, solve_steady)
from solwave.cli import monotone_decreasing
from solwave.solver import (CONVERGED, NOT_CONVERGED, REFUSED, _Problem, bernoulli_residual,
                            half_indices, symmetrize)

# -- parameters and dispersion ---------------------------------------------------


def test_deep_gravity_speed():
    assert linear_speed(1.0, WaveParameters(g=1.0)) == pytest.approx(1.0, abs=1e-15)


def test_minimum_speed_deep_matches_scan():
    p = WaveParameters(g=1.0, T=1.0)
    cm, km = minimum_speed(p)
    assert cm == pytest.approx(math.sqrt(2), abs=1e-14)
    assert km == pytest.approx(1.0, abs=1e-14)
    k = np.linspace(0.05, 10, 200001)
    scan = np.sqrt(1 / k + k)
    assert scan.min() == pytest.approx(cm, abs=1e-9)
    assert k[np.argmin(scan)] == pytest.approx(km, abs=1e-4)


def test_shallow_water_limit():
    p = WaveParameters(g=1.0, d=1.0)
    for k in (1e-2, 1e-3):
        # c = 1 - (kd)^2 / 6 + O(k^4)
        assert linear_speed(k, p) == pytest.approx(1 - k * k / 6, abs=k ** 4)
    assert minimum_speed(p) == (1.0, 0.0)


@pytest.mark.parametrize("kw", [dict(g=1.0, T=-1.0), dict(g=1.0, d=0.0), dict(g=1.0, n=4),
                                dict(g=math.nan)])
def test_parameter_validation(kw):
    with pytest.raises(ValueError):
        WaveParameters(**kw)


def test_nonpositive_gravity_is_representable():
    assert WaveParameters(g=-1.0).g == -1.0


# -- configuration -----------------------------------------------------------------


def test_config_validation_lists_everything():
    cfg = SolverConfig(N=7, L=-1, tol=0, max_newton=0, backtrack=2.0)
    assert len(cfg.validate()) == 5
    assert SolverConfig().validate() == []


def test_config_round_trip(tmp_path):
    cfg = SolverConfig(N=256, ladder=((256, 20.0), (512, 20.0)))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert SolverConfig.load(path) == cfg
    with pytest.raises(ValueError, match="unknown config keys"):
        SolverConfig.from_dict({"N": 64, "resolution": 3})


def test_config_overrides_skip_none():
    cfg = SolverConfig().with_overrides(N=2048, L=None)
    assert (cfg.N, cfg.L) == (2048, 40.0)


# -- guesses -------------------------------------------------------------------


def test_kdv_guess():
    g = make_grid(1024, 40.0)
    st = initial_guess("kdv", finite_params(), g, 0.1)
    y = st.y
    assert y[g.half] == pytest.approx(0.1, abs=1e-15)
    assert np.array_equal(y, symmetrize(y, g))
    right = y[g.half:]
    assert np.all(np.diff(right) < 0)
    assert st.c == pytest.approx(math.sqrt(1.1))


def test_wavepacket_guess_changes_sign():
    g = make_grid(1024, 60.0)
    y = initial_guess("wavepacket", deep_params(1.3), g).y
    assert y.min() < 0 < y.max()
    assert np.allclose(y, symmetrize(y, g), atol=1e-15)


@pytest.mark.parametrize("kind,params,amp", [
    ("kdv", WaveParameters(g=1.0), 0.1),
    ("kdv", finite_params(), 0.5),
    ("wavepacket", deep_params(1.5), None),
    ("wavepacket", WaveParameters(g=1.0, c=0.5), None),
    ("soliton", finite_params(), 0.1),
])
def test_guess_ranges_enforced(kind, params, amp):
    with pytest.raises(ValueError):
        initial_guess(kind, params, make_grid(64, 10.0), amp)


# -- residual and Jacobian -------------------------------------------------------


@pytest.mark.parametrize("params", [finite_params().with_speed(0.9), deep_params(1.3),
                                    WaveParameters(g=2.0, T=0.5, c=0.3)])
def test_trivial_state_has_zero_residual(params):
    st = SurfaceState(make_grid(64, 10.0), np.zeros(64), params.c, params.d)
    assert np.all(bernoulli_residual(st, params) == 0.0)


@pytest.mark.parametrize("form,params,amp", [(FINITE, finite_params(), 0.15),
                                             (DEEP, deep_params(1.3), None)])
def test_jacobian_matches_finite_differences(form, params, amp):
    g = make_grid(64, 12.0)
    if form == FINITE:
        guess = initial_guess("kdv", params, g, amp)
    else:
        guess = initial_guess("wavepacket", params, g)
    prob = _Problem(form, params, g, amp)
    v = guess.y[half_indices(g)]
    c = guess.c
    J = prob.jacobian(v, c)
    u = np.append(v, c) if amp is not None else v
    split = lambda w: (w[: v.size], w[v.size] if amp is not None else c)
    h = 1e-6
    fd = np.empty_like(J)
    for j in range(u.size):
        e = np.zeros(u.size)
        e[j] = h
        fd[:, j] = (prob.residual(*split(u + e)) - prob.residual(*split(u - e))) / (2 * h)
    assert np.max(np.abs(J - fd)) <= 1e-6 * np.max(np.abs(J))
    A, _ = prob.operator(v, c)
    w = np.random.default_rng(1).standard_normal(u.size)
    assert np.allclose(A.matvec(w), J @ w, atol=1e-11 * np.max(np.abs(J)))


# -- solves ----------------------------------------------------------------------


def test_finite_example(finite_small):
    s = finite_small
    assert s.status == CONVERGED
    assert s.residual_norm <= 1e-10
    assert s.crest == pytest.approx(0.1, abs=1e-14)
    assert s.params.c == pytest.approx(math.sqrt(1.1), rel=0.02)


def test_deep_example(deep_small):
    s = deep_small
    assert s.status == CONVERGED
    assert s.residual_norm <= 1e-10
    assert s.state.y.min() < 0 < s.state.y.max()
    assert s.params.c == 1.3


def test_dense_and_krylov_agree():
    cfg = SolverConfig(N=512, L=40.0)
    a = solve_steady(DEEP, deep_params(), cfg, use_dense=True)
    b = solve_steady(DEEP, deep_params(), cfg, use_dense=False)
    assert a.converged and b.converged
    assert np.max(np.abs(a.state.y - b.state.y)) <= 1e-10


def test_tiny_wavepacket_collapses_to_flat():
    p = deep_params(1.41)
    g = make_grid(1024, 60.0)
    guess = initial_guess("wavepacket", p, g, amplitude=1e-4)
    s = solve_steady(DEEP, p, SolverConfig(N=1024, L=60.0), guess)
    assert s.converged
    assert np.max(np.abs(s.state.y)) <= 1e-8


@pytest.mark.parametrize("form,params", [(DEEP, WaveParameters(g=-1.0, c=1.0)),
                                         (FINITE, WaveParameters(g=0.0, d=1.0, c=1.0))])
def test_nonpositive_gravity_refused(form, params):
    s = solve_steady(form, params, SolverConfig(N=256, L=20.0))
    assert s.status == REFUSED
    assert abs(s.amplitude) <= 1e-8
    assert s.residual_norm == 0.0


def test_nonconvergence_is_reported():
    s = solve_steady(FINITE, finite_params(), SolverConfig(N=512, L=40.0, max_newton=1),
                     amplitude=0.2)
    assert s.status == NOT_CONVERGED
    assert len(s.residual_history) == 2
    assert s.residual_norm == s.residual_history[-1] > 1e-11


@pytest.mark.parametrize("form,params", [(DEEP, finite_params()), (FINITE, deep_params()),
                                         ("periodic", finite_params())])
def test_formulation_mismatch_rejected(form, params):
    with pytest.raises(ValueError):
        solve_steady(form, params, SolverConfig(N=64, L=10.0), amplitude=0.1)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        solve_steady(FINITE, finite_params(), SolverConfig(N=63), amplitude=0.1)


# -- certificates ---------------------------------------------------------------------


def _evenness(s):
    y = s.state.y
    return np.max(np.abs(y - symmetrize(y, s.grid)))


def _tail_ratio(y):
    F = np.abs(np.fft.rfft(y))
    top = F[2 * F.size // 3:]
    return top.max() / F.max()


def test_converged_waves_are_even(finite_waves, deep_wave):
    for s in list(finite_waves.values()) + [deep_wave]:
        assert _evenness(s) <= 1e-15 * max(1, np.max(np.abs(s.state.y)))
        sym = SurfaceState(s.grid, symmetrize(s.state.y, s.grid), s.params.c, s.params.d)
        assert np.max(np.abs(bernoulli_residual(sym, s.params))) <= s.config.tol


def test_spectral_decay_certificate(finite_waves, deep_wave):
    for s in list(finite_waves.values()) + [deep_wave]:
        assert _tail_ratio(s.state.y) <= 1e-10


def test_physical_residual_trivial():
    p = finite_params().with_speed(1.0)
    st = SurfaceState(make_grid(256, 20.0), np.zeros(256), 1.0, 1.0)

    class Flat:
        params = p
        state = st

    rep = physical_residual(Flat())
    assert max(rep.kinematic_defect, rep.bernoulli_defect, rep.harmonicity_defect,
               rep.decay_defect) <= 1e-12


def test_physical_residual_finite(finite_ladders):
    s = finite_ladders[0.1][2]
    assert s.grid.N == 2048
    rep = physical_residual(s)
    assert rep.kinematic_defect <= 1e-8
    assert rep.bernoulli_defect <= 1e-8
    assert rep.harmonicity_defect <= 1e-8
    assert rep.points == 12


def test_physical_residual_detects_corruption(finite_ladders):
    s = finite_ladders[0.1][2]
    x = s.grid.nodes
    bad = SurfaceState(s.grid, s.state.y + 1e-3 * np.exp(-((x - 3.0) / 0.5) ** 2),
                       s.params.c, s.params.d)

    class Corrupt:
        params = s.params
        state = bad

    assert physical_residual(Corrupt()).bernoulli_defect >= 1e-4


def test_physical_residual_decreases_finite(finite_ladders):
    reps = [physical_residual(s) for s in finite_ladders[0.2][1:]]
    for field in ("kinematic_defect", "bernoulli_defect"):
        assert monotone_decreasing([getattr(r, field) for r in reps])


def test_physical_residual_decreases_deep():
    sols = [solve_steady(DEEP, deep_params(), SolverConfig(N=N, L=100.0))
            for N in (1024, 2048, 4096)]
    reps = [physical_residual(s) for s in sols]
    for field in ("kinematic_defect", "bernoulli_defect"):
        assert monotone_decreasing([getattr(r, field) for r in reps])
    assert reps[-1].bernoulli_defect <= 1e-8


def test_refine_preserves_crest(finite_small):
    s = refine(finite_small, 2048, 80.0)
    assert s.converged and s.grid.L == 80.0
    assert s.crest == pytest.approx(0.1, abs=1e-14)


def test_doubling_period_finite(finite_ladders):
    s = finite_ladders[0.2][1]
    t = refine(s, 2 * s.grid.N, 2 * s.grid.L)
    assert abs(t.params.c - s.params.c) / s.params.c <= 1e-8
    assert abs(t.amplitude - s.amplitude) / abs(s.amplitude) <= 1e-8


def test_doubling_period_deep(deep_wave_half, deep_wave):
    a, b = deep_wave_half, deep_wave
    assert a.converged and b.converged
    assert abs(b.amplitude - a.amplitude) / abs(b.amplitude) <= 1e-8


# -- continuation -------------------------------------------------------------------


def test_zero_steps_returns_start(finite_small):
    br = continue_branch(finite_small, 0.3, 0)
    assert br.solutions == (finite_small,)
    assert br.status == "completed"


def test_finite_branch(finite_small):
    start = solve_steady(FINITE, finite_params(), SolverConfig(N=512, L=40.0), amplitude=0.1)
    br = continue_branch(start, 0.3, 10)
    assert br.status == "completed"
    assert len(br) == 11
    assert all(s.converged for s in br.solutions)
    assert br.values[-1] == pytest.approx(0.3)
    cs = [row["c"] for row in br.table()]
    assert np.all(np.diff(cs) > 0)


def test_deep_branch_in_tension(deep_small):
    br = continue_branch(deep_small, 0.1, 6, parameter="T", keep_speed_ratio=True)
    assert br.status in ("completed", "fold", "collapsed-to-trivial", "step-underflow")
    ratio = [s.params.c / minimum_speed(s.params)[0] for s in br.solutions]
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    amps = [row["amplitude"] for row in br.table()]
    assert len(amps) == len(br)


def test_continuation_preconditions(finite_small):
    with pytest.raises(ValueError):
        continue_branch(finite_small, 0.3, 2, parameter="g")
    with pytest.raises(ValueError):
        continue_branch(finite_small, 1.2, 2, parameter="c")
    bad = solve_steady(FINITE, finite_params(), SolverConfig(N=256, L=40.0, max_newton=1),
                       amplitude=0.2)
    with pytest.raises(ValueError):
        continue_branch(bad, 0.3, 2)
