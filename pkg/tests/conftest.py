"""Shared solved waves.  Solving is the expensive part, so each wave is
computed once per session and reused across modules."""

import pytest

from solwave import SolverConfig, WaveParameters, refine, solve_steady

FINITE = "finite-depth-gravity"
DEEP = "deep-capillary-gravity"
AMPLITUDES = (0.1, 0.2, 0.3)
LADDER = (512, 1024, 2048, 4096)


def finite_params():
    return WaveParameters(g=1.0, T=0.0, d=1.0)


def deep_params(c=1.3):
    return WaveParameters(g=1.0, T=1.0, c=c)


@pytest.fixture(scope="session")
def finite_ladders():
    """a -> solutions on N = 512..4096 at L = 40, each seeded by the previous rung."""
    out = {}
    for a in AMPLITUDES:
        cfg = SolverConfig(N=LADDER[0], L=40.0)
        sols = [solve_steady(FINITE, finite_params(), cfg, amplitude=a)]
        for N in LADDER[1:]:
            sols.append(refine(sols[-1], N, 40.0))
        out[a] = sols
    return out


@pytest.fixture(scope="session")
def finite_waves(finite_ladders):
    return {a: sols[-1] for a, sols in finite_ladders.items()}


@pytest.fixture(scope="session")
def finite_small():
    """a = 0.1 at N = 1024, L = 40: the cheap wave for quick checks."""
    return solve_steady(FINITE, finite_params(), SolverConfig(N=1024, L=40.0), amplitude=0.1)


@pytest.fixture(scope="session")
def deep_wave():
    return solve_steady(DEEP, deep_params(), SolverConfig(N=4096, L=200.0))


@pytest.fixture(scope="session")
def deep_wave_half():
    """Same density as ``deep_wave`` on half the period."""
    return solve_steady(DEEP, deep_params(), SolverConfig(N=2048, L=100.0))


@pytest.fixture(scope="session")
def deep_small():
    return solve_steady(DEEP, deep_params(), SolverConfig(N=1024, L=60.0))


# -- acceptance reporting ------------------------------------------------------------

_LINES = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``criterion(key, ok, detail)`` records one acceptance line and
    returns ``ok``; the lines are printed after the run."""
    lines = request.config.stash.setdefault(_LINES, {})

    def record(key, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"
        lines[key] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
