"""Natural-parameter continuation along a family of solitary waves."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import SolverConfig
from .conformal import SurfaceState
from .params import minimum_speed
from .solver import CONVERGED, FOLD, WaveSolution, solve_steady

COMPLETED = "completed"
FOLD_STATUS = "fold"
COLLAPSED = "collapsed-to-trivial"
UNDERFLOW = "step-underflow"

PARAMETERS = ("amplitude", "c", "T")

# below this the surface counts as flat
TRIVIAL_AMPLITUDE = 1e-8


@dataclass(frozen=True)
class Branch:
    solutions: tuple[WaveSolution, ...]
    values: tuple[float, ...]
    status: str

    def __len__(self):
        return len(self.solutions)

    def table(self) -> list[dict]:
        return [dict(value=v, **s.summary()) for v, s in zip(self.values, self.solutions)]


def _current(sol: WaveSolution, parameter: str) -> float:
    if parameter == "amplitude":
        if sol.amplitude_target is None:
            raise ValueError("amplitude continuation needs a crest-constrained start")
        return sol.amplitude_target
    if parameter == "c":
        if sol.amplitude_target is not None:
            raise ValueError("speed continuation needs a fixed-speed start")
        return sol.params.c
    return sol.params.T


def _attempt(sol: WaveSolution, parameter: str, value: float, keep_ratio: float | None):
    p = sol.params
    st = sol.state
    amp = sol.amplitude_target
    if parameter == "amplitude":
        amp = value
    elif parameter == "c":
        p = p.with_speed(value)
    else:
        p = replace(p, T=value)
        if keep_ratio is not None:
            p = p.with_speed(keep_ratio * minimum_speed(p)[0])
    guess = SurfaceState(st.grid, st.y, p.c if amp is None else st.c, st.depth)
    return solve_steady(sol.formulation, p, sol.config, guess, amplitude=amp)


def continue_branch(start: WaveSolution, target: float, steps: int, *,
                    parameter: str = "amplitude", keep_speed_ratio: bool = False) -> Branch:
    """March ``parameter`` from its value at ``start`` to ``target`` in
    ``steps`` equal steps, halving the step after each failed solve.

    ``parameter='T'`` with ``keep_speed_ratio`` holds ``c / c_min(T)`` fixed.
    Stops early with ``fold`` (singular Jacobian), ``collapsed-to-trivial``
    (solution flattened out) or ``step-underflow`` (step below
    ``config.continuation_floor`` times the full range).
    """
    if parameter not in PARAMETERS:
        raise ValueError(f"parameter must be one of {PARAMETERS}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if not start.converged:
        raise ValueError("continuation must start from a converged solution")
    v0 = _current(start, parameter)
    if steps == 0:
        return Branch((start,), (v0,), COMPLETED)
    ratio = None
    if parameter == "T" and keep_speed_ratio:
        ratio = start.params.c / minimum_speed(start.params)[0]
    cfg = start.config or SolverConfig()
    floor = cfg.continuation_floor * abs(target - v0)
    full = (target - v0) / steps
    sols, vals = [start], [v0]
    cur, val, step = start, v0, full
    while True:
        if (target - val) * np.sign(full) <= abs(full) * 1e-12:
            return Branch(tuple(sols), tuple(vals), COMPLETED)
        step = np.sign(full) * min(abs(step), abs(target - val))
        nxt = val + step
        try:
            sol = _attempt(cur, parameter, nxt, ratio)
        except ValueError:
            sol = None
        if sol is not None and sol.status == FOLD:
            return Branch(tuple(sols), tuple(vals), FOLD_STATUS)
        if sol is not None and sol.status == CONVERGED:
            sols.append(sol)
            vals.append(nxt)
            if np.max(np.abs(sol.state.y)) <= TRIVIAL_AMPLITUDE:
                return Branch(tuple(sols), tuple(vals), COLLAPSED)
            cur, val = sol, nxt
            step = min(abs(full), 2 * abs(step)) * np.sign(full)
            continue
        step = step / 2
        if abs(step) < floor:
            return Branch(tuple(sols), tuple(vals), UNDERFLOW)
