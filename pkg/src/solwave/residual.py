"""Independent check of a computed wave in physical variables.

The potential is rebuilt in the bulk from its surface trace with the
extension multipliers and the boundary conditions are evaluated on the
uniform physical grid in ``x``:

    kinematic   phi_y - (phi_x - c) eta_x = 0
    Bernoulli   -c phi_x + |grad phi|^2 / 2 + g eta - T (eta_x / sqrt(1 + eta_x^2))_x = 0

Harmonicity is checked with a fourth-order finite-difference Laplacian at
interior points located by inverting the conformal map.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .conformal import SurfaceState


@dataclass(frozen=True)
class ResidualSampling:
    """Interior sample points for the harmonicity check.

    ``xs`` are fractions of ``L``; ``depths`` are distances below the local
    surface, as fractions of ``d`` in finite depth and in length units in
    deep water.  ``fd_step`` is the finite-difference spacing.
    """

    xs: tuple[float, ...] = (0.0, 0.05, 0.15, 0.3)
    depths: tuple[float, ...] = (0.25, 0.5, 0.75)
    fd_step: float = 0.02


@dataclass(frozen=True)
class ResidualReport:
    kinematic_defect: float
    bernoulli_defect: float
    harmonicity_defect: float
    decay_defect: float
    points: int

    def to_dict(self) -> dict:
        return asdict(self)


# fourth-order central second difference
_W = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFF = np.array([-2, -1, 0, 1, 2])


def _potential_at(state: SurfaceState, x, y):
    s, z = state.invert_map(x, y)
    return state.bulk_fields(s, z)["phi"]


def _interior_points(state: SurfaceState, sampling: ResidualSampling):
    L = state.grid.L
    xs = np.array(sampling.xs, dtype=float) * L
    if np.any(np.abs(xs) >= L):
        raise ValueError("sample abscissae must lie inside the period")
    s = state.conformal_abscissae(xs)
    from .spectral import interpolate
    eta = interpolate(state.y, state.grid, s)
    scale = state.depth if state.depth is not None else 1.0
    pts = []
    for x0, e in zip(xs, eta):
        for frac in sampling.depths:
            y0 = e - frac * scale
            if not frac > 0:
                raise ValueError("sample depths must be below the surface")
            if state.depth is not None and y0 <= -state.depth:
                raise ValueError("sample point below the bottom")
            pts.append((x0, y0))
    return np.array(pts)


def harmonicity_defect(state: SurfaceState, sampling: ResidualSampling) -> tuple[float, int]:
    pts = _interior_points(state, sampling)
    h = sampling.fd_step
    out = 0.0
    for x0, y0 in pts:
        xx = np.concatenate([x0 + h * _OFF, np.full(5, x0)])
        yy = np.concatenate([np.full(5, y0), y0 + h * _OFF])
        if state.depth is not None and yy.min() <= -state.depth:
            raise ValueError("stencil reaches below the bottom")
        if yy.max() >= np.interp(x0, state.x, state.y) and state.y.any():
            raise ValueError("stencil reaches above the surface")
        p = _potential_at(state, xx, yy)
        lap = (_W @ p[:5] + _W @ p[5:]) / h ** 2
        out = max(out, abs(lap))
    return float(out), len(pts)


def physical_residual(solution, sampling: ResidualSampling | None = None) -> ResidualReport:
    st: SurfaceState = solution.state if hasattr(solution, "state") else solution
    p = solution.params
    sampling = sampling or ResidualSampling()
    st.check_nondegenerate()
    ps = st.physical_samples
    c = st.c
    ex, exx = ps["eta_x"], ps["eta_xx"]
    px, py = ps["phi_x"], ps["phi_y"]
    kin = py - (px - c) * ex
    kappa = exx / (1 + ex ** 2) ** 1.5
    bern = -c * px + 0.5 * (px ** 2 + py ** 2) + p.g * ps["eta"] - p.T * kappa
    if not st.y.any():
        harm, npts = 0.0, 0
    else:
        harm, npts = harmonicity_defect(st, sampling)
    decay = float(max(abs(ps["eta"][0]), abs(px[0]), abs(py[0])))
    return ResidualReport(float(np.max(np.abs(kin))), float(np.max(np.abs(bern))),
                          harm, decay, npts)
