"""Integral-identity audits on computed waves.

Coefficients are carried symbolically in the dimension ``n``:

    (n/2) D [+ B/2]  =  ((n+1)/2) P  +  k_T S

with ``D`` the Dirichlet integral, ``P = g int eta^2``, ``S = T int (sqrt(1+|grad eta|^2) - 1)``,
``B`` the bottom integral.  Two surface-tension coefficients are reported:
the half coefficient ``k_T = 1/2`` and ``k_T = n - 1``, the value obtained
by integrating ``-T div(grad eta / sqrt(1+|grad eta|^2)) (eta - x . grad eta)``
by parts directly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .conformal import SurfaceState
from .energy import EnergyReport, dirichlet_integral, energy_report, potential_trace
from .params import WaveParameters
from .solver import CONVERGED, WaveSolution, bernoulli_residual

REL_FLOOR = 1e-14


def _relres(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / max(scale, REL_FLOOR * scale)


def regime_of(params: WaveParameters) -> str:
    if params.d is not None:
        return "finite"
    return "deep-T" if params.T != 0 else "deep-T0"


@dataclass(frozen=True)
class IdentityReport:
    regime: str
    n: int
    lhs: float
    rhs: float
    relative_residual: float
    rhs_full_tension: float
    relative_residual_full_tension: float
    g: float
    T: float
    d: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "IdentityReport":
        return cls(**data)


def identity_residual(report: EnergyReport, params: WaveParameters) -> IdentityReport:
    """Both sides of the integral identity from an energy report.

    ``rhs`` uses the half surface-tension coefficient, ``rhs_full_tension``
    the coefficient ``n - 1``; they coincide when ``T = 0``.
    """
    if (report.d is None) != (params.d is None):
        raise ValueError("energy report and parameters disagree about the depth")
    if params.d is None and report.bottom_integral != 0.0:
        raise ValueError("deep-water report carries a bottom integral")
    n = params.n
    lhs = 0.5 * n * report.dirichlet
    if params.d is not None:
        lhs += 0.5 * report.bottom_integral
    base = 0.5 * (n + 1) * report.potential_integral
    rhs = base + 0.5 * report.surface_integral
    rhs_full = base + (n - 1) * report.surface_integral
    return IdentityReport(regime_of(params), n, lhs, rhs, _relres(lhs, rhs), rhs_full,
                          _relres(lhs, rhs_full), params.g, params.T, params.d)


# -- proof terms ----------------------------------------------------------------

@dataclass(frozen=True)
class TermReport:
    I1: float
    I2: float
    I3: float
    I4: float
    sum: float
    bottom_correction: float
    dirichlet: float
    gap_I1: float
    gap_I2: float
    gap_I3: float
    gap_I3_half_tension: float
    gap_I4: float
    sum_gap: float
    lateral_flux: float | None
    cell_gap: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TermReport":
        return cls(**data)


def _panel_nodes(edges, order=48):
    t, w = np.polynomial.legendre.leggauss(order)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def lateral_flux(state: SurfaceState) -> float:
    """``L int phi_x(L, y)^2 dy`` down the cell wall ``x = L`` (deep water).

    The wall is the image of ``xi = L``; by symmetry ``y_xi = 0`` there, so
    ``phi_x = phi_xi / x_xi`` and ``dy = x_xi dzeta``.
    """
    if not state.deep:
        raise ValueError("lateral flux is defined for the deep-water cell")
    L = state.grid.L
    dx = state.grid.spacing
    edges = [0.0]
    while edges[-1] > -60 * L:
        edges.append(min(-dx, 2 * edges[-1]))
    edges = np.array(edges)
    z, w = _panel_nodes(edges[::-1])
    f = state.bulk_fields(np.full_like(z, L), z)
    return float(L * np.sum(w * f["phi_xi"] ** 2 / f["x_xi"]))


def proof_terms(solution) -> TermReport:
    """The four boundary integrals of the multiplier identity, each evaluated
    on its own from surface traces, with consistency gaps.

    All gaps are absolute; divide by ``dirichlet`` for relative values.
    """
    st: SurfaceState = solution.state if hasattr(solution, "state") else solution
    params: WaveParameters = solution.params
    n = params.n
    if n != 2:
        raise ValueError("proof terms are evaluated for n = 2")
    st.check_nondegenerate()
    c, g, T = st.c, params.g, params.T
    grid = st.grid
    ps = st.physical_samples
    x, eta, ex, exx = ps["x"], ps["eta"], ps["eta_x"], ps["eta_xx"]
    px, py = ps["phi_x"], ps["phi_y"]
    if not all(np.all(np.isfinite(v)) for v in (eta, px, py)):
        raise ValueError("degenerate traces")
    dx = grid.spacing
    # I1: x-pairing on the physical grid against the c-pairing in conformal variables
    first = np.sum(x * px * ex) * dx
    phi_xi = st.phi_slope + st._d(st.phi_per)
    phi_z = potential_trace(st)
    px_conf = (phi_xi * st.x_xi - phi_z * st.y_xi) / st.jacobian
    second = np.sum(px_conf * st.x * st.y_xi) * dx
    I1 = float(-c * (first - second))
    I2 = float(-np.sum(eta * py * c * ex + eta * c * px) * dx)
    s = np.sqrt(1 + ex ** 2)
    I3 = float(np.sum((g * eta - T * exx / s ** 3) * (eta - x * ex)) * dx)
    D = dirichlet_integral(st)
    I4 = float((0.5 * n - 1) * D)
    rep = energy_report(solution)
    bottom = 0.5 * rep.bottom_integral
    base = (1 + 0.5 * (n - 1)) * rep.potential_integral
    total = I1 + I2 + I3 + I4
    lat = cell = None
    if st.deep and st.y.any():
        lat = lateral_flux(st)
        cell = abs(total - bottom + lat)
    elif st.deep:
        lat, cell = 0.0, abs(total - bottom)
    return TermReport(
        I1, I2, I3, I4, float(total), float(bottom), float(D),
        gap_I1=abs(I1 - (2 - n) * D),
        gap_I2=abs(I2 + D),
        gap_I3=abs(I3 - (base + (n - 1) * rep.surface_integral)),
        gap_I3_half_tension=abs(I3 - (base + 0.5 * rep.surface_integral)),
        gap_I4=abs(I4 - (0.5 * n - 1) * D),
        sum_gap=abs(total - bottom),
        lateral_flux=lat, cell_gap=cell)


# -- scaling ------------------------------------------------------------------

def scale_solution(solution: WaveSolution, lam: float) -> WaveSolution:
    """Apply ``eta -> eta(lam x)/lam``, ``phi -> lam^{-3/2} phi(lam x, lam y)``,
    ``c -> c/sqrt(lam)``, ``d -> d/lam`` on the grid with ``L -> L/lam``.

    Only valid without surface tension.  The residual norm of the result is
    recomputed on the mapped parameters.
    """
    from .spectral import make_grid

    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError("scale factor must be positive")
    p = solution.params
    if p.T != 0:
        raise ValueError("the scaling symmetry needs T = 0: surface tension "
                         "carries a different power of the length scale")
    st = solution.state
    grid = make_grid(st.grid.N, st.grid.L / lam)
    d = None if p.d is None else p.d / lam
    c = p.c / math.sqrt(lam)
    new = SurfaceState(grid, st.y / lam, c, d)
    params = replace(p, c=c, d=d)
    res = float(np.max(np.abs(bernoulli_residual(new, params))))
    amp = None if solution.amplitude_target is None else solution.amplitude_target / lam
    return WaveSolution(solution.formulation, params, new, solution.status, res,
                        solution.newton_iterations, solution.residual_history, amp,
                        solution.config)


# -- non-existence logic ------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    conclusion: str
    justification: str
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        return cls(**data)


def corollary_verdict(identity: IdentityReport, energy: EnergyReport, tol: float) -> Verdict:
    """Classify a candidate in the zero-tension regime.

    For ``g <= 0`` the identity makes the left side nonnegative and the right
    side nonpositive, so only the flat state can satisfy it: the verdict is
    ``trivial`` when ``dirichlet <= tol`` and ``inconsistent`` otherwise.
    For ``g > 0`` the candidate is ``consistent-nontrivial`` when it has
    kinetic energy and satisfies the identity, ``trivial`` without kinetic
    energy, and ``inconsistent`` when the identity fails.
    """
    if identity.regime != "deep-T0" or identity.T != 0:
        raise ValueError("the non-existence argument applies to deep water without tension")
    if energy.d is not None:
        raise ValueError("energy report is for finite depth")
    if not tol > 0:
        raise ValueError("tol must be positive")
    D = energy.dirichlet
    res = identity.relative_residual
    g = identity.g
    if g <= 0:
        if D <= tol:
            return Verdict("trivial", f"g = {g!r} <= 0 and dirichlet = {D!r} <= tol: "
                           "the identity admits only the flat state", tol)
        return Verdict("inconsistent", f"g = {g!r} <= 0 forces rhs <= 0 < lhs, but "
                       f"dirichlet = {D!r} > tol (identity residual {res!r}): "
                       "not a solution", tol)
    if D <= tol:
        return Verdict("trivial", f"dirichlet = {D!r} <= tol", tol)
    if res > tol:
        return Verdict("inconsistent", f"identity residual {res!r} > tol", tol)
    ratio = identity.lhs / energy.potential_integral if energy.potential_integral else math.inf
    return Verdict("consistent-nontrivial",
                   f"identity holds to {res!r}; lhs / (g int eta^2) = {ratio!r}", tol)


def full_audit(solution) -> dict:
    """Energy, identity, proof terms, verdict (when defined) and the steady residual."""
    rep = energy_report(solution)
    ident = identity_residual(rep, solution.params)
    terms = proof_terms(solution)
    verdict = None
    if ident.regime == "deep-T0":
        verdict = corollary_verdict(ident, rep, solution.config.tol if solution.config else 1e-10)
    res = float(np.max(np.abs(bernoulli_residual(solution.state, solution.params))))
    return {"energy": rep, "identity": ident, "terms": terms, "verdict": verdict,
            "steady_residual": res, "converged": solution.status == CONVERGED}
