"""Energy functionals from surface traces.

Everything is integrated over the conformal period with ``dx = x_xi dxi``
and ``dS = sqrt(J) dxi``.  The bulk Dirichlet integral uses the trace form
``int phi d_nu phi dS``, which in conformal variables is ``int phi phi_zeta dxi``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .conformal import SurfaceState
from .spectral import MultiplierSymbol, apply_multiplier, quad_periodic

# relative gaps below this are treated as agreement at round-off
_FLOOR = 1e-14


@dataclass(frozen=True)
class EnergyReport:
    dirichlet: float
    potential_integral: float
    surface_integral: float
    bottom_integral: float
    N: int
    L: float
    g: float
    T: float
    d: float | None
    tail_elevation: float
    tail_slope: float
    tail_exponent: float | None

    @property
    def kinetic_energy(self) -> float:
        return 0.5 * self.dirichlet

    @property
    def potential_energy(self) -> float:
        return 0.5 * self.potential_integral

    @property
    def surface_energy(self) -> float:
        return 0.5 * self.surface_integral

    @property
    def surface_integral_half(self) -> float:
        """``(T/2) int (sqrt(1 + eta_x^2) - 1)``, the half-coefficient variant."""
        return 0.5 * self.surface_integral

    def scaled(self, factor: float) -> "EnergyReport":
        """All four integrals multiplied by ``factor`` (metadata kept)."""
        return EnergyReport(self.dirichlet * factor, self.potential_integral * factor,
                            self.surface_integral * factor, self.bottom_integral * factor,
                            self.N, self.L, self.g, self.T, self.d, self.tail_elevation,
                            self.tail_slope, self.tail_exponent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(kinetic_energy=self.kinetic_energy, potential_energy=self.potential_energy,
                 surface_energy=self.surface_energy)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "EnergyReport":
        keep = {k: data[k] for k in cls.__dataclass_fields__}
        return cls(**keep)


def _state(obj) -> SurfaceState:
    return obj.state if hasattr(obj, "state") else obj


def potential_trace(state: SurfaceState) -> np.ndarray:
    """``phi_zeta`` on the surface (normal derivative times ``sqrt(J)``)."""
    return apply_multiplier(state.phi_per, state.dtn_symbol(), state.grid)


def dirichlet_integral(state: SurfaceState) -> float:
    return quad_periodic(state.phi_trace * potential_trace(state), state.grid)


def bottom_traces(state: SurfaceState) -> tuple[np.ndarray, np.ndarray]:
    """``(phi_xi, x_xi)`` along the flat bottom ``zeta = -h``."""
    g = state.grid
    k = g.wavenumbers
    sech = MultiplierSymbol("bottom-trace", h=state.h).values(k)
    d1 = 1j * k * sech
    phi_xi = state.phi_slope + apply_multiplier(state.phi_per, d1, g)
    x_xi = 1.0 + apply_multiplier(state.x_per, d1, g)
    return phi_xi, x_xi


def bottom_integral(state: SurfaceState) -> float:
    """``d int |grad phi(x, -d)|^2 dx``; on the bottom ``y_xi = 0``."""
    if state.deep:
        return 0.0
    phi_xi, x_xi = bottom_traces(state)
    return state.depth * quad_periodic(phi_xi ** 2 / x_xi, state.grid)


def tail_diagnostics(state: SurfaceState) -> tuple[float, float, float | None]:
    """Edge elevation, edge slope and a power-law decay exponent of ``|y|``.

    The exponent is the least-squares slope of ``log max_{|xi|>=s}|y|``
    against ``log s`` over ``L/4 <= s <= L``; ``None`` when the tail is at
    round-off or the fit is meaningless.
    """
    g = state.grid
    y = state.y
    edge = float(abs(y[0]))
    slope = float(abs(state.y_xi[0]))
    xi = g.nodes
    pos = xi >= 0
    s = xi[pos]
    a = np.abs(y[pos])
    env = np.maximum.accumulate(a[::-1])[::-1]
    sel = (s >= g.L / 4) & (env > 1e-13)
    if sel.sum() < 4:
        return edge, slope, None
    p = np.polyfit(np.log(s[sel]), np.log(env[sel]), 1)
    return edge, slope, float(p[0])


def energy_report(solution) -> EnergyReport:
    """All energy integrals of a solution (or bare ``SurfaceState``)."""
    st = _state(solution)
    params = getattr(solution, "params", None)
    g_ = params.g if params is not None else float("nan")
    T = params.T if params is not None else 0.0
    st.check_nondegenerate()
    grid = st.grid
    if not np.all(np.isfinite(st.phi_trace)):
        raise ValueError("non-finite traces")
    D = dirichlet_integral(st)
    P = g_ * quad_periodic(st.y ** 2 * st.x_xi, grid)
    S = T * quad_periodic(np.sqrt(st.jacobian) - st.x_xi, grid) if T else 0.0
    B = bottom_integral(st)
    edge, slope, expo = tail_diagnostics(st)
    return EnergyReport(float(D), float(P), float(S), float(B), grid.N, grid.L, g_, T,
                        st.depth, edge, slope, expo)


# -- kinetic energy two ways --------------------------------------------------

@dataclass(frozen=True)
class KineticCrosscheck:
    trace_value: float
    by_parts_value: float
    relative_gap: float
    flag: str

    def as_tuple(self):
        return self.trace_value, self.by_parts_value, self.relative_gap


def _gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0:
        return 0.0
    return abs(a - b) / max(scale, _FLOOR)


def crosscheck_traces(x, phi, dphi_dn_ds, eta_x, c, *, tol=1e-6) -> KineticCrosscheck:
    """Kinetic energy from sampled traces on a uniform physical grid.

    ``dphi_dn_ds`` is ``grad phi . nu`` times ``dS/dx`` (equal to ``phi_y``
    on a flat surface).  The trace value is ``int phi dphi_dn_ds dx``; the
    integration-by-parts value is ``-c int phi eta_x dx``.  A gap above
    ``tol`` is flagged ``not-a-solution``: the two agree only when the
    kinematic condition holds.
    """
    x = np.asarray(x, dtype=float)
    dx = x[1] - x[0]
    tv = float(np.sum(np.asarray(phi) * np.asarray(dphi_dn_ds)) * dx)
    pv = float(-c * np.sum(np.asarray(phi) * np.asarray(eta_x)) * dx)
    gap = _gap(tv, pv)
    return KineticCrosscheck(tv, pv, gap, "not-a-solution" if gap > tol else "consistent")


def kinetic_crosscheck(solution, *, tol: float = 1e-6) -> KineticCrosscheck:
    """Dirichlet integral from the conformal trace formula against
    ``-c int [phi] eta_x dx`` evaluated on the uniform physical grid."""
    st = _state(solution)
    tv = dirichlet_integral(st)
    ps = st.physical_samples
    pv = float(-st.c * np.sum(ps["phi"] * ps["eta_x"]) * st.grid.spacing)
    gap = _gap(tv, pv)
    return KineticCrosscheck(tv, pv, gap, "not-a-solution" if gap > tol else "consistent")


def relative_difference(a: float, b: float) -> float:
    return _gap(a, b)


def equipartition_ratio(report: EnergyReport) -> float:
    return report.kinetic_energy / report.potential_energy if report.potential_energy else math.nan
