"""Newton solver for steady solitary waves in conformal variables.

The unknown is an even surface ``Y(xi)`` stored by its samples at
``xi = m * dxi``, ``m = 0 .. N/2``, so the period ``[-L, L)`` carries
``N/2 + 1`` unknowns.  The equation is the Bernoulli condition on the surface

    (c_t^2 / 2) / J - c^2 / 2 + g Y - T kappa = 0,

with ``J = x_xi^2 + y_xi^2`` and signed curvature ``kappa``.  Either ``c`` is
fixed or the crest value ``Y(0) = a`` is imposed and ``c`` is solved for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon
from scipy.sparse.linalg import LinearOperator, gmres

from .config import SolverConfig
from .conformal import SurfaceState
from .params import WaveParameters, minimum_speed
from .spectral import PeriodicGrid, apply_multiplier, even_operator, make_grid

FORMULATIONS = ("deep-capillary-gravity", "finite-depth-gravity")

CONVERGED = "converged"
NOT_CONVERGED = "not-converged"
STALLED = "line-search-failed"
FOLD = "singular-jacobian"
REFUSED = "refused-nonpositive-gravity"

# reciprocal condition number below which the Jacobian counts as singular
_RCOND_MIN = 1e-14


@dataclass(frozen=True, eq=False)
class WaveSolution:
    """Result of a steady solve; ``status`` tells whether it converged."""

    formulation: str
    params: WaveParameters
    state: SurfaceState
    status: str
    residual_norm: float
    newton_iterations: int
    residual_history: tuple[float, ...] = ()
    amplitude_target: float | None = None
    config: SolverConfig | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def grid(self) -> PeriodicGrid:
        return self.state.grid

    @property
    def amplitude(self) -> float:
        """Signed extreme surface elevation (largest in magnitude)."""
        y = self.state.y
        j = int(np.argmax(np.abs(y)))
        return float(y[j])

    @property
    def crest(self) -> float:
        return float(self.state.y[self.grid.half])

    def summary(self) -> dict:
        return {
            "formulation": self.formulation,
            "status": self.status,
            "converged": self.converged,
            "c": self.params.c,
            "amplitude": self.amplitude,
            "crest": self.crest,
            "residual_norm": self.residual_norm,
            "newton_iterations": self.newton_iterations,
            "N": self.grid.N,
            "L": self.grid.L,
        }


# -- helpers -----------------------------------------------------------------

def check_formulation(formulation: str, params: WaveParameters):
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; choose from {FORMULATIONS}")
    if formulation == "deep-capillary-gravity":
        if params.d is not None:
            raise ValueError("deep-water formulation takes no depth")
        if not params.T > 0 and params.g > 0:
            raise ValueError("deep-water capillary-gravity waves need T > 0")
    else:
        if params.d is None:
            raise ValueError("finite-depth formulation needs a depth d")
        if params.T != 0 and params.g > 0:
            raise ValueError("finite-depth formulation is pure gravity (T = 0)")
    if params.n != 2:
        raise ValueError("the steady solver works in two dimensions only")


def half_indices(grid: PeriodicGrid) -> np.ndarray:
    """Grid indices of ``xi = m dxi``, ``m = 0 .. N/2``."""
    return (grid.half + np.arange(grid.half + 1)) % grid.N


def even_extend(v: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    j = np.arange(grid.N)
    return np.asarray(v)[np.abs(j - grid.half)]


def symmetrize(y: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Even part of a grid function about ``xi = 0``."""
    j = np.arange(grid.N)
    mirror = (2 * grid.half - j) % grid.N
    return 0.5 * (y + y[mirror])


def bernoulli_residual(state: SurfaceState, params: WaveParameters) -> np.ndarray:
    """Dynamic boundary condition on the conformal grid."""
    ct = state.c_tilde
    return (0.5 * ct ** 2 / state.jacobian - 0.5 * state.c ** 2
            + params.g * state.y - params.T * state.curvature)


def _kh_derivative(k: np.ndarray, h: float) -> np.ndarray:
    """``d/dh [k coth(k h)] = -k^2 / sinh^2(k h)`` (0 at ``k = 0``)."""
    out = np.zeros_like(k)
    pos = k > 0
    e = np.exp(-2 * k[pos] * h)
    out[pos] = -4 * k[pos] ** 2 * e / (1 - e) ** 2
    return out


# -- initial guesses ------------------------------------------------------------

# crest of the lowest wavepacket branch relative to its envelope rate,
# in units of the capillary length sqrt(T/g); fitted once to converged waves
_PACKET_SCALE = 1.2


def initial_guess(kind: str, params: WaveParameters, grid: PeriodicGrid,
                  amplitude: float | None = None) -> SurfaceState:
    """Starting surface for Newton.

    ``kdv``: ``a sech^2(kappa xi)``, ``kappa = sqrt(3a / (4 d^3))``, speed
    ``sqrt(g (d + a))``; needs finite depth and ``0 < a/d <= 0.4``.

    ``wavepacket``: deep capillary-gravity below the minimum speed,
    ``A sech(mu xi) cos(k_r xi)`` with ``k_r = c^2 / (2T)`` and
    ``mu = sqrt(4 g T - c^4) / (2T)``.  ``amplitude`` overrides ``A``; the
    default is a depression of size ``1.2 mu T / g``.

    Both are shifted so the edge of the box sits at zero.
    """
    xi = grid.nodes
    if kind == "kdv":
        if params.d is None:
            raise ValueError("kdv guess needs finite depth")
        if amplitude is None:
            raise ValueError("kdv guess needs an amplitude")
        d = params.d
        if not 0 < amplitude / d <= 0.4:
            raise ValueError("kdv guess needs 0 < a/d <= 0.4")
        kap = math.sqrt(3 * amplitude / (4 * d ** 3))
        s = 1.0 / np.cosh(kap * xi) ** 2
        edge = s[0]
        y = amplitude * (s - edge) / (1 - edge)
        c = math.sqrt(params.g * (d + amplitude))
        return SurfaceState(grid, y, c, d)
    if kind == "wavepacket":
        if params.d is not None or not params.T > 0 or not params.g > 0:
            raise ValueError("wavepacket guess is for deep capillary-gravity waves")
        c = params.c
        cmin, _ = minimum_speed(params)
        if not 0 < c < cmin:
            raise ValueError(f"wavepacket guess needs 0 < c < c_min = {cmin:.6g}")
        T, g = params.T, params.g
        kr = c ** 2 / (2 * T)
        mu = math.sqrt(4 * g * T - c ** 4) / (2 * T)
        A = -_PACKET_SCALE * mu * T / g if amplitude is None else amplitude
        y = A * np.cos(kr * xi) / np.cosh(mu * xi)
        y = y - y[0]
        return SurfaceState(grid, y, c, None)
    raise ValueError(f"unknown guess kind {kind!r}")


# -- Newton -----------------------------------------------------------------

class _Problem:
    """Residual and Jacobian in the even half-vector unknowns."""

    def __init__(self, formulation, params, grid, amplitude):
        self.params = params
        self.grid = grid
        self.deep = formulation == "deep-capillary-gravity"
        self.amplitude = amplitude
        self.idx = half_indices(grid)
        M = grid.half
        beta = np.full(M + 1, 2.0)
        beta[0] = beta[-1] = 1.0
        self.mean_weights = beta / grid.N
        k = grid.wavenumbers
        self.k = k
        self.d1 = 1j * k
        self.d1[-1] = 0.0
        self.d2 = -(k ** 2) + 0j
        self._ops = None

    def state(self, v, c):
        return SurfaceState(self.grid, even_extend(v, self.grid), c, self.params.d)

    def residual(self, v, c, st=None):
        st = st or self.state(v, c)
        r = bernoulli_residual(st, self.params)[self.idx]
        if self.amplitude is not None:
            r = np.append(r, v[0] - self.amplitude)
        return r

    def _pieces(self, st):
        i = self.idx
        g, T = self.params.g, self.params.T
        xx, yx = st.x_xi[i], st.y_xi[i]
        xxx, yxx = st.x_xixi[i], st.y_xixi[i]
        J = st.jacobian[i]
        kap = st.curvature[i]
        ct = st.c_tilde
        return g, T, xx, yx, xxx, yxx, J, kap, ct

    def jacobian(self, v, c, st=None):
        """Dense Jacobian (rows: collocation points [+ amplitude])."""
        st = st or self.state(v, c)
        K, D1, D2, DK = self._operators(st)
        g, T, xx, yx, xxx, yxx, J, kap, ct = self._pieces(st)
        dJ = 2 * xx[:, None] * K + 2 * yx[:, None] * D1
        dk = (yxx[:, None] * K + xx[:, None] * D2 - xxx[:, None] * D1
              - yx[:, None] * DK) / J[:, None] ** 1.5 - (1.5 * kap / J)[:, None] * dJ
        A = -(0.5 * ct ** 2 / J ** 2)[:, None] * dJ - T * dk
        A[np.diag_indices_from(A)] += g
        if not self.deep:
            A += np.outer(self._dB_dh(st), self.mean_weights)
        dc = (ct ** 2 / c) / J - c
        if self.amplitude is None:
            return A
        n = A.shape[0]
        out = np.zeros((n + 1, n + 1))
        out[:n, :n] = A
        out[:n, n] = dc
        out[n, 0] = 1.0
        return out

    def _operators(self, st):
        key = st.h
        if self._ops is None or self._ops[0] != key:
            grid = self.grid
            ks = st.k_symbol()
            if self._ops is None:
                self._fixed = (even_operator(self.d1, grid), even_operator(self.d2, grid))
            ops = (even_operator(ks, grid), even_operator(self.d1 * ks, grid))
            self._ops = (key, ops)
        (K, DK), (D1, D2) = self._ops[1], self._fixed
        return K, D1, D2, DK

    def _dB_dh(self, st):
        """Sensitivity of the half-point residual to the conformal depth."""
        i = self.idx
        g, T, xx, yx, xxx, yxx, J, kap, ct = self._pieces(st)
        kh = _kh_derivative(self.k, st.h) + 0j
        Kh = apply_multiplier(st.y, kh, self.grid)
        DKh = apply_multiplier(Kh, self.d1, self.grid)
        Kh, DKh = Kh[i], DKh[i]
        dJ = 2 * xx * Kh
        dk = (Kh * yxx - yx * DKh) / J ** 1.5 - 1.5 * kap / J * dJ
        return -(0.5 * ct ** 2 / J ** 2) * dJ - (ct ** 2 / st.h) / J - T * dk

    def operator(self, v, c, st=None):
        """Matrix-free Jacobian action and a linear-theory preconditioner."""
        st = st or self.state(v, c)
        grid = self.grid
        ks = st.k_symbol()
        g, T, xx, yx, xxx, yxx, J, kap, ct = self._pieces(st)
        dBh = None if self.deep else self._dB_dh(st)
        dc = (ct ** 2 / c) / J - c
        n = grid.half + 1
        amp = self.amplitude is not None
        size = n + 1 if amp else n

        def mv(u):
            u = np.asarray(u).ravel()
            dv = u[:n]
            dY = even_extend(dv, grid)
            a = apply_multiplier(dY, ks, grid)
            b = apply_multiplier(dY, self.d1, grid)
            aa = apply_multiplier(a, self.d1, grid)
            bb = apply_multiplier(dY, self.d2, grid)
            i = self.idx
            a, b, aa, bb = a[i], b[i], aa[i], bb[i]
            dJ = 2 * xx * a + 2 * yx * b
            dk = (yxx * a + xx * bb - xxx * b - yx * aa) / J ** 1.5 - 1.5 * kap / J * dJ
            r = -(0.5 * ct ** 2 / J ** 2) * dJ - T * dk + g * dv
            if dBh is not None:
                r = r + dBh * (self.mean_weights @ dv)
            if amp:
                r = r + dc * u[n]
                r = np.append(r, dv[0])
            return r

        k = grid.wavenumbers
        sym = g - ct ** 2 * ks.real + T * k ** 2
        floor = 1e-3 * max(abs(g), 1e-300)
        sym = np.where(np.abs(sym) < floor, np.copysign(floor, sym + 0.0), sym)

        def pc(u):
            u = np.asarray(u).ravel()
            out = u.copy()
            full = even_extend(u[:n], grid)
            out[:n] = apply_multiplier(full, 1.0 / sym, grid)[self.idx]
            return out

        return (LinearOperator((size, size), matvec=mv, dtype=float),
                LinearOperator((size, size), matvec=pc, dtype=float))


def _norm(r):
    return float(np.max(np.abs(r))) if r.size else 0.0


def solve_steady(formulation: str, params: WaveParameters,
                 config: SolverConfig | None = None,
                 guess: SurfaceState | None = None, *,
                 amplitude: float | None = None,
                 use_dense: bool | None = None) -> WaveSolution:
    """Damped Newton iteration for a steady wave.

    With ``amplitude`` the crest value ``Y(0)`` is fixed and ``c`` becomes an
    unknown (started from ``guess.c``); otherwise ``c = params.c`` is held.
    ``g <= 0`` is refused: the flat state is returned with status
    ``refused-nonpositive-gravity``.  Failure to converge is reported through
    ``status`` with the last iterate and the residual history.
    """
    config = config or SolverConfig()
    errs = config.validate()
    if errs:
        raise ValueError("; ".join(errs))
    check_formulation(formulation, params)
    grid = guess.grid if guess is not None else make_grid(config.N, config.L)
    if not params.g > 0:
        flat = SurfaceState(grid, np.zeros(grid.N), params.c, params.d)
        return WaveSolution(formulation, params, flat, REFUSED, 0.0, 0, (), amplitude, config)
    if guess is None:
        if formulation == "finite-depth-gravity":
            if amplitude is None:
                raise ValueError("a guess or an amplitude is needed")
            guess = initial_guess("kdv", params, grid, amplitude)
        else:
            guess = initial_guess("wavepacket", params, grid)
    if (guess.depth is None) != (params.d is None) or (
            params.d is not None and guess.depth != params.d):
        raise ValueError("guess depth does not match the parameters")
    prob = _Problem(formulation, params, grid, amplitude)
    v = symmetrize(np.asarray(guess.y, dtype=float), grid)[prob.idx].copy()
    c = float(guess.c) if amplitude is not None else float(params.c)
    dense = (grid.half + 1 <= config.dense_limit) if use_dense is None else use_dense
    amp = amplitude is not None
    history = []
    status = NOT_CONVERGED
    iters = 0

    def evaluate(v, c):
        try:
            st = prob.state(v, c)
            st.check_nondegenerate()
            r = prob.residual(v, c, st)
        except ValueError:
            return None, None
        if not np.all(np.isfinite(r)):
            return None, None
        return st, r

    st, r = evaluate(v, c)
    if st is None:
        raise ValueError("initial guess is degenerate")
    rn = _norm(r)
    history.append(rn)
    while True:
        if rn <= config.tol:
            status = CONVERGED
            break
        if iters >= config.max_newton:
            break
        if dense:
            Jm = prob.jacobian(v, c, st)
            lu, piv = lu_factor(Jm, check_finite=False)
            rcond, _ = dgecon(lu, np.linalg.norm(Jm, 1), norm="1")
            if not rcond > _RCOND_MIN:
                status = FOLD
                break
            step = lu_solve((lu, piv), r)
        else:
            A, P = prob.operator(v, c, st)
            step, info = gmres(A, r, M=P, rtol=config.krylov_tol, atol=0.0,
                               restart=200, maxiter=20)
            if info < 0:
                status = FOLD
                break
        lam = 1.0
        accepted = False
        while lam >= config.min_step:
            vt = v - lam * step[: v.size]
            ctry = c - lam * step[v.size] if amp else c
            stt, rt = evaluate(vt, ctry)
            if stt is not None and _norm(rt) < rn:
                accepted = True
                break
            lam *= config.backtrack
        iters += 1
        if not accepted:
            status = STALLED
            break
        v, c, st, r = vt, ctry, stt, rt
        rn = _norm(r)
        history.append(rn)
    return WaveSolution(formulation, params.with_speed(c), st, status, rn, iters,
                        tuple(history), amplitude, config)


def refine(solution: WaveSolution, N: int, L: float | None = None,
           config: SolverConfig | None = None) -> WaveSolution:
    """Re-solve on another grid, starting from the interpolated solution.

    Keeps the same constraint (fixed crest or fixed speed).  With a longer
    box the old solution is padded by its edge value.
    """
    from .spectral import interpolate

    old = solution.state
    L = old.grid.L if L is None else float(L)
    new = make_grid(N, L)
    pts = new.nodes
    inside = np.abs(pts) <= old.grid.L
    y = np.full(N, old.y[0])
    y[inside] = interpolate(old.y, old.grid, pts[inside])
    guess = SurfaceState(new, y, solution.params.c, old.depth)
    cfg = (config or solution.config or SolverConfig())
    cfg = replace(cfg, N=N, L=L)
    return solve_steady(solution.formulation, solution.params, cfg, guess,
                        amplitude=solution.amplitude_target)
