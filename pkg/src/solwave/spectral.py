"""Periodic grids, Fourier multipliers and quadrature on [-L, L).

All transforms use the real FFT.  A function sampled on ``PeriodicGrid`` is
represented by its ``rfft`` coefficients at the nonnegative wavenumbers
``k_q = pi q / L``, ``q = 0 .. N/2``.

Hilbert convention: ``H[cos(k x)] = sin(k x)`` for ``k > 0``, i.e. symbol
``-i sgn(k)``.  The zero mode of the Hilbert and strip-conjugate symbols is 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "PeriodicGrid",
    "MultiplierSymbol",
    "make_grid",
    "apply_multiplier",
    "quad_periodic",
    "dealiased_product",
    "interpolate",
    "even_operator",
    "extension_values",
]


@dataclass(frozen=True)
class PeriodicGrid:
    N: int
    L: float
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def wavenumbers(self) -> np.ndarray:
        """Nonnegative wavenumbers matching ``np.fft.rfft`` output."""
        return np.pi * np.arange(self.N // 2 + 1) / self.L

    @property
    def half(self) -> int:
        return self.N // 2


def make_grid(N: int, L: float) -> PeriodicGrid:
    if int(N) != N:
        raise ValueError("N must be an integer")
    N = int(N)
    if N % 2:
        raise ValueError("N must be even")
    if N < 8:
        raise ValueError("N must be at least 8")
    if not np.isfinite(L) or L <= 0:
        raise ValueError("L must be positive")
    L = float(L)
    nodes = -L + 2.0 * L * np.arange(N) / N
    nodes.setflags(write=False)
    return PeriodicGrid(N, L, nodes)


# -- symbols ---------------------------------------------------------------

_KINDS = (
    "derivative",
    "hilbert",
    "half-plane-extension",
    "strip-extension",
    "strip-conjugate",
    "bottom-trace",
    "dirichlet-to-neumann",
    "strip-dirichlet-to-neumann",
)


def _expm(x):
    return np.exp(-np.asarray(x, dtype=float))


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier ``m(k)`` evaluated at ``k >= 0``.

    kind
        ``derivative`` (``(i k)^order``), ``hilbert`` (``-i sgn k``),
        ``half-plane-extension`` (``|k|^dz e^{|k| zeta}``, harmonic extension
        into ``zeta < 0`` and its ``dz``-th vertical derivative),
        ``strip-extension`` (extension into a strip of depth ``h`` with a
        ``neumann`` or ``dirichlet`` bottom), ``strip-conjugate``
        (``-i coth(k h)``), ``bottom-trace`` (``1/cosh(k h)``),
        ``dirichlet-to-neumann`` (``|k|``) and ``strip-dirichlet-to-neumann``
        (``k tanh(k h)``).
    """

    kind: str
    zeta: float = 0.0
    h: float | None = None
    order: int = 1
    dz: int = 0
    bottom: str = "neumann"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.kind in ("strip-extension", "strip-conjugate", "bottom-trace",
                         "strip-dirichlet-to-neumann"):
            if self.h is None or not self.h > 0:
                raise ValueError(f"{self.kind} needs a positive depth h")
        if self.kind in ("half-plane-extension", "strip-extension"):
            if np.any(np.asarray(self.zeta) > 0):
                raise ValueError("extension level zeta must be <= 0")
            if self.kind == "strip-extension" and np.any(np.asarray(self.zeta) < -self.h):
                raise ValueError("extension level below the strip bottom")
            if self.dz not in (0, 1):
                raise ValueError("dz must be 0 or 1")
        if self.bottom not in ("neumann", "dirichlet"):
            raise ValueError("bottom must be 'neumann' or 'dirichlet'")

    def values(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        kind = self.kind
        if kind == "derivative":
            return (1j * k) ** self.order
        if kind == "hilbert":
            return -1j * np.sign(k)
        if kind == "dirichlet-to-neumann":
            return np.abs(k).astype(complex)
        if kind == "half-plane-extension":
            return extension_values(k, self.zeta, dz=self.dz)
        h = self.h
        e2 = _expm(2 * k * h)
        out = np.zeros(k.shape, dtype=complex)
        pos = k > 0
        kp = k[pos]
        if kind == "strip-conjugate":
            out[pos] = -1j * (1 + e2[pos]) / (1 - e2[pos])
            return out
        if kind == "strip-dirichlet-to-neumann":
            out[pos] = kp * (1 - e2[pos]) / (1 + e2[pos])
            return out
        if kind == "bottom-trace":
            return (2 * np.exp(-k * h) / (1 + e2)).astype(complex)
        return extension_values(k, self.zeta, h, bottom=self.bottom, dz=self.dz)


def extension_values(k, zeta, h=None, *, bottom="neumann", dz=0) -> np.ndarray:
    """Harmonic-extension symbols, vectorised over ``zeta``.

    Returns ``m(k, zeta)`` broadcast as ``zeta[..., None]`` against ``k``:
    ``e^{|k| zeta}`` for the half-plane (``h is None``), otherwise
    ``cosh(k(zeta+h))/cosh(kh)`` (``neumann``) or
    ``sinh(k(zeta+h))/sinh(kh)`` (``dirichlet``).  ``dz=1`` gives the
    ``zeta``-derivative.  Written with decaying exponentials only.
    """
    k = np.abs(np.asarray(k, dtype=float))
    z = np.asarray(zeta, dtype=float)[..., None]
    if h is None:
        return (k ** dz * np.exp(k * z)).astype(complex)
    ez = np.exp(k * z)
    eb = _expm(2 * k * (z + h))
    e2 = _expm(2 * k * h)
    if bottom == "neumann":
        if dz == 0:
            out = ez * (1 + eb) / (1 + e2)
        else:
            out = k * ez * (1 - eb) / (1 + e2)
        return out.astype(complex)
    pos = k > 0
    out = np.empty(np.broadcast(z, k).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        if dz == 0:
            body = ez * (1 - eb) / (1 - e2)
            lim = (z + h) / h
        else:
            body = k * ez * (1 + eb) / (1 - e2)
            lim = np.broadcast_to(1.0 / h, z.shape)
    out[...] = np.where(pos, body, lim)
    return out.astype(complex)


def _check_samples(samples, grid: PeriodicGrid | None = None) -> np.ndarray:
    f = np.asarray(samples, dtype=float)
    if grid is not None and f.shape[-1] != grid.N:
        raise ValueError(f"expected {grid.N} samples, got {f.shape[-1]}")
    if not np.all(np.isfinite(f)):
        raise ValueError("samples contain non-finite values")
    return f


def _odd(sym: np.ndarray) -> bool:
    return bool(np.any(np.abs(sym.imag) > 0))


def apply_multiplier(samples, symbol: MultiplierSymbol | np.ndarray,
                     grid: PeriodicGrid) -> np.ndarray:
    """Apply a Fourier multiplier along the last axis.

    ``symbol`` may be a ``MultiplierSymbol`` or an array of values at
    ``grid.wavenumbers``.  Symbols with a non-real Nyquist value have their
    Nyquist coefficient dropped so the output stays real.
    """
    f = _check_samples(samples, grid)
    if isinstance(symbol, MultiplierSymbol):
        sym = symbol.values(grid.wavenumbers)
    else:
        sym = np.asarray(symbol)
    F = np.fft.rfft(f) * sym
    if np.iscomplexobj(sym) and sym[-1].imag != 0:
        F[..., -1] = 0
    return np.fft.irfft(F, n=grid.N)


def quad_periodic(samples, grid: PeriodicGrid) -> float:
    """Trapezoidal rule over one period (pairwise-summed)."""
    f = _check_samples(samples, grid)
    return float(np.sum(f) * grid.spacing)


def dealiased_product(a, b, grid: PeriodicGrid) -> np.ndarray:
    """Product of two grid functions with 2x zero-padding, truncated back.

    Returns the product band-limited to the grid's wavenumbers with no
    aliasing from the modes above Nyquist.
    """
    a = _check_samples(a, grid)
    b = _check_samples(b, grid)
    N = grid.N
    A = np.zeros(N + 1, dtype=complex)
    B = np.zeros(N + 1, dtype=complex)
    A[: N // 2 + 1] = np.fft.rfft(a)
    B[: N // 2 + 1] = np.fft.rfft(b)
    A[N // 2] *= 0.5
    B[N // 2] *= 0.5
    pa = np.fft.irfft(A, n=2 * N) * 2
    pb = np.fft.irfft(B, n=2 * N) * 2
    P = np.fft.rfft(pa * pb)[: N // 2 + 1] / 2
    P[N // 2] *= 2
    return np.fft.irfft(P, n=N)


def interpolate(samples, grid: PeriodicGrid, points, *,
                symbol: MultiplierSymbol | np.ndarray | None = None,
                chunk: int = 512) -> np.ndarray:
    """Evaluate the trigonometric interpolant at arbitrary abscissae.

    With ``symbol`` the multiplier is applied to the coefficients first, so
    ``interpolate(f, g, pts, symbol=MultiplierSymbol('derivative'))`` returns
    ``f'`` at ``pts``.  The Nyquist term is treated as a cosine.
    ``samples`` may be 2-D (fields along the first axis).
    """
    f = _check_samples(samples, grid)
    pts = np.asarray(points, dtype=float)
    F = np.fft.rfft(f)
    k = grid.wavenumbers
    if symbol is not None:
        sym = symbol.values(k) if isinstance(symbol, MultiplierSymbol) else np.asarray(symbol)
        F = F * sym
    w = np.full(k.size, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    F = F * w / grid.N
    if symbol is not None and np.iscomplexobj(sym) and sym[-1].imag != 0:
        F[..., -1] = 0
    shape = pts.shape
    flat = pts.ravel()
    single = F.ndim == 1
    F2 = F[None, :] if single else F
    out = np.empty((F2.shape[0], flat.size))
    for s in range(0, flat.size, chunk):
        E = np.exp(1j * np.outer(flat[s:s + chunk] + grid.L, k))
        out[:, s:s + chunk] = (F2 @ E.T).real
    if single:
        return out[0].reshape(shape)
    return out.reshape((F2.shape[0],) + shape)


# -- dense operators on even functions ---------------------------------------

@lru_cache(maxsize=8)
def _cos_sin_tables(N: int):
    M = N // 2
    q = np.arange(M + 1)
    qm = np.outer(q, q) % N
    ang = 2 * np.pi * qm / N
    return np.cos(ang), np.sin(ang)


def even_operator(symbol_values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Dense matrix of a multiplier acting on even grid functions.

    An even function is stored by its values ``v[m] = f(m * dx)``,
    ``m = 0 .. N/2``.  The returned ``(N/2+1, N/2+1)`` matrix maps ``v`` to the
    multiplier output sampled at the same abscissae.  Real symbols give even
    outputs; purely imaginary symbols give odd outputs.
    """
    N = grid.N
    M = N // 2
    C, S = _cos_sin_tables(N)
    s = np.asarray(symbol_values)
    gamma = np.full(M + 1, 2.0)
    gamma[0] = gamma[-1] = 1.0
    beta = np.full(M + 1, 2.0)
    beta[0] = beta[-1] = 1.0
    if _odd(s):
        sig = s.imag.copy()
        sig[-1] = 0.0
        op = -(S * (gamma * sig)) @ C
    else:
        op = (C * (gamma * s.real)) @ C
    return op * beta / N
