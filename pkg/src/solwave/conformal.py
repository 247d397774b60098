"""Conformal-variables description of a steady free surface.

The fluid domain is the image of the lower half-plane (deep water) or of the
strip ``-h < zeta < 0`` (flat bottom at ``y = -d``) under ``z(w)``,
``w = xi + i zeta``.  The surface is ``z(xi) = X(xi) + i Y(xi)``, with

    X - xi = C[Y - mean(Y)],   C = Hilbert (deep) or strip-conjugate(h),

so ``x_xi = 1 + C[Y_xi]`` and the physical period equals the conformal one.
In finite depth the conformal depth is tied to the trace, ``h = d + mean(Y)``.

In the frame moving with the wave the complex potential is ``-c_t w`` with
``c_t = c`` (deep) or ``c d / h`` (finite), so the far-field speed is ``c``.
The perturbation potential ``phi`` (fluid at rest far away) has traces

    psi = c Y,     phi = (c - c_t) xi + c (X - xi).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spectral import (MultiplierSymbol, PeriodicGrid, apply_multiplier,
                       extension_values, interpolate)


@dataclass(frozen=True, eq=False)
class SurfaceState:
    """Surface elevation ``y`` on the conformal grid plus the wave speed.

    ``depth`` is the physical depth ``d`` (``None`` for deep water).
    """

    grid: PeriodicGrid
    y: np.ndarray
    c: float
    depth: float | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (self.grid.N,):
            raise ValueError(f"y must have {self.grid.N} samples")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite values")
        if self.depth is not None and not self.depth > 0:
            raise ValueError("depth must be positive")
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "c", float(self.c))

    # -- basic derived quantities -------------------------------------------

    @property
    def deep(self) -> bool:
        return self.depth is None

    @cached_property
    def y_mean(self) -> float:
        return float(np.mean(self.y))

    @cached_property
    def h(self) -> float | None:
        """Conformal depth (``None`` in deep water)."""
        if self.deep:
            return None
        h = self.depth + self.y_mean
        if not h > 0:
            raise ValueError("surface dips below the bottom on average")
        return h

    @cached_property
    def c_tilde(self) -> float:
        return self.c if self.deep else self.c * self.depth / self.h

    def conjugate_symbol(self) -> MultiplierSymbol:
        if self.deep:
            return MultiplierSymbol("hilbert")
        return MultiplierSymbol("strip-conjugate", h=self.h)

    def dtn_symbol(self) -> MultiplierSymbol:
        """Dirichlet-to-Neumann map for a field with a Neumann bottom."""
        if self.deep:
            return MultiplierSymbol("dirichlet-to-neumann")
        return MultiplierSymbol("strip-dirichlet-to-neumann", h=self.h)

    def k_symbol(self) -> np.ndarray:
        """Symbol of ``Y -> (X - xi)_xi``: ``|k|`` or ``k coth(k h)``."""
        k = self.grid.wavenumbers
        if self.deep:
            return k.astype(complex)
        return (1j * k) * self.conjugate_symbol().values(k)

    def _d(self, f, order=1):
        return apply_multiplier(f, MultiplierSymbol("derivative", order=order), self.grid)

    @cached_property
    def x_per(self) -> np.ndarray:
        return apply_multiplier(self.y - self.y_mean, self.conjugate_symbol(), self.grid)

    @cached_property
    def x(self) -> np.ndarray:
        return self.grid.nodes + self.x_per

    @cached_property
    def x_xi(self) -> np.ndarray:
        return 1.0 + apply_multiplier(self.y, self.k_symbol(), self.grid)

    @cached_property
    def y_xi(self) -> np.ndarray:
        return self._d(self.y)

    @cached_property
    def x_xixi(self) -> np.ndarray:
        return self._d(self.x_xi)

    @cached_property
    def y_xixi(self) -> np.ndarray:
        return self._d(self.y, 2)

    @cached_property
    def jacobian(self) -> np.ndarray:
        return self.x_xi ** 2 + self.y_xi ** 2

    @cached_property
    def curvature(self) -> np.ndarray:
        return (self.x_xi * self.y_xixi - self.y_xi * self.x_xixi) / self.jacobian ** 1.5

    @cached_property
    def psi_trace(self) -> np.ndarray:
        return self.c * self.y

    @cached_property
    def phi_slope(self) -> float:
        """Coefficient of the secular part ``(c - c_t) xi`` of the potential."""
        return self.c - self.c_tilde

    @cached_property
    def phi_per(self) -> np.ndarray:
        return self.c * self.x_per

    @cached_property
    def phi_trace(self) -> np.ndarray:
        return self.phi_slope * self.grid.nodes + self.phi_per

    def check_nondegenerate(self):
        if not np.all(self.jacobian > 0) or not np.all(self.x_xi > 0):
            raise ValueError("degenerate surface: x_xi or J not positive")

    # -- bulk fields ---------------------------------------------------------

    def bulk_fields(self, xi, zeta, *, chunk: int = 256) -> dict[str, np.ndarray]:
        """Evaluate the extended fields at conformal points ``(xi, zeta)``.

        Each trace is extended independently (Dirichlet bottom for ``y``,
        Neumann bottom for ``x`` and ``phi``); conformality of the pair is
        not assumed.  Returns x, y, phi and their xi/zeta derivatives.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        xi, zeta = np.broadcast_arrays(xi, zeta)
        if np.any(zeta > 0):
            raise ValueError("point above the surface")
        if not self.deep and np.any(zeta < -self.h - 1e-14):
            raise ValueError("point below the bottom")
        g = self.grid
        k = g.wavenumbers
        h = self.h
        w = np.full(k.size, 2.0)
        w[0] = w[-1] = 1.0
        traces = np.vstack([self.x_per, self.y - self.y_mean, self.phi_per])
        fx, fy, fp = np.fft.rfft(traces) * w / g.N
        fx[0] = fy[0] = fp[0] = 0.0
        names = ("x", "y", "phi", "x_xi", "x_zeta", "y_xi", "y_zeta", "phi_xi", "phi_zeta")
        flat_s = xi.ravel()
        flat_z = np.maximum(zeta.ravel(), -h) if h is not None else zeta.ravel()
        out = {n: np.empty(flat_s.size) for n in names}
        for lo in range(0, flat_s.size, chunk):
            s = flat_s[lo:lo + chunk]
            z = flat_z[lo:lo + chunk]
            neu = extension_values(k, z, h)
            neu_z = extension_values(k, z, h, dz=1)
            if h is None:
                dir_, dir_z = neu, neu_z
            else:
                dir_ = extension_values(k, z, h, bottom="dirichlet")
                dir_z = extension_values(k, z, h, bottom="dirichlet", dz=1)
            e = np.exp(1j * np.outer(s + g.L, k))
            ike = 1j * k * e
            ike[:, -1] = 0.0
            sl = slice(lo, lo + s.size)
            out["x"][sl] = s + (fx * neu * e).sum(1).real
            out["x_xi"][sl] = 1.0 + (fx * neu * ike).sum(1).real
            out["x_zeta"][sl] = (fx * neu_z * e).sum(1).real
            out["y"][sl] = z + self.y_mean + (fy * dir_ * e).sum(1).real
            out["y_xi"][sl] = (fy * dir_ * ike).sum(1).real
            out["y_zeta"][sl] = 1.0 + (fy * dir_z * e).sum(1).real
            out["phi"][sl] = self.phi_slope * s + (fp * neu * e).sum(1).real
            out["phi_xi"][sl] = self.phi_slope + (fp * neu * ike).sum(1).real
            out["phi_zeta"][sl] = (fp * neu_z * e).sum(1).real
        return {n: v.reshape(xi.shape) for n, v in out.items()}

    def physical_gradient(self, fields) -> tuple[np.ndarray, np.ndarray]:
        """Chain rule from (xi, zeta) derivatives to (x, y) derivatives."""
        a, b = fields["x_xi"], fields["x_zeta"]
        c, d = fields["y_xi"], fields["y_zeta"]
        det = a * d - b * c
        # [phi_xi, phi_zeta] = M^T [phi_x, phi_y],  M = [[a, b], [c, d]]
        px = (d * fields["phi_xi"] - c * fields["phi_zeta"]) / det
        py = (-b * fields["phi_xi"] + a * fields["phi_zeta"]) / det
        return px, py

    def invert_map(self, x, y, *, tol=1e-13, maxiter=50):
        """Conformal coordinates of physical interior points (Newton)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        s = x.copy()
        z = np.minimum(y - self.y_mean, -1e-12)
        if not self.deep:
            z = np.maximum(z, -self.h)
        for _ in range(maxiter):
            f = self.bulk_fields(s, z)
            rx = f["x"] - x
            ry = f["y"] - y
            a, b, c, d = f["x_xi"], f["x_zeta"], f["y_xi"], f["y_zeta"]
            det = a * d - b * c
            ds = (d * rx - b * ry) / det
            dz = (-c * rx + a * ry) / det
            s = s - ds
            z = np.minimum(z - dz, 0.0)
            if not self.deep:
                z = np.maximum(z, -self.h)
            if max(np.abs(ds).max(), np.abs(dz).max()) < tol:
                break
        return s, z

    # -- physical resampling ---------------------------------------------------

    def conformal_abscissae(self, x_targets, *, tol=1e-14, maxiter=60) -> np.ndarray:
        """Solve ``X(xi) = x`` for each target by Newton iteration."""
        xt = np.asarray(x_targets, dtype=float)
        self.check_nondegenerate()
        g = self.grid
        # X is increasing, so the piecewise-linear inverse is a close start
        xi_ext = np.append(g.nodes, g.L)
        x_ext = np.append(self.x, self.x[0] + 2 * g.L)
        s = np.interp(xt, x_ext, xi_ext)
        stack = np.vstack([self.x_per, self.x_xi])
        active = np.arange(s.size)
        for _ in range(maxiter):
            xp, xx = interpolate(stack, g, s[active])
            step = (s[active] + xp - xt[active]) / xx
            s[active] -= step
            active = active[np.abs(step) >= tol]
            if active.size == 0:
                break
        return s

    @cached_property
    def physical_samples(self) -> dict[str, np.ndarray]:
        """Surface traces on the uniform physical grid ``x_m = -L + 2Lm/N``.

        The elevation derivatives are taken spectrally in ``x``.
        """
        g = self.grid
        xs = g.nodes.copy()
        s = self.conformal_abscissae(xs)
        k = g.wavenumbers
        if self.deep:
            dtn_y = k.astype(complex)
        else:
            dtn_y = MultiplierSymbol("strip-extension", zeta=0.0, h=self.h,
                                     bottom="dirichlet", dz=1).values(k)
            dtn_y[0] = 0.0
        dtn_x = self.dtn_symbol().values(k)
        der = 1j * k
        der[-1] = 0.0
        fields = {}
        vals = interpolate(np.vstack([self.y, self.x_per, self.phi_per]), g, s)
        fields["eta"] = vals[0]
        fields["phi"] = self.phi_slope * s + vals[2]
        dxi = interpolate(np.vstack([self.y, self.x_per, self.phi_per]), g, s, symbol=der)
        dze_x = interpolate(self.x_per, g, s, symbol=dtn_x)
        dze_y = interpolate(self.y, g, s, symbol=dtn_y)
        dze_p = interpolate(self.phi_per, g, s, symbol=dtn_x)
        bulk = {
            "x_xi": 1.0 + dxi[1], "x_zeta": dze_x,
            "y_xi": dxi[0], "y_zeta": 1.0 + dze_y,
            "phi_xi": self.phi_slope + dxi[2], "phi_zeta": dze_p,
        }
        px, py = self.physical_gradient(bulk)
        eta = fields["eta"]
        fields["x"] = xs
        fields["xi"] = s
        fields["eta_x"] = apply_multiplier(eta, MultiplierSymbol("derivative"), g)
        fields["eta_xx"] = apply_multiplier(eta, MultiplierSymbol("derivative", order=2), g)
        fields["phi_x"] = px
        fields["phi_y"] = py
        return fields
