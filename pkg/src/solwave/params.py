"""Physical parameters and linear dispersion."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class WaveParameters:
    """Gravity ``g``, surface tension ``T``, speed ``c``, depth ``d``, dimension ``n``.

    ``d is None`` means infinite depth.  ``g <= 0`` is representable so that
    the non-existence regime can be audited; the solvers refuse to iterate
    there.
    """

    g: float
    T: float = 0.0
    c: float = 0.0
    d: float | None = None
    n: int = 2

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.g, self.T, self.c)):
            raise ValueError("g, T and c must be finite")
        if self.T < 0:
            raise ValueError("surface tension T must be >= 0")
        if self.d is not None and not (math.isfinite(self.d) and self.d > 0):
            raise ValueError("depth d must be positive when given")
        if self.n not in (2, 3):
            raise ValueError("dimension n must be 2 or 3")

    @property
    def deep(self) -> bool:
        return self.d is None

    def with_speed(self, c: float) -> "WaveParameters":
        return replace(self, c=float(c))

    def to_dict(self) -> dict:
        return asdict(self)


def _speed_squared(k, p: WaveParameters):
    s = p.g / k + p.T * k
    if p.d is not None:
        s = s * np.tanh(k * p.d)
    return s


def linear_speed(k: float, params: WaveParameters) -> float:
    """Phase speed of infinitesimal waves of wavenumber ``k``.

    ``c^2 = (g/k + T k) tanh(k d)``; the ``tanh`` factor is dropped in deep
    water.
    """
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    s = float(_speed_squared(k, params))
    if not s > 0:
        raise ValueError("no real phase speed for these parameters")
    return math.sqrt(s)


def minimum_speed(params: WaveParameters) -> tuple[float, float]:
    """``(c_min, k_min)`` of the linear phase speed.

    Deep capillary-gravity: ``k_min = sqrt(g/T)``, ``c_min = (4 g T)^{1/4}``.
    Finite depth is minimised numerically; when the minimum sits at
    ``k -> 0`` the long-wave limit ``sqrt(g d)`` is returned with ``k_min = 0``.
    """
    g, T = params.g, params.T
    if not (g > 0 and (T > 0 or params.d is not None)):
        raise ValueError("minimum speed needs g > 0 and either T > 0 or finite depth")
    if params.d is None:
        return (4.0 * g * T) ** 0.25, math.sqrt(g / T)
    d = params.d
    shallow = math.sqrt(g * d)
    if T == 0:
        return shallow, 0.0
    res = minimize_scalar(lambda lk: _speed_squared(math.exp(lk), params),
                          bounds=(math.log(1e-6 / d), math.log(1e4 / d)), method="bounded",
                          options={"xatol": 1e-12})
    cm = math.sqrt(res.fun)
    if cm >= shallow:
        return shallow, 0.0
    return cm, math.exp(res.x)
