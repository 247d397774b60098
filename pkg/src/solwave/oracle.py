"""Closed-form harmonic fields below a flat surface and direct-quadrature
checks of the two Green identities on a truncated half-ball.

Coordinates are ``(x, y)`` in two dimensions and ``(x1, x2, y)`` in three;
the fluid is ``y < 0`` and the surface is ``y = 0``.  The truncated domain is
the half-ball of radius ``R`` centred on the surface point below the
singularity.  Three-dimensional fields are axisymmetric about that vertical
axis, so their integrals reduce to ``(rho, y)`` with weight ``2 pi rho``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_gegenbauer

KINDS = ("pole2d", "source3d", "nonharmonic-test")
_TAIL_TERMS = 16


@dataclass(frozen=True)
class ManufacturedField:
    """``pole2d``: ``s Re(1/(z - i a))``; ``source3d``: ``s / |X - (0, 0, a)|``;
    ``nonharmonic-test``: ``s x^2 exp(-(x^2 + y^2) / a^2)`` (2-D).

    ``offset`` shifts the field horizontally (along ``x`` or ``x1``).
    """

    kind: str
    strength: float = 1.0
    height: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; choose from {KINDS}")
        if not self.height > 0:
            raise ValueError("height a must be positive")

    @property
    def n(self) -> int:
        return 3 if self.kind == "source3d" else 2

    @property
    def harmonic(self) -> bool:
        return self.kind != "nonharmonic-test"


def eval_field(field: ManufacturedField, point) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, gradient (last axis) and Laplacian at points of shape ``(..., n)``."""
    p = np.asarray(point, dtype=float)
    if p.shape[-1] != field.n:
        raise ValueError(f"points must have {field.n} coordinates")
    if np.any(p[..., -1] > 0):
        raise ValueError("point above the surface")
    s, a = field.strength, field.height
    if field.kind == "pole2d":
        u = p[..., 0] - field.offset
        v = p[..., 1] - a
        r2 = u * u + v * v
        val = s * u / r2
        grad = np.stack([s * (v * v - u * u) / r2 ** 2, -2 * s * u * v / r2 ** 2], axis=-1)
        return val, grad, np.zeros_like(val)
    if field.kind == "source3d":
        q = p.copy()
        q[..., 0] -= field.offset
        q[..., 2] -= a
        rho = np.sqrt(np.sum(q * q, axis=-1))
        val = s / rho
        grad = -s * q / rho[..., None] ** 3
        return val, grad, np.zeros_like(val)
    u = p[..., 0] - field.offset
    y = p[..., 1]
    w = np.exp(-(u * u + y * y) / a ** 2)
    val = s * u * u * w
    gx = s * (2 * u - 2 * u ** 3 / a ** 2) * w
    gy = s * (-2 * u * u * y / a ** 2) * w
    lap_w = (4 * (u * u + y * y) / a ** 4 - 4 / a ** 2) * w
    lap = s * (2 * w + 4 * u * (-2 * u / a ** 2) * w + u * u * lap_w)
    return val, np.stack([gx, gy], axis=-1), lap


# -- quadrature --------------------------------------------------------------

@lru_cache(maxsize=32)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panels(edges, order):
    t, w = _gauss(order)
    e = np.asarray(edges, dtype=float)
    a, b = e[:-1], e[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _radial_edges(a, R):
    e = [0.0, a / 16]
    while e[-1] * 2 < R:
        e.append(e[-1] * 2)
    e.append(R)
    return np.array(e)


def _check(field, R, resolution):
    if not R > 10 * field.height:
        raise ValueError(f"R = {R} too small: need R > 10 a = {10 * field.height}")
    if int(resolution) != resolution or resolution < 4:
        raise ValueError("resolution (Gauss nodes per panel) must be an integer >= 4")


def _bulk_nodes(field, R, res):
    """Quadrature nodes and weights for the truncated half-ball."""
    r, wr = _panels(_radial_edges(field.height, R), res)
    if field.n == 2:
        th, wt = _panels(np.linspace(-math.pi, 0.0, 9), res)
        rr, tt = np.meshgrid(r, th, indexing="ij")
        w = np.outer(wr, wt) * rr
        pts = np.stack([field.offset + rr * np.cos(tt), rr * np.sin(tt)], axis=-1)
        return pts, w
    th, wt = _panels(np.linspace(math.pi / 2, math.pi, 5), res)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    w = 2 * math.pi * np.outer(wr, wt) * rr ** 2 * np.sin(tt)
    rho, y = rr * np.sin(tt), rr * np.cos(tt)
    pts = np.stack([field.offset + rho, np.zeros_like(rho), y], axis=-1)
    return pts, w


@lru_cache(maxsize=None)
def _tail_angles(n: int, m: int) -> float:
    t, w = _gauss(64)
    if n == 2:
        th = -math.pi / 2 * (t + 1)          # (-pi, 0)
        return float(math.pi / 2 * np.sum(w * eval_gegenbauer(m, 2, np.sin(th))))
    x = 0.5 * (t - 1)                        # (-1, 0)
    return float(0.5 * np.sum(w * eval_gegenbauer(m, 2, x)))


def dirichlet_tail(field: ManufacturedField, R: float) -> float:
    """``iint |grad phi|^2`` outside the half-ball, from the multipole series
    ``|X - a e_y|^{-4} = r^{-4} sum_m C_m^{(2)}(cos) (a/r)^m``."""
    if not field.harmonic:
        return 0.0
    s, a = field.strength, field.height
    tot = 0.0
    for m in range(_TAIL_TERMS):
        if field.n == 2:
            tot += a ** m * _tail_angles(2, m) * R ** (-2 - m) / (2 + m)
        else:
            tot += 2 * math.pi * a ** m * _tail_angles(3, m) * R ** (-1 - m) / (1 + m)
    return s * s * tot


@dataclass(frozen=True)
class BulkEnergy:
    value: float
    truncated: float
    tail: float
    R: float
    resolution: int


def bulk_dirichlet_energy(field: ManufacturedField, R: float | None = None,
                          resolution: int = 24) -> BulkEnergy:
    """``iint |grad phi|^2`` over the fluid half-space: direct tensor Gauss
    quadrature on the half-ball of radius ``R`` (default ``100 a``) plus the
    analytic tail."""
    R = 100 * field.height if R is None else float(R)
    _check(field, R, resolution)
    pts, w = _bulk_nodes(field, R, resolution)
    _, grad, _ = eval_field(field, pts)
    inner = float(np.sum(w * np.sum(grad * grad, axis=-1)))
    tail = dirichlet_tail(field, R)
    return BulkEnergy(inner + tail, inner, tail, R, int(resolution))


# -- Green identities ----------------------------------------------------------

@dataclass(frozen=True)
class GreenAuditReport:
    kind: str
    n: int
    R: float
    resolution: int
    identity1_lhs: float
    identity1_rhs: float
    identity1_defect: float
    laplacian_correction: float
    identity1_corrected_defect: float
    identity2_lhs: float
    identity2_rhs: float
    identity2_defect: float
    dirichlet: float
    dirichlet_tail: float
    surface_flux: float

    def to_dict(self) -> dict:
        return asdict(self)


def _rel(lhs, rhs, scale=0.0):
    s = max(abs(lhs), abs(rhs), scale)
    return abs(lhs - rhs) / s if s > 0 else 0.0


def _boundary(field, R, res):
    """Boundary integrals over the half-ball.

    Returns ``(flux1, flux2, surface part of flux1, |surface| + |arc| of flux2)``
    with ``flux1 = int phi d_nu phi dS`` and
    ``flux2 = int [(X . grad phi) d_nu phi - |grad phi|^2 (X . nu) / 2] dS``.
    """
    a = field.height
    if field.n == 2:
        half = _radial_edges(a, R)
        edges = np.concatenate([-half[::-1], half[1:]])
        x, wx = _panels(edges, res)
        pts = np.stack([field.offset + x, np.zeros_like(x)], axis=-1)
        val, g, _ = eval_field(field, pts)
        surf1 = np.sum(wx * val * g[:, 1])
        surf2 = np.sum(wx * (x * g[:, 0]) * g[:, 1])
        th, wt = _panels(np.linspace(-math.pi, 0.0, 9), res)
        nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
        pts = np.stack([field.offset + R * nu[:, 0], R * nu[:, 1]], axis=-1)
        val, g, _ = eval_field(field, pts)
        dn = np.sum(g * nu, axis=-1)
        arc1 = np.sum(wt * R * val * dn)
        arc2 = np.sum(wt * R * (R * dn * dn - 0.5 * R * np.sum(g * g, axis=-1)))
    else:
        rho, wr = _panels(_radial_edges(a, R), res)
        pts = np.stack([field.offset + rho, np.zeros_like(rho), np.zeros_like(rho)], axis=-1)
        val, g, _ = eval_field(field, pts)
        wr = 2 * math.pi * rho * wr
        surf1 = np.sum(wr * val * g[:, 2])
        surf2 = np.sum(wr * (rho * g[:, 0]) * g[:, 2])
        th, wt = _panels(np.linspace(math.pi / 2, math.pi, 5), res)
        nu_r, nu_y = np.sin(th), np.cos(th)
        pts = np.stack([field.offset + R * nu_r, np.zeros_like(th), R * nu_y], axis=-1)
        val, g, _ = eval_field(field, pts)
        dn = g[:, 0] * nu_r + g[:, 2] * nu_y
        wa = 2 * math.pi * R ** 2 * np.sin(th) * wt
        arc1 = np.sum(wa * val * dn)
        arc2 = np.sum(wa * (R * dn * dn - 0.5 * R * np.sum(g * g, axis=-1)))
    return (float(surf1 + arc1), float(surf2 + arc2), float(surf1),
            float(abs(surf2) + abs(arc2)))


def surface_flux_tail(field: ManufacturedField, R: float) -> float:
    """``int phi phi_y`` over the surface outside radius ``R``."""
    s, a = field.strength, field.height
    if field.kind == "pole2d":
        # 2 s^2 a x^2 / (x^2 + a^2)^3 on both sides, expanded in (a/x)^2
        tot = sum(math.comb(m + 2, 2) * (-1) ** m * a ** (2 * m) * R ** (-3 - 2 * m) / (3 + 2 * m)
                  for m in range(_TAIL_TERMS))
        return 2 * 2 * s * s * a * tot
    if field.kind == "source3d":
        return math.pi * s * s * a / (R * R + a * a)
    return 0.0


def green_identity_audit(field: ManufacturedField, R: float | None = None,
                         resolution: int = 24) -> GreenAuditReport:
    """Both Green identities on the half-ball of radius ``R``.

    Identity 1: ``int phi d_nu phi dS = iint |grad phi|^2 + iint phi lap phi``.
    Identity 2: ``int [(X.grad phi) d_nu phi - |grad phi|^2 X.nu / 2] dS
    = (1 - n/2) iint |grad phi|^2 + iint (X.grad phi) lap phi``.
    Both sides refer to the same truncated domain, so the defects measure
    quadrature only.  Defects are relative to the largest of the two sides and
    the volume integrals: identity 2 vanishes on both sides for ``n = 2``.
    """
    R = 100 * field.height if R is None else float(R)
    _check(field, R, resolution)
    n = field.n
    pts, w = _bulk_nodes(field, R, resolution)
    val, grad, lap = eval_field(field, pts)
    g2 = np.sum(grad * grad, axis=-1)
    D = float(np.sum(w * g2))
    rel = pts.copy()
    rel[..., 0] -= field.offset
    corr1 = float(np.sum(w * val * lap))
    corr2 = float(np.sum(w * np.sum(rel * grad, axis=-1) * lap))
    f1, f2, surf, pieces = _boundary(field, R, resolution)
    lhs1, rhs1 = f1, D
    lhs2, rhs2 = f2, (1 - 0.5 * n) * D + corr2
    tail = dirichlet_tail(field, R)
    scale = max(abs(D), abs(corr1), abs(corr2))
    return GreenAuditReport(
        field.kind, n, R, int(resolution),
        identity1_lhs=lhs1, identity1_rhs=rhs1,
        identity1_defect=_rel(lhs1, rhs1, scale),
        laplacian_correction=corr1,
        identity1_corrected_defect=_rel(lhs1, rhs1 + corr1, scale),
        identity2_lhs=lhs2, identity2_rhs=rhs2,
        identity2_defect=_rel(lhs2, rhs2, max(scale, pieces)),
        dirichlet=D + tail, dirichlet_tail=tail,
        surface_flux=surf + surface_flux_tail(field, R))
