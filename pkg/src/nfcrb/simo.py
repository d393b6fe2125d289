"""Distributed receivers: N_s x N_s equal sub-antennas around the origin.

Sub-antenna (i, j) of the first quadrant covers
x_r in [(2i-1) R_r - D_r, (2i-1) R_r + D_r] / (2 sqrt(2) N_s), likewise in y,
and the other three quadrants are its mirror images. Observations across
antennas are independent, so Fisher information adds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, FieldModel, PhysicalConfig, TerminalPosition
from .cpl import CPL_SPEC, CplScenario, crb_cpl, rho3_terms, rho_over
from .engine import (CrbResult, DEFAULT_NUMERICS, Numerics, sef_rho_integrands,
                     surface_fisher, vef_rho_integrands)
from .quadrature import QuadratureSpec, RectDomain, check_alpha, riemann_grid

_SURFACE_INTEGRANDS = {FieldModel.VEF: vef_rho_integrands, FieldModel.SEF: sef_rho_integrands}


class OverlapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimoLayout:
    n_s: int
    r_r: float
    d_r: float
    z_t: float

    def __post_init__(self):
        if int(self.n_s) != self.n_s or not (self.n_s == 1 or (self.n_s >= 2 and self.n_s % 2 == 0)):
            raise ConfigError(f"N_s must be 1 or an even integer >= 2, got {self.n_s}")
        for name in ("r_r", "d_r", "z_t"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def overlapping(self):
        return self.n_s > 1 and self.d_r > self.r_r

    @property
    def antenna_side(self):
        return self.d_r / (self.n_s * math.sqrt(2.0))

    @property
    def total_area(self):
        return self.n_s ** 2 * self.antenna_side ** 2

    def quadrant_domains(self):
        """Raw domains R_{s;i,j} of the first quadrant, keyed by (i, j)."""
        if self.n_s == 1:
            h = self.d_r / math.sqrt(8.0)
            return {(1, 1): RectDomain(-h, h, -h, h)}
        c = 2.0 * math.sqrt(2.0) * self.n_s
        out = {}
        for i in range(1, self.n_s // 2 + 1):
            for j in range(1, self.n_s // 2 + 1):
                out[(i, j)] = RectDomain(((2 * i - 1) * self.r_r - self.d_r) / c,
                                         ((2 * i - 1) * self.r_r + self.d_r) / c,
                                         ((2 * j - 1) * self.r_r - self.d_r) / c,
                                         ((2 * j - 1) * self.r_r + self.d_r) / c)
        return out

    def normalized_domains(self):
        """Quadrant domains divided by z_t."""
        z = self.z_t
        return {ij: RectDomain(d.u_min / z, d.u_max / z, d.v_min / z, d.v_max / z)
                for ij, d in self.quadrant_domains().items()}

    def all_domains(self):
        """Every antenna domain: the quadrant set and its three mirror images."""
        if self.n_s == 1:
            return list(self.quadrant_domains().values())
        out = []
        for d in self.quadrant_domains().values():
            for sx in (1, -1):
                for sy in (1, -1):
                    out.append(_mirror(d, sx, sy))
        return out


def _mirror(d, sx, sy):
    u = sorted((sx * d.u_min, sx * d.u_max))
    v = sorted((sy * d.v_min, sy * d.v_max))
    return RectDomain(u[0], u[1], v[0], v[1])


def build_layout(n_s, r_r, d_r, z_t) -> SimoLayout:
    layout = SimoLayout(n_s, r_r, d_r, z_t)
    if layout.overlapping:
        warnings.warn("D_r > R_r: sub-antenna domains overlap", OverlapWarning, stacklevel=2)
    return layout


def _quadrant_sums(layout, model, spec):
    first = np.zeros(3)
    second = np.zeros(3)
    for dom in layout.normalized_domains().values():
        vals = list(rho_over(dom, model, spec).values())
        first += vals[:3]
        second += vals[3:]
    return first, second


def _osef_simo(layout, cfg, alpha):
    """SNR^-1 / ((16 / D_r^2) sum_{i,j} |rho_3^{s;i,j}|^2) with each rho_3 taken
    as a Riemann sum weighted by the sub-antenna cell area D_r^2 / (2 alpha N_s^2)."""
    n = check_alpha(alpha)
    total = np.zeros(3)
    for dom in layout.quadrant_domains().values():
        grid = riemann_grid(dom, n * n)
        terms = rho3_terms(grid.x[:, None], grid.y[None, :], layout.z_t, cfg.k0)
        total += np.abs(grid.cell_area * terms.sum(axis=(1, 2))) ** 2
    info = 16.0 / layout.d_r ** 2 * cfg.snr * total
    tiny = 1e-12 * np.max(info)
    crb = np.where(info > tiny, 1.0 / np.where(info > tiny, info, 1.0), math.inf)
    return CrbResult(crb, FieldModel.OSEF, "simo/riemann", bool(np.any(~np.isfinite(crb))))


def crb_simo(layout: SimoLayout, cfg: PhysicalConfig, model,
             numerics: Numerics = DEFAULT_NUMERICS, spec: QuadratureSpec = CPL_SPEC) -> CrbResult:
    """CRBs for a CPL terminal at height ``layout.z_t``.

    VEF/SEF: SNR^-1 / (8 sum_{i,j} (k0^2 rho_1^{s;i,j} + rho_2^{s;i,j} / z_t^2)),
    summing one quadrant and using mirror symmetry for the other three.
    """
    model = FieldModel.parse(model)
    if layout.n_s == 1:
        sc = CplScenario.from_geometry(layout.d_r, layout.z_t, cfg, model, numerics.alpha)
        return crb_cpl(sc)
    if model is FieldModel.OSEF:
        return _osef_simo(layout, cfg, numerics.alpha)
    first, second = _quadrant_sums(layout, model, spec)
    k = cfg.k0
    crb = 1.0 / (cfg.snr * 8.0 * (k * k * first + second / layout.z_t ** 2))
    return CrbResult(crb, model, "simo/quadrant")


def crb_simo_large_zt(layout: SimoLayout, cfg: PhysicalConfig, model,
                      spec: QuadratureSpec = CPL_SPEC) -> CrbResult:
    model = FieldModel.parse(model)
    if model is FieldModel.OSEF:
        raise ConfigError("large-z_t simplification covers VEF and SEF only")
    if layout.z_t < 100.0 * cfg.wavelength:
        warnings.warn("z_t is below 100 wavelengths", stacklevel=2)
    if layout.n_s == 1:
        h = layout.d_r / math.sqrt(8.0) / layout.z_t
        first = 4.0 * np.array(list(rho_over(RectDomain(0, h, 0, h), model, spec).values())[:3])
        return CrbResult(1.0 / (cfg.snr * 2.0 * cfg.k0 ** 2 * first), model, "cpl/large-zt")
    first, _ = _quadrant_sums(layout, model, spec)
    crb = 1.0 / (cfg.snr * 8.0 * cfg.k0 ** 2 * first)
    return CrbResult(crb, model, "simo/large-zt")


def antenna_fims(layout: SimoLayout, cfg: PhysicalConfig, model, domains=None,
                 spec: QuadratureSpec = QuadratureSpec()):
    """Full 3x3 Fisher contribution of each antenna domain (raw coordinates)."""
    model = FieldModel.parse(model)
    if model not in _SURFACE_INTEGRANDS:
        raise ConfigError("per-antenna FIMs cover VEF and SEF")
    pt = TerminalPosition.on_cpl(layout.z_t)
    doms = layout.all_domains() if domains is None else domains
    integrand = _SURFACE_INTEGRANDS[model]
    return [2.0 * cfg.snr * surface_fisher(integrand, pt, d, cfg, spec)[0] for d in doms]


def lemma1_check(layout: SimoLayout, cfg: PhysicalConfig, model, drop=None):
    """Mirror-symmetry report for the full layout.

    Returns the largest relative spread of diagonal contributions among the
    four mirror partners of each quadrant antenna, and the largest FIM
    off-diagonal relative to the smallest diagonal. ``drop`` removes the
    antenna at that index of ``all_domains()`` (negative control).
    """
    if layout.n_s == 1:
        raise ConfigError("lemma1_check needs N_s >= 2")
    doms = layout.all_domains()
    fims = antenna_fims(layout, cfg, model, doms)
    spread = 0.0
    for q in range(0, len(fims), 4):
        diags = np.array([np.diag(f) for f in fims[q:q + 4]])
        spread = max(spread, float(np.max(np.ptp(diags, axis=0) / np.max(diags, axis=0))))
    kept = [f for i, f in enumerate(fims) if i != drop]
    total = np.sum(kept, axis=0)
    off = np.abs(total[np.triu_indices(3, 1)])
    return {
        "partner_diag_spread": spread,
        "offdiag_ratio": float(np.max(off) / np.min(np.diag(total))),
        "fim": total,
        "antennas": len(kept),
    }

