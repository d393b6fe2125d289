"""Terminal on the central perpendicular line (x_t = y_t = 0).

The FIM is diagonal there and each entry reduces to dimensionless integrals
over R_tau = {|u|, |v| <= tau / sqrt(8)} with tau = D_r / z_t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ConfigError, FieldModel, PhysicalConfig
from .engine import CrbResult
from .quadrature import (QuadratureSpec, RectDomain, check_alpha, graded_breaks,
                         integrate_2d, riemann_grid)

PI = math.pi
SQRT2 = math.sqrt(2.0)

# Key order for the six integrals of one field model.
VEF_KEYS = ("11x", "11y", "11z", "12x", "12y", "12z")
SEF_KEYS = ("21x", "21y", "21z", "22x", "22y", "22z")
AXES = "xyz"

# Integrands are even and smooth on the scale u, v ~ 1, so one quadrant with
# panels graded away from the origin is enough.
CPL_SPEC = QuadratureSpec(order=32, panels=1, tol=1e-12, max_refinements=3)

LARGE_ZT_FACTOR = 100.0

# Offsets between SEF and VEF limits: Delta C_kappa = p_kappa SNR^-1 lambda^2.
P_DELTA = {"x": 15 / (64 * PI ** 3), "y": 15 / (32 * PI ** 3), "z": 13 / (192 * PI ** 3)}


def vef_cpl_integrands(u, v):
    u2, v2 = u * u, v * v
    s = u2 + v2 + 1
    s3 = s ** 3
    s4 = s3 * s
    return np.stack(np.broadcast_arrays(
        u2 * (u2 + 1) / s3,
        v2 * (u2 + 1) / s3,
        (u2 + 1) / s3,
        (u2 * u2 + v2 * v2 + u2 + v2 - u2 * v2) / s4,
        (u2 + 1) * (u2 + 4 * v2 + 1) / s4,
        (v2 * v2 + u2 * v2 + 1) / s4,
    ))


def sef_cpl_integrands(u, v):
    u2, v2 = u * u, v * v
    s = u2 + v2 + 1
    s35 = s ** 3.5
    s45 = s35 * s
    w = u2 + 1
    return np.stack(np.broadcast_arrays(
        u2 * w / s35,
        v2 * w / s35,
        w / s35,
        u2 * (3 * u2 - 2 * v2 + 3) ** 2 / (4 * w * s45),
        25 * v2 * w / (4 * s45),
        (u2 * u2 + u2 * v2 + 3 * v2 - u2 - 2) ** 2 / (4 * w * s45),
    ))


_CPL_INTEGRANDS = {FieldModel.VEF: (VEF_KEYS, vef_cpl_integrands),
                   FieldModel.SEF: (SEF_KEYS, sef_cpl_integrands)}


def _model_keys(model):
    model = FieldModel.parse(model)
    if model not in _CPL_INTEGRANDS:
        raise ConfigError(f"no rho integrals for {model.value}")
    return _CPL_INTEGRANDS[model]


def rho_over(dom: RectDomain, model, spec: QuadratureSpec = CPL_SPEC):
    """The six normalised integrals of ``model`` over an arbitrary rectangle."""
    keys, f = _model_keys(model)
    ub = graded_breaks(dom.u_min, dom.u_max, 0.0, 1.0)
    vb = graded_breaks(dom.v_min, dom.v_max, 0.0, 1.0)
    res = integrate_2d(f, dom, spec, ub, vb)
    return dict(zip(keys, np.asarray(res.value, dtype=float)))


@dataclass(frozen=True)
class RhoCplTable:
    tau: float
    model: FieldModel
    values: dict
    closed_form: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def rho_numeric(tau, model, spec: QuadratureSpec = CPL_SPEC) -> RhoCplTable:
    """Quadrature values of the six CPL integrals; one quadrant times four."""
    if not tau > 0:
        raise ConfigError("tau must be positive")
    model = FieldModel.parse(model)
    h = tau / math.sqrt(8.0)
    vals = rho_over(RectDomain(0.0, h, 0.0, h), model, spec)
    return RhoCplTable(float(tau), model, {k: 4.0 * v for k, v in vals.items()})


# Printed closed forms ---------------------------------------------------------

def _ftan(t):
    return math.atan(t / math.sqrt(t * t + 8))


def _cf_12x(t):
    t2 = t * t
    return 1 / (t2 + 8) * (_ftan(t) / (2 * math.sqrt(t2 + 8)) - t2 * (3 * t2 + 16) / (t2 + 4) ** 2)


def _cf_12y(t):
    t2 = t * t
    return ((9 * t2 * t2 + 152 * t2 + 544) * t * _ftan(t) / (2 * (t2 + 8) ** 2.5)
            + t2 * (3 * t2 * t2 + 8 * t2 - 32) / ((t2 + 8) ** 2 * (t2 + 4) ** 2))


def _cf_11z(t):
    t2 = t * t
    return t / (t2 + 8) * ((3 * t2 + 28) / math.sqrt(t2 + 8) * _ftan(t) + 2 * t / (t2 + 4))


def _cf_12z(t):
    t2 = t * t
    return 2 * t / (t2 + 8) ** 2 * ((t2 * t2 + 16 * t2 + 88) * _ftan(t) / math.sqrt(t2 + 8)
                                    + 16 * t * (t2 + 5) / (t2 + 4) ** 2)


CLOSED_FORMS = {"12x": _cf_12x, "12y": _cf_12y, "11z": _cf_11z, "12z": _cf_12z}
CLOSED_FORM_RTOL = 1e-6


class ClosedFormCheck(NamedTuple):
    printed: float
    numeric: float
    rel_err: float
    mismatch: bool


def rho_closed_form(tau, rtol=CLOSED_FORM_RTOL):
    """Printed closed forms, each checked against quadrature.

    A formula that disagrees beyond ``rtol`` is flagged as a mismatch; the
    quadrature value stays authoritative either way.
    """
    if not tau > 0:
        raise ConfigError("tau must be positive")
    num = rho_numeric(tau, FieldModel.VEF)
    out = {}
    for key, fn in CLOSED_FORMS.items():
        p, q = fn(float(tau)), num[key]
        err = abs(p - q) / abs(q)
        out[key] = ClosedFormCheck(p, q, err, bool(err > rtol))
    return out


# Printed disk bounds ----------------------------------------------------------

def _b11x(t):
    t2 = t * t
    lo = 3 * PI / 8 * math.log1p(t2 / 8) - PI * t2 * (5 * t2 + 48) / (16 * (t2 + 8) ** 2)
    hi = 3 * PI / 8 * math.log1p(t2 / 4) - PI * t2 * (5 * t2 + 24) / (16 * (t2 + 4) ** 2)
    return lo, hi


def _b11y(t):
    t2 = t * t
    lo = PI / 8 * math.log1p(t2 / 8) + PI * t2 * (t2 - 16) / (16 * (t2 + 8) ** 2)
    hi = PI / 8 * math.log1p(t2 / 4) + PI * t2 * (t2 - 8) / (16 * (t2 + 4) ** 2)
    return lo, hi


def _b21x(t):
    t2 = t * t
    lo = 8 * PI / 15 - SQRT2 * PI * (45 * t2 * t2 + 640 * t2 + 2048) / (30 * (t2 + 8) ** 2.5)
    hi = 8 * PI / 15 - PI * (45 * t2 * t2 + 320 * t2 + 512) / (30 * (t2 + 4) ** 2.5)
    return lo, hi


def _b21y(t):
    t2 = t * t
    lo = 4 * PI / 15 - SQRT2 * PI * (15 * t2 * t2 + 320 * t2 + 1024) / (30 * (t2 + 8) ** 2.5)
    hi = 4 * PI / 15 - PI * (15 * t2 * t2 + 160 * t2 + 256) / (30 * (t2 + 4) ** 2.5)
    return lo, hi


def _b21z(t):
    t2 = t * t
    lo = 8 * PI / 15 - 16 * SQRT2 * PI * (5 * t2 + 64) / (15 * (t2 + 8) ** 2.5)
    hi = 8 * PI / 15 - 8 * PI * (5 * t2 + 32) / (15 * (t2 + 4) ** 2.5)
    return lo, hi


def _b22x(t):
    t2 = t * t
    lo = 3 * PI / 14 - PI * (63 * SQRT2 * t2 * t2 - 224 * (t2 + 8) ** 1.5
                             + 64 * SQRT2 * (21 * t2 + 80)) / (7 * (t2 + 8) ** 3.5)
    hi = 3 * PI / 14 - PI * (63 * t2 * t2 - 112 * (t2 + 4) ** 1.5
                             + 32 * (21 * t2 + 40)) / (14 * (t2 + 4) ** 3.5)
    return lo, hi


def _b22y(t):
    t2 = t * t
    lo = 10 * PI / 21 - 5 * SQRT2 * PI * (35 * t2 * t2 + 896 * t2 + 2048) / (21 * (t2 + 8) ** 3.5)
    hi = 10 * PI / 21 - 5 * PI * (35 * t2 * t2 + 448 * t2 + 512) / (42 * (t2 + 4) ** 3.5)
    return lo, hi


def _b22z(t):
    t2 = t * t
    lo = 13 * PI / 42 - PI * (7 * SQRT2 * t2 * t2 * (3 * t2 + 64) + 1344 * (t2 + 8) ** 1.5
                              - 512 * SQRT2 * (7 * t2 + 16)) / (42 * (t2 + 8) ** 3.5)
    hi = 13 * PI / 42 - PI * (7 * t2 * t2 * (3 * t2 + 32) + 336 * (t2 + 4) ** 1.5
                              - 128 * (7 * t2 + 8)) / (42 * (t2 + 4) ** 3.5)
    return lo, hi


BOUNDS = {
    FieldModel.VEF: {"11x": _b11x, "11y": _b11y},
    FieldModel.SEF: {"21x": _b21x, "21y": _b21y, "21z": _b21z,
                     "22x": _b22x, "22y": _b22y, "22z": _b22z},
}


def rho_bounds(tau, model):
    """Printed (lower, upper) pairs from the inscribed and circumscribed disks."""
    if not tau > 0:
        raise ConfigError("tau must be positive")
    model = FieldModel.parse(model)
    return {k: fn(float(tau)) for k, fn in BOUNDS.get(model, {}).items()}


# CRBs -------------------------------------------------------------------------

@dataclass(frozen=True)
class CplScenario:
    tau: float
    z_t: float
    cfg: PhysicalConfig
    model: FieldModel
    alpha: int = 201 ** 2

    def __post_init__(self):
        if not (self.tau > 0 and self.z_t > 0):
            raise ConfigError("tau and z_t must be positive")
        object.__setattr__(self, "model", FieldModel.parse(self.model))
        check_alpha(self.alpha)

    @classmethod
    def from_geometry(cls, d_r, z_t, cfg, model, alpha=201 ** 2):
        return cls(d_r / z_t, z_t, cfg, model, alpha)

    @property
    def d_r(self):
        return self.tau * self.z_t


def _split(table):
    """(first-order, second-order) triples ordered x, y, z."""
    keys = list(table.values)
    return (np.array([table[keys[i]] for i in range(3)]),
            np.array([table[keys[i]] for i in range(3, 6)]))


def rho3_terms(x, y, z, k):
    """varrho_3kappa samples for the three coordinates; shape (3, ...)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r = np.sqrt(x * x + y * y + z * z)
    fxz = x * x + z * z
    amp = np.sqrt(z * fxz) * np.exp(-1j * k * r)
    r52, r72, r92 = r ** -2.5, r ** -3.5, r ** -4.5
    return np.stack([
        amp * (1j * k * x * r72 + 2.5 * x * r92 - x / fxz * r52),
        amp * (1j * k * y * r72 + 2.5 * y * r92),
        amp * (-1j * k * z * r72 - 2.5 * z * r92 + (3 * z * z + x * x) / (2 * z * fxz) * r52),
    ])


def _osef_crb(sc: CplScenario):
    n = check_alpha(sc.alpha)
    grid = riemann_grid(RectDomain.centered(sc.d_r / math.sqrt(8.0)), sc.alpha)
    terms = rho3_terms(grid.x[:, None], grid.y[None, :], sc.z_t, sc.cfg.k0)
    s = np.abs(terms.sum(axis=(1, 2))) ** 2
    alpha = float(n * n)
    info = sc.d_r ** 2 * sc.cfg.snr * s / alpha ** 2
    # Odd sums over the symmetric grid leave only rounding noise.
    tiny = 1e-12 * np.max(info)
    crb = np.where(info > tiny, 1.0 / np.where(info > tiny, info, 1.0), math.inf)
    return CrbResult(crb, FieldModel.OSEF, "cpl/riemann", bool(np.any(~np.isfinite(crb))))


def crb_cpl(sc: CplScenario) -> CrbResult:
    """SNR^-1 / (2 (k0^2 rho_1 + rho_2 / z_t^2)) per coordinate; OSEF via the
    discretised surface sum."""
    if sc.model is FieldModel.OSEF:
        return _osef_crb(sc)
    first, second = _split(rho_numeric(sc.tau, sc.model))
    k = sc.cfg.k0
    crb = 1.0 / (sc.cfg.snr * 2.0 * (k * k * first + second / sc.z_t ** 2))
    return CrbResult(crb, sc.model, "cpl/quadrature")


def crb_cpl_large_zt(sc: CplScenario) -> CrbResult:
    """Drops the z_t^-2 terms; meant for z_t >= 100 lambda."""
    if sc.model is FieldModel.OSEF:
        raise ConfigError("large-z_t simplification covers VEF and SEF only")
    if sc.z_t < LARGE_ZT_FACTOR * sc.cfg.wavelength:
        warnings.warn(f"z_t = {sc.z_t} m is below {LARGE_ZT_FACTOR:g} wavelengths", stacklevel=2)
    first, _ = _split(rho_numeric(sc.tau, sc.model))
    k = sc.cfg.k0
    crb = 1.0 / (sc.cfg.snr * 2.0 * k * k * first)
    return CrbResult(crb, sc.model, "cpl/large-zt")


def crb_asymptotic(wavelength, snr, tau, model) -> CrbResult:
    """tau -> infinity limits; the VEF x, y limits keep their ln(tau) factor."""
    model = FieldModel.parse(model)
    c = wavelength ** 2 / (snr * PI ** 3)
    if model is FieldModel.VEF:
        lt = math.log(tau)
        crb = [c / (6 * lt), c / (2 * lt), c / 6]
    elif model is FieldModel.SEF:
        crb = [15 * c / 64, 15 * c / 32, 15 * c / 64]
    else:
        raise ConfigError("no asymptotic form for OSEF")
    return CrbResult(crb, model, "cpl/asymptotic")
