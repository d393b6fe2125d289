"""Shared value types, unit conventions and coordinate helpers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

FREE_SPACE_IMPEDANCE = 376.730


class ConfigError(ValueError):
    """Raised for invalid user-facing parameters."""


class DomainError(ValueError):
    """Raised when a geometric quantity is evaluated outside its domain."""


def to_db(value):
    """Linear power ratio to decibels."""
    return 10.0 * np.log10(value)


def from_db(value_db):
    """Decibels to a linear power ratio."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def _positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class PhysicalConfig:
    """Carrier and noise parameters.

    ``snr`` is the linear ratio |E_in|^2 / sigma^2. When both ``current`` and
    ``length`` are given, the dipole amplitude E_in = eta * I * l / (2 lambda)
    is derived from them; otherwise fields are evaluated with E_in = 1.
    """

    wavelength: float
    snr: float = 1.0
    eta: float = FREE_SPACE_IMPEDANCE
    current: float | None = None
    length: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "wavelength", _positive("wavelength", self.wavelength))
        object.__setattr__(self, "snr", _positive("snr", self.snr))
        object.__setattr__(self, "eta", _positive("eta", self.eta))
        if (self.current is None) != (self.length is None):
            raise ConfigError("current and length must be given together")
        if self.current is not None:
            object.__setattr__(self, "current", _positive("current", self.current))
            object.__setattr__(self, "length", _positive("length", self.length))

    @classmethod
    def from_snr_db(cls, wavelength, snr_db, **kwargs):
        return cls(wavelength=wavelength, snr=float(from_db(snr_db)), **kwargs)

    @property
    def k0(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def snr_db(self):
        return float(to_db(self.snr))

    @property
    def e_in(self):
        if self.current is None:
            return 1.0
        return self.eta * self.current * self.length / (2.0 * self.wavelength)

    @property
    def noise_variance(self):
        return abs(self.e_in) ** 2 / self.snr

    def with_snr(self, snr):
        return PhysicalConfig(self.wavelength, snr, self.eta, self.current, self.length)

    def with_wavelength(self, wavelength):
        return PhysicalConfig(wavelength, self.snr, self.eta, self.current, self.length)


@dataclass(frozen=True)
class TerminalPosition:
    """Terminal coordinates (m); the terminal must sit in front of the surface."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"terminal {name} must be finite")
            object.__setattr__(self, name, float(v))
        if self.z <= 0:
            raise ConfigError(f"terminal z must be positive, got {self.z}")

    @classmethod
    def on_cpl(cls, z):
        return cls(0.0, 0.0, z)

    @property
    def is_cpl(self):
        return self.x == 0.0 and self.y == 0.0

    @property
    def r_to(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def zenith(self):
        """Angle from the surface normal, in [0, pi/2)."""
        return math.acos(self.z / self.r_to)

    @property
    def azimuth(self):
        return math.atan2(self.y, self.x) % (2.0 * math.pi)

    @property
    def direction_cosines(self):
        """(Psi, Omega, Phi) = p_t / r_to."""
        r = self.r_to
        return self.x / r, self.y / r, self.z / r

    def as_array(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SurfaceGeometry:
    """Square aperture of diagonal ``diagonal`` centred at the origin in z=0."""

    diagonal: float

    def __post_init__(self):
        object.__setattr__(self, "diagonal", _positive("surface diagonal", self.diagonal))

    @property
    def half_width(self):
        return self.diagonal / math.sqrt(8.0)

    @property
    def area(self):
        return self.diagonal ** 2 / 2.0

    @property
    def bounds(self):
        h = self.half_width
        return (-h, h, -h, h)


class FieldModel(enum.Enum):
    VEF = "vef"
    SEF = "sef"
    OSEF = "osef"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown field model {value!r}") from None


class Regime(enum.Enum):
    REACTIVE = "reactive"
    RADIATIVE_NEAR = "radiative-near"
    FAR = "far"


@dataclass(frozen=True)
class RegimeDistances:
    fresnel: float
    fraunhofer: float

    @classmethod
    def of(cls, geom: SurfaceGeometry, cfg: PhysicalConfig):
        d, lam = geom.diagonal, cfg.wavelength
        out = cls(0.5 * math.sqrt(d ** 3 / lam), 2.0 * d * d / lam)
        if d > lam / 2:
            assert out.fresnel < out.fraunhofer
        return out


def regime_classify(r_to, geom, cfg):
    """Half-open convention: reactive below d_f, far from d_F upward."""
    if not r_to > 0:
        raise DomainError("r_to must be positive")
    dist = RegimeDistances.of(geom, cfg)
    if r_to < dist.fresnel:
        return Regime.REACTIVE
    if r_to >= dist.fraunhofer:
        return Regime.FAR
    return Regime.RADIATIVE_NEAR


class LocalSpherical(NamedTuple):
    r: np.ndarray
    sin_theta: np.ndarray
    cos_theta: np.ndarray
    sin_phi: np.ndarray
    cos_phi: np.ndarray


def to_local_spherical(p_r, p_t):
    """Spherical factors of p_r seen from a +Y dipole at p_t.

    theta is measured from the dipole (y) axis and phi_s from x toward the
    surface normal, so sin(theta) cos(theta) cos(phi_s) = x y / r^2 with
    x = x_r - x_t, y = y_r - y_t. Accepts arrays with a trailing axis of 2
    (points in z=0) or 3.
    """
    p_r = np.asarray(p_r, dtype=float)
    pt = p_t.as_array() if isinstance(p_t, TerminalPosition) else np.asarray(p_t, dtype=float)
    zr = p_r[..., 2] if p_r.shape[-1] == 3 else 0.0
    x = p_r[..., 0] - pt[0]
    y = p_r[..., 1] - pt[1]
    dz = pt[2] - zr
    rho = np.hypot(x, dz)
    r = np.hypot(rho, y)
    if np.any(r == 0):
        raise DomainError("coincident receive and terminal points")
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_phi = np.where(rho > 0, x / np.where(rho > 0, rho, 1.0), 1.0)
        sin_phi = np.where(rho > 0, dz / np.where(rho > 0, rho, 1.0), 0.0)
    return LocalSpherical(r, rho / r, y / r, sin_phi, cos_phi)
