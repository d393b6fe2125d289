"""Green functions, observed fields of a +Y Hertzian dipole, and their
analytic derivatives with respect to the terminal coordinates.

Point arguments ``p_r`` are array-like with a trailing axis of length 2
(points in the z=0 plane) or 3. Results broadcast over the leading axes.
The ``*_kernel`` helpers take offsets x = x_r - x_t, y = y_r - y_t and the
terminal height z directly, with unit amplitude; the Fisher code uses them.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .core import DomainError, PhysicalConfig, SurfaceGeometry, TerminalPosition
from .quadrature import riemann_grid


class GreenVariant(enum.Enum):
    EXACT_TENSOR = "exact"
    RADIATIVE_TENSOR = "radiative"
    FRESNEL = "fresnel"
    PLANE_WAVE = "plane-wave"


class ComplexField3(NamedTuple):
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.ex, self.ey, self.ez), axis=-1)


class DipoleSource(NamedTuple):
    """+Y oriented dipole of current ``current`` (A) and length ``length`` (m)."""

    current: float
    length: float

    def e_in(self, cfg: PhysicalConfig):
        return cfg.eta * self.current * self.length / (2.0 * cfg.wavelength)


def _offsets(p_r, p_t):
    p_r = np.asarray(p_r, dtype=float)
    if p_r.shape[-1] == 3 and np.any(p_r[..., 2] != 0):
        raise DomainError("receive points must lie in the z=0 plane")
    x = p_r[..., 0] - p_t.x
    y = p_r[..., 1] - p_t.y
    return x, y, p_t.z


def _radius(x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    if np.any(r == 0):
        raise DomainError("receive point coincides with the terminal")
    return r


def scalar_green(r_rt, cfg: PhysicalConfig):
    """G_s(r) = -j eta / (2 lambda r) exp(-j k0 r)."""
    r = np.asarray(r_rt, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r_rt must be positive")
    lam = cfg.wavelength
    return -1j * cfg.eta / (2.0 * lam * r) * np.exp(-1j * cfg.k0 * r)


def tensor_green(r_vec, variant: GreenVariant, cfg: PhysicalConfig):
    """3x3 dyadic Green function for a separation vector ``r_vec``."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0:
        raise DomainError("zero separation vector")
    rr = np.outer(r_vec, r_vec) / (r * r)
    eye = np.eye(3)
    variant = GreenVariant(variant)
    if variant is GreenVariant.EXACT_TENSOR:
        kr = cfg.k0 * r
        a = 1 + 1j / kr - 1 / kr ** 2
        b = 1 + 3j / kr - 3 / kr ** 2
        return scalar_green(r, cfg) * (a * eye - b * rr)
    if variant is GreenVariant.RADIATIVE_TENSOR:
        k = cfg.k0
        return -1j * k * cfg.eta * np.exp(-1j * k * r) / (4 * math.pi * r) * (eye - rr)
    raise ValueError("Fresnel and plane-wave forms are scalar; use green_fresnel / green_planewave")


def green_correction_factors(r, cfg: PhysicalConfig):
    """|1 + j/(kr) - 1/(kr)^2|^2 and |1 + 3j/(kr) - 3/(kr)^2|^2."""
    kr = cfg.k0 * np.asarray(r, dtype=float)
    a = 1 + 1j / kr - 1 / kr ** 2
    b = 1 + 3j / kr - 3 / kr ** 2
    return np.abs(a) ** 2, np.abs(b) ** 2


def _planar(p_r):
    p_r = np.asarray(p_r, dtype=float)
    return p_r[..., 0], p_r[..., 1]


def fresnel_phase(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    xr, yr = _planar(p_r)
    psi, omega, _ = p_t.direction_cosines
    rto = p_t.r_to
    lin = xr * psi + yr * omega
    return cfg.k0 * (rto - lin + (xr * xr + yr * yr - lin * lin) / (2 * rto))


def planewave_phase(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    xr, yr = _planar(p_r)
    psi, omega, _ = p_t.direction_cosines
    return cfg.k0 * (p_t.r_to - (xr * psi + yr * omega))


def green_fresnel(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    """Second-order phase expansion about the surface centre, amplitude 1/r_to."""
    amp = -1j * cfg.eta / (2.0 * cfg.wavelength * p_t.r_to)
    return amp * np.exp(-1j * fresnel_phase(p_r, p_t, cfg))


def green_planewave(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    """Linear phase only, amplitude 1/r_to."""
    amp = -1j * cfg.eta / (2.0 * cfg.wavelength * p_t.r_to)
    return amp * np.exp(-1j * planewave_phase(p_r, p_t, cfg))


# Unit-amplitude kernels ------------------------------------------------------

def vef_kernel(x, y, z, k):
    r = _radius(x, y, z)
    ph = np.exp(-1j * k * r)
    r3 = r ** 3
    return (1j * x * y / r3 * ph,
            -1j * (1 / r - y * y / r3) * ph,
            -1j * z * y / r3 * ph)


def sef_kernel(x, y, z, k):
    r = _radius(x, y, z)
    return np.sqrt(z * x * x + z ** 3) / r ** 2.5 * np.exp(-1j * k * r)


def vef_gradient_kernel(x, y, z, k):
    """Derivatives of (h_x, h_y, h_z) w.r.t. (x_t, y_t, z_t); shape (3, 3, ...).

    First index is the field component, second the terminal coordinate.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r = _radius(x, y, z)
    r2 = r * r
    r3, r4, r5 = r2 * r, r2 * r2, r2 * r2 * r
    e = np.exp(-1j * k * r)
    a = 3j / r5 - k / r4       # recurring combination
    g = np.empty((3, 3) + x.shape, dtype=complex)
    g[0, 0] = (x * x * y * a - 1j * y / r3) * e
    g[0, 1] = (x * y * y * a - 1j * x / r3) * e
    g[0, 2] = -x * y * z * a * e
    g[1, 0] = x * (1j * (3 * y * y - r2) / r5 - k * (y * y - r2) / r4) * e
    g[1, 1] = y * (1j * (3 * y * y - 3 * r2) / r5 - k * (y * y - r2) / r4) * e
    g[1, 2] = z * (1j * (r2 - 3 * y * y) / r5 + k * (y * y - r2) / r4) * e
    g[2, 0] = -x * y * z * a * e
    g[2, 1] = (-y * y * z * a + 1j * z / r3) * e
    g[2, 2] = (y * z * z * a - 1j * y / r3) * e
    return g


def sef_gradient_kernel(x, y, z, k):
    """Derivatives of h^s w.r.t. (x_t, y_t, z_t); shape (3, ...)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r = _radius(x, y, z)
    fxz = x * x + z * z
    fez = np.sqrt(z * fxz) * np.exp(-1j * k * r)
    r52, r72, r92 = r ** -2.5, r ** -3.5, r ** -4.5
    g = np.empty((3,) + x.shape, dtype=complex)
    g[0] = x * (1j * k * r72 + 2.5 * r92 - r52 / fxz) * fez
    g[1] = y * (1j * k * r72 + 2.5 * r92) * fez
    g[2] = ((3 * z * z + x * x) / (2 * z * fxz) * r52 - 1j * k * z * r72 - 2.5 * z * r92) * fez
    return g


# Public field API ---------------------------------------------------------------

def vef(p_r, p_t: TerminalPosition, cfg: PhysicalConfig) -> ComplexField3:
    """Cartesian components of the vector field at ``p_r``."""
    x, y, z = _offsets(p_r, p_t)
    ex, ey, ez = vef_kernel(x, y, z, cfg.k0)
    e = cfg.e_in
    return ComplexField3(e * ex, e * ey, e * ez)


def sef(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    """Scalar field: Poynting-normal magnitude with the propagation phase."""
    if p_t.z <= 0:
        raise DomainError("terminal height must be positive")
    x, y, z = _offsets(p_r, p_t)
    return cfg.e_in * sef_kernel(x, y, z, cfg.k0)


def osef(p_t: TerminalPosition, geom: SurfaceGeometry, cfg: PhysicalConfig, alpha: int):
    """Surface-integrated scalar field on the alpha-cell midpoint grid,
    normalised by sqrt(2 / D_r^2)."""
    grid = riemann_grid(geom, alpha)
    x = grid.x[:, None] - p_t.x
    y = grid.y[None, :] - p_t.y
    s = sef_kernel(x, y, p_t.z, cfg.k0).sum()
    return cfg.e_in * math.sqrt(2.0) / geom.diagonal * grid.cell_area * s


def vef_gradient(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    """d e_kappa / d xi as an array of shape (..., 3, 3) [component, coordinate]."""
    x, y, z = _offsets(p_r, p_t)
    g = vef_gradient_kernel(x, y, z, cfg.k0) * cfg.e_in
    return np.moveaxis(g, (0, 1), (-2, -1))


def sef_gradient(p_r, p_t: TerminalPosition, cfg: PhysicalConfig):
    """d e^s / d xi as an array of shape (..., 3)."""
    if p_t.z <= 0:
        raise DomainError("terminal height must be positive")
    x, y, z = _offsets(p_r, p_t)
    g = sef_gradient_kernel(x, y, z, cfg.k0) * cfg.e_in
    return np.moveaxis(g, 0, -1)
