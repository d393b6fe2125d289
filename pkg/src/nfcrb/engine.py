"""Fisher information and Cramer-Rao bounds for an arbitrary terminal position."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import FieldModel, PhysicalConfig, SurfaceGeometry, TerminalPosition
from .fields import sef_gradient_kernel, vef_gradient_kernel
from .quadrature import (DEFAULT_SPEC, QuadratureSpec, RectDomain, check_alpha,
                         graded_breaks, integrate_2d, riemann_grid)

# Upper-triangle order used for packed Fisher entries.
PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
SINGULAR_EPS = 1e-12


class RankDeficiencyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Numerics:
    quad: QuadratureSpec = DEFAULT_SPEC
    alpha: int = 201 ** 2

    def __post_init__(self):
        check_alpha(self.alpha)


DEFAULT_NUMERICS = Numerics()


@dataclass(frozen=True)
class FimMatrix:
    matrix: np.ndarray
    model: FieldModel | None = None
    path: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("FIM must be 3x3")
        scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValueError("FIM is not symmetric")
        m = 0.5 * (m + m.T)
        tr = np.trace(m)
        if np.min(np.linalg.eigvalsh(m)) < -1e-12 * max(tr, 0.0) - np.finfo(float).tiny:
            raise ValueError("FIM is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, idx):
        return self.matrix[idx]

    def scaled(self, c):
        return FimMatrix(self.matrix * c, self.model, self.path)

    def __add__(self, other):
        return FimMatrix(self.matrix + other.matrix, self.model, self.path)


@dataclass(frozen=True)
class CrbResult:
    """Per-coordinate CRBs in m^2; +inf marks a non-identifiable coordinate."""

    crb: np.ndarray
    model: FieldModel | None = None
    path: str = ""
    rank_deficient: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.array(self.crb, dtype=float)
        fin = np.isfinite(c)
        if np.any(c[fin] <= 0) or np.any(np.isnan(c)):
            raise ValueError(f"finite CRBs must be positive, got {c}")
        c.setflags(write=False)
        object.__setattr__(self, "crb", c)

    @property
    def x(self):
        return float(self.crb[0])

    @property
    def y(self):
        return float(self.crb[1])

    @property
    def z(self):
        return float(self.crb[2])

    @property
    def rcrb_cm(self):
        return np.sqrt(self.crb) * 100.0

    @property
    def identifiable(self):
        return np.isfinite(self.crb)


# General-position integrands ----------------------------------------------------

def vef_rho_integrands(x, y, z, k):
    """Unit-SNR VEF Fisher integrands for the six upper-triangle entries.

    Returns k^2 rho11^{mn} + rho12^{mn} in PAIRS order; multiplying by
    2 SNR and integrating over the surface gives the FIM.
    """
    x2, y2, z2 = x * x, y * y, z * z
    r2 = x2 + y2 + z2
    f = x2 + z2
    r6 = r2 ** 3
    r8 = r6 * r2
    kk = k * k
    return np.stack(np.broadcast_arrays(
        kk * x2 * f / r6 + ((x2 + y2) * r2 - 3 * x2 * y2) / r8,
        kk * y2 * f / r6 + f * (f + 4 * y2) / r8,
        kk * z2 * f / r6 + (y2 * (r2 - 2 * z2) + z2 * (z2 + x2)) / r8,
        kk * x * y * f / r6 + x * y * (x2 - 2 * y2 + z2) / r8,
        -kk * x * z * f / r6 + x * z * (2 * y2 - x2 - z2) / r8,
        -kk * y * z * f / r6 + y * z * (2 * y2 - x2 - z2) / r8,
    ))


def sef_rho_integrands(x, y, z, k):
    """k^2 rho21^{mn} + rho22^{mn} in PAIRS order."""
    x2, y2, z2 = x * x, y * y, z * z
    r2 = x2 + y2 + z2
    f = x2 + z2
    r = np.sqrt(r2)
    r7 = r2 ** 3 * r
    r9 = r7 * r2
    kk = k * k
    f3z = (x2 + 3 * z2) * r2 * r2
    f5z = 5 * (x2 + 5 * z2) * r2 / 2
    return np.stack(np.broadcast_arrays(
        kk * z * x2 * f / r7 + z * x2 * (25 * f / 4 - 5 * r2 + r2 * r2 / f) / r9,
        kk * z * y2 * f / r7 + z * 25 * y2 * f / (4 * r9),
        kk * z ** 3 * f / r7 + (x2 * (r2 - 2 * z2) + z2 * (3 * y2 - 2 * z2)) ** 2 / (4 * z * f * r9),
        kk * z * x * y * f / r7 + z * x * y * (25 * f / 4 - 5 * r2 / 2) / r9,
        -kk * z2 * x * f / r7 + x * (f5z * f - f3z - 25 * z2 * f * f / 2) / (2 * f * r9),
        -kk * z2 * y * f / r7 + 5 * y * (f3z / r2 - 5 * z2 * f) / (4 * r9),
    ))


def vef_gradient_integrands(x, y, z, k):
    g = vef_gradient_kernel(x, y, z, k)
    return np.stack([np.real(np.sum(g[:, m] * np.conj(g[:, n]), axis=0)) for m, n in PAIRS])


def sef_gradient_integrands(x, y, z, k):
    g = sef_gradient_kernel(x, y, z, k)
    return np.stack([np.real(g[m] * np.conj(g[n])) for m, n in PAIRS])


def _unpack(vec):
    m = np.empty((3, 3))
    for (i, j), v in zip(PAIRS, vec):
        m[i, j] = m[j, i] = v
    return m


def _peak_breaks(dom: RectDomain, p_t: TerminalPosition):
    return (graded_breaks(dom.u_min, dom.u_max, p_t.x, p_t.z),
            graded_breaks(dom.v_min, dom.v_max, p_t.y, p_t.z))


def surface_fisher(integrand, p_t: TerminalPosition, dom: RectDomain, cfg: PhysicalConfig,
                   spec: QuadratureSpec = DEFAULT_SPEC):
    """Unit-SNR Fisher matrix (without the factor 2 SNR) over a raw surface domain."""
    k, z = cfg.k0, p_t.z

    def f(U, V):
        return integrand(U - p_t.x, V - p_t.y, z, k)

    ub, vb = _peak_breaks(dom, p_t)
    res = integrate_2d(f, dom, spec, ub, vb)
    return _unpack(res.value), res


_INTEGRANDS = {
    (FieldModel.VEF, "integrand"): vef_rho_integrands,
    (FieldModel.VEF, "gradient"): vef_gradient_integrands,
    (FieldModel.SEF, "integrand"): sef_rho_integrands,
    (FieldModel.SEF, "gradient"): sef_gradient_integrands,
}


def _fim_surface(model, p_t, geom, cfg, spec, path):
    try:
        integrand = _INTEGRANDS[(model, path)]
    except KeyError:
        raise ValueError(f"unknown FIM path {path!r}") from None
    m, _ = surface_fisher(integrand, p_t, RectDomain.of_surface(geom), cfg, spec)
    return FimMatrix(2.0 * cfg.snr * m, model, path)


def fim_vef(p_t: TerminalPosition, geom: SurfaceGeometry, cfg: PhysicalConfig,
            spec: QuadratureSpec = DEFAULT_SPEC, path: str = "integrand") -> FimMatrix:
    """[I]_mn = 2 SNR (rho11^{mn} + rho12^{mn}), rho11 carrying the k0^2 factor.

    ``path="gradient"`` integrates Re{sum_kappa d_n e_kappa conj(d_m e_kappa)}
    from the analytic field gradients instead.
    """
    return _fim_surface(FieldModel.VEF, p_t, geom, cfg, spec, path)


def fim_sef(p_t: TerminalPosition, geom: SurfaceGeometry, cfg: PhysicalConfig,
            spec: QuadratureSpec = DEFAULT_SPEC, path: str = "integrand") -> FimMatrix:
    return _fim_surface(FieldModel.SEF, p_t, geom, cfg, spec, path)


def osef_gradient(p_t: TerminalPosition, grid, cfg: PhysicalConfig, diagonal: float):
    """Gradient of the discretised, sqrt(2/D^2)-normalised surface sum."""
    x = grid.x[:, None] - p_t.x
    y = grid.y[None, :] - p_t.y
    g = sef_gradient_kernel(x, y, p_t.z, cfg.k0).sum(axis=(1, 2))
    return math.sqrt(2.0) / diagonal * grid.cell_area * g


def fim_osef(p_t: TerminalPosition, geom: SurfaceGeometry, cfg: PhysicalConfig,
             alpha: int = DEFAULT_NUMERICS.alpha) -> FimMatrix:
    """2 SNR Re{g g^H} for the single complex OSEF observation (rank <= 2)."""
    grid = riemann_grid(geom, alpha)
    g = osef_gradient(p_t, grid, cfg, geom.diagonal)
    m = 2.0 * cfg.snr * np.real(np.outer(g, np.conj(g)))
    return FimMatrix(m, FieldModel.OSEF, "riemann")


def fim_determinant(m):
    """I_sum = 2 I12 I13 I23 + I11 I22 I33 - I13^2 I22 - I11 I23^2 - I12^2 I33."""
    return (2 * m[0, 1] * m[0, 2] * m[1, 2] + m[0, 0] * m[1, 1] * m[2, 2]
            - m[0, 2] ** 2 * m[1, 1] - m[0, 0] * m[1, 2] ** 2 - m[0, 1] ** 2 * m[2, 2])


def crb_from_fim(fim, mode: str = "full-invert") -> CrbResult:
    """Diagonal of the inverse FIM via explicit cofactors.

    ``per-component`` returns 1 / I_ii. For a singular matrix in full mode, a
    coordinate keeps 1 / I_ii only if it is decoupled from the others;
    otherwise it is reported as +inf.
    """
    fm = fim if isinstance(fim, FimMatrix) else FimMatrix(fim)
    m = fm.matrix
    tr = float(np.trace(m))
    diag = np.diag(m)
    if tr <= 0:
        return CrbResult(np.full(3, math.inf), fm.model, fm.path, True)
    tiny = SINGULAR_EPS * tr
    if mode == "per-component":
        crb = np.where(diag > tiny, 1.0 / np.where(diag > tiny, diag, 1.0), math.inf)
        return CrbResult(crb, fm.model, fm.path, bool(np.any(~np.isfinite(crb))))
    if mode != "full-invert":
        raise ValueError(f"unknown inversion mode {mode!r}")
    det = fim_determinant(m)
    if det > SINGULAR_EPS * tr ** 3:
        crb = np.array([
            (m[1, 1] * m[2, 2] - m[1, 2] ** 2) / det,
            (m[0, 0] * m[2, 2] - m[0, 2] ** 2) / det,
            (m[0, 0] * m[1, 1] - m[0, 1] ** 2) / det,
        ])
        return CrbResult(crb, fm.model, fm.path, False)
    crb = np.full(3, math.inf)
    for i in range(3):
        others = [j for j in range(3) if j != i]
        if diag[i] > tiny and all(abs(m[i, j]) <= tiny for j in others):
            crb[i] = 1.0 / diag[i]
    return CrbResult(crb, fm.model, fm.path, True)


def crb_point(p_t: TerminalPosition, geom: SurfaceGeometry, cfg: PhysicalConfig,
              model, numerics: Numerics = DEFAULT_NUMERICS) -> CrbResult:
    model = FieldModel.parse(model)
    if model is FieldModel.VEF:
        return crb_from_fim(fim_vef(p_t, geom, cfg, numerics.quad))
    if model is FieldModel.SEF:
        return crb_from_fim(fim_sef(p_t, geom, cfg, numerics.quad))
    fim = fim_osef(p_t, geom, cfg, numerics.alpha)
    res = crb_from_fim(fim, "per-component")
    if not p_t.is_cpl:
        warnings.warn("OSEF FIM has rank <= 2; reporting per-component bounds",
                      RankDeficiencyWarning, stacklevel=2)
        res = CrbResult(res.crb, res.model, "riemann/per-component", True)
    return res
