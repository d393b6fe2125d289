"""Deterministic 2-D quadrature on rectangles.

Integrands are called as ``f(U, V)`` with ``U`` of shape ``(n, 1)`` and ``V``
of shape ``(1, m)``. They may return a real or complex array of shape
``(..., n, m)``; leading axes are integrated independently, which lets
several Fisher entries share one pass over the nodes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import ConfigError, SurfaceGeometry

# Upper bound on nodes evaluated per integrand call.
_CHUNK_POINTS = 1 << 20


class QuadratureError(ArithmeticError):
    """Non-finite integrand value; ``location`` holds the offending (u, v)."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class RectDomain:
    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ConfigError(f"degenerate rectangle {self}")

    @classmethod
    def centered(cls, half_u, half_v=None):
        half_v = half_u if half_v is None else half_v
        return cls(-half_u, half_u, -half_v, half_v)

    @classmethod
    def of_surface(cls, geom: SurfaceGeometry):
        return cls(*geom.bounds)

    @property
    def area(self):
        return (self.u_max - self.u_min) * (self.v_max - self.v_min)


class Rule(enum.Enum):
    TENSOR_GAUSS = "tensor-gauss"
    RIEMANN_MIDPOINT = "riemann-midpoint"


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule settings.

    For ``tensor-gauss`` ``order`` is the Gauss-Legendre order per axis and
    ``panels`` the initial number of panels per axis; all panels are bisected
    until the relative change drops below ``tol`` or ``max_refinements`` is
    reached. For ``riemann-midpoint`` ``order`` is the cell count per axis.
    """

    rule: Rule = Rule.TENSOR_GAUSS
    order: int = 32
    panels: int = 4
    tol: float = 1e-10
    max_refinements: int = 4

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        if int(self.order) != self.order or self.order < 2:
            raise ConfigError("quadrature order must be an integer >= 2")
        if int(self.panels) != self.panels or self.panels < 1:
            raise ConfigError("panel count must be a positive integer")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.max_refinements < 0:
            raise ConfigError("max_refinements must be non-negative")


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: np.ndarray | float | complex
    error: float
    evaluations: int
    converged: bool


@lru_cache(maxsize=32)
def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _nodes(edges, order):
    x, w = _gauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _check_finite(vals, us, vs, row0):
    if np.all(np.isfinite(vals)):
        return
    bad = np.argwhere(~np.isfinite(vals))[0]
    i, j = int(bad[-2]) + row0, int(bad[-1])
    loc = (float(us[i]), float(vs[j]))
    raise QuadratureError(f"non-finite integrand at (u, v) = {loc}", loc)


def _tensor_sum(f, us, wu, vs, wv):
    rows = max(1, _CHUNK_POINTS // len(vs))
    total = None
    V = vs[None, :]
    for start in range(0, len(us), rows):
        U = us[start:start + rows, None]
        vals = np.asarray(f(U, V))
        _check_finite(vals, us, vs, start)
        part = (vals @ wv) @ wu[start:start + rows]
        total = part if total is None else total + part
    return total


def _edges(lo, hi, panels, breaks):
    e = np.linspace(lo, hi, panels + 1)
    if breaks is not None and len(breaks):
        b = np.asarray(breaks, dtype=float)
        b = b[(b > lo) & (b < hi)]
        e = np.unique(np.concatenate([e, b]))
        # Merge slivers left by nearly coincident breakpoints.
        keep = np.concatenate([[True], np.diff(e) > 1e-12 * (hi - lo)])
        e = e[keep]
        e[-1] = hi
    return e


def _bisect(e):
    out = np.empty(2 * len(e) - 1)
    out[0::2] = e
    out[1::2] = 0.5 * (e[1:] + e[:-1])
    return out


def _rel_change(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.max(np.abs(b))
    diff = np.max(np.abs(a - b))
    if scale == 0:
        return diff
    return diff / scale


def graded_breaks(lo, hi, center, scale, ratio=2.0, max_levels=40):
    """Breakpoints at center +- scale * ratio**m, clipped to (lo, hi).

    Keeps each panel about as wide as its distance to ``center``, which is
    where peaked integrands of width ``scale`` need resolution.
    """
    pts = [center]
    step = scale
    for _ in range(max_levels):
        pts.extend((center - step, center + step))
        if center - step <= lo and center + step >= hi:
            break
        step *= ratio
    pts = np.asarray(pts)
    return np.sort(pts[(pts > lo) & (pts < hi)])


def integrate_2d(f, dom: RectDomain, spec: QuadratureSpec = DEFAULT_SPEC,
                 u_breaks=None, v_breaks=None) -> QuadResult:
    """Integrate ``f`` over ``dom``.

    The error estimate is the change between the last two refinement levels.
    Optional breakpoints are merged into the initial panel grid.
    """
    if spec.rule is Rule.RIEMANN_MIDPOINT:
        return _riemann_integrate(f, dom, spec)
    eu = _edges(dom.u_min, dom.u_max, spec.panels, u_breaks)
    ev = _edges(dom.v_min, dom.v_max, spec.panels, v_breaks)
    us, wu = _nodes(eu, spec.order)
    vs, wv = _nodes(ev, spec.order)
    prev = _tensor_sum(f, us, wu, vs, wv)
    evals = len(us) * len(vs)
    err = math.inf
    for _ in range(spec.max_refinements):
        eu, ev = _bisect(eu), _bisect(ev)
        us, wu = _nodes(eu, spec.order)
        vs, wv = _nodes(ev, spec.order)
        cur = _tensor_sum(f, us, wu, vs, wv)
        evals += len(us) * len(vs)
        err = float(np.max(np.abs(np.asarray(cur) - np.asarray(prev))))
        conv = _rel_change(cur, prev) <= spec.tol
        prev = cur
        if conv:
            return QuadResult(_scalarize(cur), err, evals, True)
    return QuadResult(_scalarize(prev), err, evals, spec.max_refinements == 0)


def _scalarize(v):
    v = np.asarray(v)
    return v.item() if v.ndim == 0 else v


def _midpoint(f, dom, n):
    du = (dom.u_max - dom.u_min) / n
    dv = (dom.v_max - dom.v_min) / n
    us = dom.u_min + du * (np.arange(n) + 0.5)
    vs = dom.v_min + dv * (np.arange(n) + 0.5)
    return _tensor_sum(f, us, np.full(n, du), vs, np.full(n, dv))


def _riemann_integrate(f, dom, spec):
    n = spec.order
    coarse = _midpoint(f, dom, n)
    fine = _midpoint(f, dom, 3 * n)
    err = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    return QuadResult(_scalarize(coarse), err, 10 * n * n, True)


class RiemannGrid(NamedTuple):
    """Cell centres along each axis and the common cell area."""

    x: np.ndarray
    y: np.ndarray
    cell_area: float

    def points(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=-1)


def check_alpha(alpha):
    """Return sqrt(alpha); it must be a positive odd integer."""
    if isinstance(alpha, bool) or int(alpha) != alpha or alpha < 1:
        raise ConfigError(f"alpha must be a positive perfect square, got {alpha!r}")
    n = math.isqrt(int(alpha))
    if n * n != alpha or n % 2 == 0:
        raise ConfigError(f"sqrt(alpha) must be an odd integer, got alpha={alpha}")
    return n


def riemann_grid(region, alpha) -> RiemannGrid:
    """Midpoint grid of ``alpha`` equal cells over a surface or rectangle."""
    n = check_alpha(alpha)
    dom = RectDomain.of_surface(region) if isinstance(region, SurfaceGeometry) else region
    du = (dom.u_max - dom.u_min) / n
    dv = (dom.v_max - dom.v_min) / n
    # Offsets from the midpoint keep centred grids exactly antisymmetric.
    k = np.arange(n) - (n - 1) / 2
    x = 0.5 * (dom.u_min + dom.u_max) + du * k
    y = 0.5 * (dom.v_min + dom.v_max) + dv * k
    return RiemannGrid(x, y, du * dv)
