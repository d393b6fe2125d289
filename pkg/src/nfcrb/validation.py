"""Oracle checks shared by the ``validate`` command and the test suite."""

from __future__ import annotations

import math

import numpy as np

from .core import FieldModel, PhysicalConfig, SurfaceGeometry, TerminalPosition
from .cpl import (CLOSED_FORMS, CplScenario, crb_cpl, crb_cpl_large_zt, rho_bounds,
                  rho_closed_form, rho_numeric)
from .engine import crb_point, fim_sef, fim_vef
from .fields import sef_gradient, sef_kernel, vef_gradient, vef_kernel
from .simo import build_layout, lemma1_check

TAU_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
FD_REL_STEP = 1e-6
AUTHORITATIVE_FORMS = ("12y", "11z", "12z")


def random_field_case(rng):
    """A receive point, terminal and config with moderate k0 r."""
    cfg = PhysicalConfig(wavelength=float(rng.uniform(0.01, 0.1)), snr=float(rng.uniform(0.5, 50)))
    pt = TerminalPosition(*rng.uniform(-2, 2, 2), float(rng.uniform(0.3, 3)))
    pr = rng.uniform(-2, 2, 2)
    return pr, pt, cfg


def _central_difference(fn, pt: TerminalPosition, h):
    cols = []
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        plus = TerminalPosition(*(pt.as_array() + d))
        minus = TerminalPosition(*(pt.as_array() - d))
        cols.append((np.asarray(fn(plus)) - np.asarray(fn(minus))) / (2 * h))
    return np.stack(cols, axis=-1)


def gradient_fd_error(pr, pt, cfg, model):
    """max |analytic - FD| / max |analytic| for one configuration."""
    model = FieldModel.parse(model)
    r = math.sqrt((pr[0] - pt.x) ** 2 + (pr[1] - pt.y) ** 2 + pt.z ** 2)
    h = FD_REL_STEP * r
    k, e = cfg.k0, cfg.e_in
    if model is FieldModel.VEF:
        def fn(p):
            return e * np.array(vef_kernel(pr[0] - p.x, pr[1] - p.y, p.z, k))
        an = vef_gradient(pr, pt, cfg)
    else:
        def fn(p):
            return e * sef_kernel(pr[0] - p.x, pr[1] - p.y, p.z, k)
        an = sef_gradient(pr, pt, cfg)
    fd = _central_difference(fn, pt, h)
    return float(np.max(np.abs(fd - an)) / np.max(np.abs(an)))


def check_gradients(n=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        pr, pt, cfg = random_field_case(rng)
        for model in (FieldModel.VEF, FieldModel.SEF):
            worst = max(worst, gradient_fd_error(pr, pt, cfg, model))
    return {"passed": worst < 1e-6, "max_rel_err": worst, "threshold": 1e-6, "cases": n}


def random_fim_case(rng):
    cfg = PhysicalConfig(wavelength=float(rng.uniform(0.01, 0.1)), snr=float(rng.uniform(1, 20)))
    geom = SurfaceGeometry(float(rng.uniform(0.5, 4)))
    pt = TerminalPosition(*rng.uniform(-3, 3, 2), float(rng.uniform(0.5, 6)))
    return pt, geom, cfg


def dual_path_error(pt, geom, cfg, model):
    build = fim_vef if FieldModel.parse(model) is FieldModel.VEF else fim_sef
    a = build(pt, geom, cfg).matrix
    b = build(pt, geom, cfg, path="gradient").matrix
    return float(np.max(np.abs(a - b)) / np.max(np.abs(a)))


def check_dual_path(n=50, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        pt, geom, cfg = random_fim_case(rng)
        for model in (FieldModel.VEF, FieldModel.SEF):
            worst = max(worst, dual_path_error(pt, geom, cfg, model))
    return {"passed": worst < 1e-8, "max_rel_err": worst, "threshold": 1e-8, "cases": n}


def check_cpl_vs_point(n=20, seed=2):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        cfg = PhysicalConfig(wavelength=float(rng.uniform(0.005, 0.05)), snr=float(rng.uniform(1, 20)))
        z = float(rng.uniform(1, 10))
        d = float(rng.uniform(0.3, 10))
        for model in (FieldModel.VEF, FieldModel.SEF):
            a = crb_cpl(CplScenario.from_geometry(d, z, cfg, model)).crb
            b = crb_point(TerminalPosition.on_cpl(z), SurfaceGeometry(d), cfg, model).crb
            worst = max(worst, float(np.max(np.abs(a - b) / a)))
    return {"passed": worst < 1e-8, "max_rel_err": worst, "threshold": 1e-8, "cases": n}


def check_closed_forms(taus=TAU_GRID, rtol=1e-7):
    worst = 0.0
    mismatch_12x = []
    for t in taus:
        res = rho_closed_form(t)
        for key in AUTHORITATIVE_FORMS:
            worst = max(worst, res[key].rel_err)
        mismatch_12x.append(res["12x"].mismatch)
    detected = all(mismatch_12x)
    return {
        "passed": worst < rtol and detected,
        "max_rel_err": worst,
        "threshold": rtol,
        "rho12x": "documented-mismatch" if detected else "unexpected-agreement",
        "forms": sorted(CLOSED_FORMS),
    }


def check_bounds(taus=TAU_GRID):
    failures = []
    worst_margin = math.inf
    for t in taus:
        for model in (FieldModel.VEF, FieldModel.SEF):
            num = rho_numeric(t, model)
            for key, (lo, hi) in rho_bounds(t, model).items():
                q = num[key]
                margin = min(q - lo, hi - q) / q
                worst_margin = min(worst_margin, margin)
                if not lo <= q <= hi:
                    failures.append({"tau": t, "rho": key, "lower": lo, "value": q, "upper": hi})
    return {"passed": not failures, "min_rel_margin": worst_margin, "failures": failures}


def large_zt_ratios(tau, z_over_lambda, wavelength=0.01):
    """k0^2 rho_1 / (z^-2 rho_2) per model and axis at z = z_over_lambda * wavelength."""
    z = z_over_lambda * wavelength
    k = 2 * math.pi / wavelength
    out = {}
    for model in (FieldModel.VEF, FieldModel.SEF):
        t = rho_numeric(tau, model).values
        keys = list(t)
        out[model.value] = [k * k * t[keys[i]] / (t[keys[i + 3]] / z ** 2) for i in range(3)]
    return out


def check_large_zt_inequalities(taus=TAU_GRID):
    """Claims the derivation relies on, plus the informational ratio table."""
    dense = np.geomspace(0.01, 1e3, 200)
    gap = min(rho_numeric(t, FieldModel.VEF)["11y"] - rho_numeric(t, FieldModel.VEF)["12y"]
              for t in dense)
    worst_simpl = 0.0
    lam = 0.01
    for t in taus:
        for model in (FieldModel.VEF, FieldModel.SEF):
            sc = CplScenario(t, 1000 * lam, PhysicalConfig(lam, 10.0), model)
            full, simp = crb_cpl(sc).crb, crb_cpl_large_zt(sc).crb
            worst_simpl = max(worst_simpl, float(np.max(np.abs(simp - full) / full)))
    ratio_100 = min(min(v) for t in taus for v in large_zt_ratios(t, 100).values())
    return {
        "passed": gap > -2.34 and worst_simpl < 1e-3,
        "min_rho11y_minus_rho12y": gap,
        "large_zt_max_rel_diff_at_1000_lambda": worst_simpl,
        "info_min_ratio_at_100_lambda": ratio_100,
    }


def check_ordering(taus=TAU_GRID, z_over_lambda=100, wavelength=0.01):
    """VEF < SEF < OSEF per axis; an infinite OSEF entry satisfies the order."""
    ok = True
    worst = math.inf
    cfg = PhysicalConfig(wavelength, 10.0)
    z = z_over_lambda * wavelength
    for t in taus:
        vef, sef, osef = (crb_cpl(CplScenario(t, z, cfg, m)).crb for m in FieldModel)
        ok = ok and bool(np.all(sef > vef * (1 + 1e-12)) and np.all(osef > sef * (1 + 1e-12)))
        worst = min(worst, float(np.min(sef / vef - 1)))
    return {"passed": ok, "min_rel_gap_sef_over_vef": worst}


def check_mirror_symmetry(model=FieldModel.VEF):
    cfg = PhysicalConfig(0.001, 10.0)
    sym = lemma1_check(build_layout(4, 30.0, 6.0, 6.0), cfg, model)
    broken = lemma1_check(build_layout(4, 30.0, 6.0, 6.0), cfg, model, drop=0)
    passed = sym["offdiag_ratio"] < 1e-10 and sym["partner_diag_spread"] < 1e-10 \
        and broken["offdiag_ratio"] > 1e-6
    return {
        "passed": passed,
        "offdiag_ratio": sym["offdiag_ratio"],
        "partner_diag_spread": sym["partner_diag_spread"],
        "negative_control_offdiag_ratio": broken["offdiag_ratio"],
    }


GROUPS = {
    "gradient_finite_difference": check_gradients,
    "fim_dual_path": check_dual_path,
    "cpl_vs_general": check_cpl_vs_point,
    "closed_forms": check_closed_forms,
    "bound_sandwich": check_bounds,
    "large_zt_inequalities": check_large_zt_inequalities,
    "ordering": check_ordering,
    "mirror_symmetry": check_mirror_symmetry,
}


def run_all():
    groups = {name: fn() for name, fn in GROUPS.items()}
    return {"passed": all(g["passed"] for g in groups.values()), "groups": groups}
