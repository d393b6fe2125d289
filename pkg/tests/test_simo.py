import math

import numpy as np
import pytest

from nfcrb.core import ConfigError, FieldModel, PhysicalConfig, SurfaceGeometry
from nfcrb.cpl import CplScenario, crb_cpl
from nfcrb.quadrature import RectDomain
from nfcrb.simo import (OverlapWarning, SimoLayout, build_layout, crb_simo, crb_simo_large_zt,
                        lemma1_check)

CFG = PhysicalConfig(0.001, 10.0)


def test_quadrant_domain_example():
    d = build_layout(2, 30.0, 6.0, 6.0).quadrant_domains()[(1, 1)]
    np.testing.assert_allclose([d.u_min, d.u_max], [4.2426, 6.3640], atol=5e-5)
    np.testing.assert_allclose([d.v_min, d.v_max], [4.2426, 6.3640], atol=5e-5)


def test_siso_layout_is_centred_surface():
    (d,) = build_layout(1, 30.0, 3.0, 6.0).all_domains()
    assert d == RectDomain.of_surface(SurfaceGeometry(3.0))


@pytest.mark.parametrize("n_s", [1, 2, 4, 6])
def test_total_area(n_s):
    lay = build_layout(n_s, 30.0, 6.0, 6.0)
    total = sum(d.area for d in lay.all_domains())
    np.testing.assert_allclose(total, 6.0 ** 2 / 2, rtol=1e-13)
    np.testing.assert_allclose(lay.total_area, 18.0, rtol=1e-13)
    assert len(lay.all_domains()) == n_s ** 2


def test_normalized_domains_scale():
    lay = build_layout(4, 30.0, 6.0, 3.0)
    for ij, d in lay.quadrant_domains().items():
        n = lay.normalized_domains()[ij]
        np.testing.assert_allclose([n.u_min, n.v_max], [d.u_min / 3, d.v_max / 3], rtol=1e-15)


def test_layout_validation():
    for n_s in (0, 3, 2.5):
        with pytest.raises(ConfigError):
            SimoLayout(n_s, 30.0, 6.0, 6.0)
    with pytest.raises(ConfigError):
        SimoLayout(2, 30.0, -1.0, 6.0)
    with pytest.warns(OverlapWarning):
        assert build_layout(2, 30.0, 40.0, 6.0).overlapping


@pytest.mark.parametrize("model", list(FieldModel))
def test_single_antenna_equals_siso(model):
    m = crb_simo(build_layout(1, 30.0, 3.0, 6.0), CFG, model).crb
    c = crb_cpl(CplScenario.from_geometry(3.0, 6.0, CFG, model)).crb
    fin = np.isfinite(c)
    np.testing.assert_array_equal(np.isfinite(m), fin)
    np.testing.assert_allclose(m[fin], c[fin], rtol=1e-10)


@pytest.mark.parametrize("model", ["vef", "sef"])
def test_large_zt_agreement(model):
    lay = build_layout(2, 30.0, 6.0, 1000 * CFG.wavelength)
    np.testing.assert_allclose(crb_simo_large_zt(lay, CFG, model).crb,
                               crb_simo(lay, CFG, model).crb, rtol=1e-3)


def test_large_zt_single_antenna():
    lay = build_layout(1, 30.0, 0.5, 1.0)
    np.testing.assert_allclose(crb_simo_large_zt(lay, CFG, "vef").crb,
                               crb_simo(lay, CFG, "vef").crb, rtol=1e-3)
    with pytest.raises(ConfigError):
        crb_simo_large_zt(lay, CFG, "osef")


@pytest.mark.parametrize("n_s", [2, 4])
def test_simo_ordering(n_s):
    lay = build_layout(n_s, 30.0, 6.0, 6.0)
    v, s, o = (crb_simo(lay, CFG, m).crb for m in FieldModel)
    assert np.all(v < s)
    fin = np.isfinite(o)
    assert np.all(s[fin] < o[fin])


def test_simo_inverse_linear_in_snr():
    lay = build_layout(2, 30.0, 6.0, 6.0)
    for m in FieldModel:
        a = crb_simo(lay, CFG, m).crb
        b = crb_simo(lay, CFG.with_snr(1000.0), m).crb
        np.testing.assert_allclose(100 * b, a, rtol=1e-14)


def test_mirror_symmetry():
    lay = build_layout(4, 30.0, 6.0, 6.0)
    for model in ("vef", "sef"):
        rep = lemma1_check(lay, CFG, model)
        assert rep["antennas"] == 16
        assert rep["offdiag_ratio"] < 1e-10
        assert rep["partner_diag_spread"] < 1e-10


def test_mirror_symmetry_negative_control():
    rep = lemma1_check(build_layout(2, 30.0, 6.0, 6.0), CFG, "vef", drop=1)
    assert rep["antennas"] == 3
    assert rep["offdiag_ratio"] > 1e-6
    with pytest.raises(ConfigError):
        lemma1_check(build_layout(1, 30.0, 6.0, 6.0), CFG, "vef")


def test_full_fim_matches_quadrant_formula():
    # full per-antenna FIM diagonal equals the quadrant-sum CRB of crb_simo
    lay = build_layout(2, 30.0, 6.0, 6.0)
    fim = lemma1_check(lay, CFG, "vef")["fim"]
    np.testing.assert_allclose(1 / np.diag(fim), crb_simo(lay, CFG, "vef").crb, rtol=1e-8)


def test_more_antennas_help_xy_at_fixed_area():
    small = crb_simo(build_layout(1, 30.0, 3.0, 6.0), CFG, "vef").crb
    split = crb_simo(build_layout(2, 30.0, 3.0, 6.0), CFG, "vef").crb
    assert np.all(split[:2] < small[:2])
    assert split[2] > small[2]
    assert math.isfinite(split[2])
