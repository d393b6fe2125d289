import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfcrb.core import DomainError, PhysicalConfig, SurfaceGeometry, TerminalPosition, to_local_spherical
from nfcrb.fields import (GreenVariant, green_correction_factors, green_fresnel, green_planewave,
                          osef, scalar_green, sef, sef_gradient, tensor_green, vef, vef_gradient)
from nfcrb.validation import gradient_fd_error, random_field_case

CFG = PhysicalConfig(0.01, 10.0)


def test_scalar_green_full_cycle():
    g = scalar_green(CFG.wavelength, CFG)
    np.testing.assert_allclose(g, -1j * CFG.eta / (2 * CFG.wavelength ** 2), rtol=1e-12)


def test_scalar_green_amplitude():
    assert abs(scalar_green(2.0, CFG)) == pytest.approx(9418.25, rel=1e-12)
    assert abs(scalar_green(4.0, CFG)) == pytest.approx(abs(scalar_green(2.0, CFG)) / 2, rel=1e-14)
    with pytest.raises(DomainError):
        scalar_green(0.0, CFG)


def test_green_correction_at_one_wavelength():
    a, b = green_correction_factors(CFG.wavelength, CFG)
    assert a == pytest.approx(0.975, abs=1e-3)
    assert b == pytest.approx(1.082, abs=1e-3)


def test_radiative_tensor_projects_out_axis():
    g = tensor_green([0, 0, 1.0], GreenVariant.RADIATIVE_TENSOR, CFG)
    assert g[2, 2] == 0
    assert abs(g[0, 0]) > 0


def _tensor_gap(kr):
    v = np.array([0.3, -0.5, 0.8])
    v = kr / CFG.k0 * v / np.linalg.norm(v)
    ex = tensor_green(v, GreenVariant.EXACT_TENSOR, CFG)
    rad = tensor_green(v, GreenVariant.RADIATIVE_TENSOR, CFG)
    return np.max(np.abs(ex - rad)) / np.max(np.abs(rad))


def test_exact_tensor_approaches_radiative():
    # the correction terms are O(1/(k0 r)), so the gap shrinks tenfold per decade
    gaps = [_tensor_gap(kr) for kr in (1e2, 1e3, 1e4)]
    assert gaps[0] < 3.0 / 1e2
    np.testing.assert_allclose(gaps[0] / gaps[1], 10.0, rtol=0.05)
    np.testing.assert_allclose(gaps[1] / gaps[2], 10.0, rtol=0.05)


def test_tensor_green_errors():
    with pytest.raises(DomainError):
        tensor_green([0, 0, 0], GreenVariant.EXACT_TENSOR, CFG)
    with pytest.raises(ValueError):
        tensor_green([0, 0, 1], GreenVariant.FRESNEL, CFG)


def test_vef_on_axis():
    f = vef((0, 0), TerminalPosition(0, 0, 3), CFG)
    assert f.ex == 0 and f.ez == 0
    assert abs(f.ey) == pytest.approx(1 / 3)


def test_vef_offset_point():
    f = vef((1, 1), TerminalPosition(0, 0, 2), CFG)
    s6 = 6 ** 1.5
    np.testing.assert_allclose([abs(f.ex), abs(f.ey), abs(f.ez)],
                               [1 / s6, 1 / math.sqrt(6) - 1 / s6, 2 / s6], rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 4))
def test_vef_matches_theta_projection(xr, yr, xt, yt, zt):
    # e = j (1/r) sin(theta) theta_hat e^{-jkr} for a +Y dipole of unit amplitude
    pt = TerminalPosition(xt, yt, zt)
    s = to_local_spherical((xr, yr), pt)
    theta_hat = np.array([s.cos_theta * s.cos_phi, -s.sin_theta, -s.cos_theta * s.sin_phi])
    ref = 1j * s.sin_theta / s.r * np.exp(-1j * CFG.k0 * s.r) * theta_hat
    got = vef((xr, yr), pt, CFG).as_array()
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-12 / s.r)


def test_vef_scales_with_e_in():
    cfg = PhysicalConfig(0.01, current=2.0, length=0.01)
    a = vef((0.4, 0.2), TerminalPosition(0, 0, 1), cfg).as_array()
    b = vef((0.4, 0.2), TerminalPosition(0, 0, 1), CFG).as_array()
    np.testing.assert_allclose(a, cfg.e_in * b, rtol=1e-14)


def test_vef_coincident_point():
    with pytest.raises(DomainError):
        vef((0, 0, 0.5), TerminalPosition(0, 0, 1), CFG)


def test_sef_examples():
    assert abs(sef((0, 0), TerminalPosition(0, 0, 4), CFG)) == pytest.approx(0.25)
    v = abs(sef((1, 1), TerminalPosition(0, 0, 2), CFG))
    assert v == pytest.approx(math.sqrt(10) / 6 ** 1.25, rel=1e-12)


def test_sef_vanishes_at_grazing():
    mags = [abs(sef((1.0, 0.0), TerminalPosition(0, 0, z), CFG)) for z in (1e-2, 1e-4, 1e-6)]
    assert mags[0] > mags[1] > mags[2]
    assert mags[2] < 1e-2


def test_sef_matches_spherical_form():
    pt = TerminalPosition(0.3, -0.2, 1.7)
    s = to_local_spherical((1.1, 0.4), pt)
    ref = np.sqrt(s.sin_theta ** 3 * s.sin_phi) / s.r * np.exp(-1j * CFG.k0 * s.r)
    np.testing.assert_allclose(sef((1.1, 0.4), pt, CFG), ref, rtol=1e-12)


def test_osef_single_cell():
    geom = SurfaceGeometry(2.0)
    v = osef(TerminalPosition(0, 0, 5), geom, CFG, 1)
    np.testing.assert_allclose(abs(v), geom.diagonal / math.sqrt(2) / 5, rtol=1e-14)


def test_osef_alpha_convergence():
    geom, pt = SurfaceGeometry(1.0), TerminalPosition(0, 0, 6)
    a = abs(osef(pt, geom, CFG, 201 ** 2))
    b = abs(osef(pt, geom, CFG, 401 ** 2))
    assert abs(a - b) / b < 1e-3


def test_osef_triangle_bound():
    geom, pt = SurfaceGeometry(1.5), TerminalPosition(0.2, 0.1, 2)
    alpha = 51 ** 2
    h = geom.half_width
    xs = np.linspace(-h, h, 51)
    peak = np.max(np.abs(sef(np.stack(np.meshgrid(xs, xs), -1), pt, CFG)))
    assert abs(osef(pt, geom, CFG, alpha)) <= math.sqrt(2) / geom.diagonal * geom.area * peak


@pytest.mark.parametrize("alpha", [4, 2, 10, 0])
def test_osef_rejects_bad_alpha(alpha):
    from nfcrb.core import ConfigError

    with pytest.raises(ConfigError):
        osef(TerminalPosition(0, 0, 1), SurfaceGeometry(1), CFG, alpha)


def test_gradient_zero_factors():
    g = vef_gradient((0, 0), TerminalPosition(0, 0, 2), CFG)
    assert g[0, 1] == 0
    s = sef_gradient((0.5, 0.3), TerminalPosition(0.1, 0.3, 2), CFG)
    assert s[1] == 0
    s = sef_gradient((0, 0.4), TerminalPosition(0, 0, 2), CFG)
    assert s[0] == 0


def test_vef_gradient_mirror_pair_cancels():
    # mirrored receive points contribute opposite-signed x/y cross terms
    pt = TerminalPosition(0, 0, 1.5)
    g1 = vef_gradient((0.4, 0.7), pt, CFG)
    g2 = vef_gradient((-0.4, 0.7), pt, CFG)
    f = np.real(g1.T @ g1.conj()) + np.real(g2.T @ g2.conj())
    assert abs(f[0, 1]) < 1e-12 * f[0, 0]
    assert abs(f[0, 2]) < 1e-12 * f[0, 0]


@pytest.mark.parametrize("model", ["vef", "sef"])
def test_gradients_match_finite_differences(model):
    rng = np.random.default_rng(11)
    worst = max(gradient_fd_error(*random_field_case(rng), model) for _ in range(100))
    assert worst < 1e-6


def test_gradient_shapes():
    pts = np.zeros((4, 5, 2)) + 0.1
    assert vef_gradient(pts, TerminalPosition(0, 0, 1), CFG).shape == (4, 5, 3, 3)
    assert sef_gradient(pts, TerminalPosition(0, 0, 1), CFG).shape == (4, 5, 3)


def test_approximate_greens_at_centre():
    pt = TerminalPosition(0.5, -0.3, 2.0)
    exact = scalar_green(pt.r_to, CFG)
    np.testing.assert_allclose(green_fresnel((0, 0), pt, CFG), exact, rtol=1e-12)
    np.testing.assert_allclose(green_planewave((0, 0), pt, CFG), exact, rtol=1e-12)


def test_fresnel_beats_planewave_near_centre():
    pt = TerminalPosition(0.5, -0.3, 20.0)
    cfg = PhysicalConfig(0.1)
    p = (0.2, 0.1)
    r = math.sqrt((0.2 - 0.5) ** 2 + 0.4 ** 2 + 400)
    exact = np.exp(-1j * cfg.k0 * r)
    fr = green_fresnel(p, pt, cfg) / abs(green_fresnel(p, pt, cfg))
    pw = green_planewave(p, pt, cfg) / abs(green_planewave(p, pt, cfg))
    ref = -1j * exact
    assert abs(fr - ref) < abs(pw - ref)
