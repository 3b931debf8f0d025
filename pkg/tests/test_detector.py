import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesojj.detector import (DetectorParams, NoiseQuartet, average_current,
                             backaction_noise, cross_correlator, current_noise,
                             deep_collector_quartet, deep_collector_sensitivity,
                             energy_sensitivity, fermi, kernel_si, noise_quartet,
                             pointwise_quantum_limit, response_coefficient,
                             sensitivity_sweep, signal_to_noise, transparency)
from mesojj.errors import ZeroNoise, ZeroResponse

rates = st.floats(0.05, 5.0)


def test_fermi():
    assert fermi(0.3, 0.3, 0.1) == 0.5
    assert fermi(0.2, 0.3, 0.0) == 1.0 and fermi(0.3, 0.3, 0.0) == 0.5 and fermi(0.4, 0.3, 0.0) == 0.0
    x = np.linspace(-3, 3, 13)
    assert np.allclose(fermi(1 + x, 1, 0.4) + fermi(1 - x, 1, 0.4), 1.0, atol=1e-15)
    assert fermi(1e4, 0.0, 1e-3) == 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        DetectorParams(0.0, 1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        DetectorParams(1.0, 1.0, 0.0, -1.0, 0.0)
    p = DetectorParams.emitter_offset(0.2, 0.3, -2.0)
    assert p.z == pytest.approx(-2.0) and p.gamma == pytest.approx(0.5)


@pytest.mark.parametrize("z,bias", [(0.0, 1.0), (-5.0, 20.0), (3.0, 10.0)])
def test_antiderivative_vs_quadrature(z, bias):
    g1, g2 = 0.4, 0.6
    p = DetectorParams(g1, g2, 0.0, z, z - bias)
    for fn in (backaction_noise, current_noise, response_coefficient, average_current):
        assert fn(p, "quad") == pytest.approx(fn(p, "closed"), rel=1e-8)
    c, q = cross_correlator(p, "closed"), cross_correlator(p, "quad")
    assert abs(c - q) <= 1e-8 * abs(c)


def test_trivial_limits():
    eq = DetectorParams(0.3, 0.5, 0.1, 0.2, 0.2)
    assert current_noise(eq) == 0 and average_current(eq) == 0 and response_coefficient(eq) == 0
    warm = DetectorParams(0.3, 0.5, 0.1, 0.2, 0.2, temp=0.05)
    assert response_coefficient(warm) == 0
    assert current_noise(warm) > 0
    sym = DetectorParams(0.5, 0.5, 0.0, 1.0, -2.0)
    assert cross_correlator(sym).real == 0
    tiny = DetectorParams(1e-9, 1.0, 0.0, 0.5, -0.5)
    assert backaction_noise(tiny) < 1e-8


@settings(max_examples=50, deadline=None)
@given(rates, rates, st.floats(-3, 3), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_im_cross_correlator_is_response(g1, g2, eps, up, down):
    p = DetectorParams(g1, g2, eps, up, -down)
    lam = response_coefficient(p)
    assert abs(cross_correlator(p).imag + lam / (4 * math.pi)) <= 1e-10 * max(abs(lam), 1e-300) + 1e-300


@pytest.mark.parametrize("temp", [0.02, 0.3])
def test_im_cross_correlator_finite_temperature(temp):
    p = DetectorParams(0.3, 0.7, 0.1, 1.0, -2.0, temp)
    assert cross_correlator(p).imag == pytest.approx(-response_coefficient(p) / (4 * math.pi), rel=1e-9)


@pytest.mark.parametrize("g1,g2,eps", [(0.3, 0.7, 0.2), (0.5, 0.5, -0.1), (1.0, 0.2, 0.0)])
def test_johnson_nyquist(g1, g2, eps):
    # at eV = 0 the current noise is T G / pi with G = D(mu) / 2 pi
    temp = 1e-3 * (g1 + g2)
    p = DetectorParams(g1, g2, eps, 0.0, 0.0, temp)
    expected = temp * float(transparency(p, 0.0)) / (2 * math.pi ** 2)
    assert current_noise(p) == pytest.approx(expected, rel=1e-5)


@pytest.mark.parametrize("temp", [0.01, 0.1, 1.0])
def test_equilibrium_cross_correlator_vanishes(temp):
    p = DetectorParams(0.2, 0.9, 0.15, 0.4, 0.4, temp)
    s_iq = cross_correlator(p)
    assert abs(s_iq.real) < 1e-15 and abs(s_iq.imag) < 1e-15


def test_conductance_from_current():
    temp, h = 0.05, 1e-5
    base = dict(gamma1=0.3, gamma2=0.6, eps_level=0.1, temp=temp)
    i_plus = average_current(DetectorParams(mu1=h / 2, mu2=-h / 2, **base))
    g_lin = i_plus / h
    s_i = current_noise(DetectorParams(mu1=0.0, mu2=0.0, **base))
    assert s_i == pytest.approx(temp * g_lin / math.pi, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(rates, rates, st.floats(-5, 5), st.floats(-5, 5))
def test_shot_noise_kernel_is_landauer(g1, g2, eps, nu):
    p = DetectorParams(g1, g2, eps, 1.0, 0.0)
    d = float(transparency(p, nu))
    # reflection written out so that it does not cancel when d is close to 1
    reflect = ((eps - nu) ** 2 + (g1 - g2) ** 2) / ((eps - nu) ** 2 + (g1 + g2) ** 2)
    assert float(kernel_si(p, nu)) == pytest.approx(d * reflect / (4 * math.pi ** 2), rel=1e-12, abs=1e-300)


def test_landauer_unit_transparency():
    g = 0.5
    p = DetectorParams(g, g, 0.0, 0.0, -1e-3)
    assert average_current(p) == pytest.approx(1e-3 / (2 * math.pi), rel=1e-3)


def test_response_coefficient_examples():
    g1, g2 = 0.3, 0.7
    e = 10.0
    p = DetectorParams(g1, g2, 0.0, e, -1e6)
    assert response_coefficient(p) == pytest.approx(2 * g1 * g2 / (math.pi * e ** 2), rel=0.015)
    assert deep_collector_quartet(g1, g2, 0.0).lam == pytest.approx(2 * g1 * g2 / math.pi)


def test_deep_collector_limit_of_antiderivatives():
    g1, g2 = 0.3, 0.7
    for z in (-4.0, 0.0, 2.5):
        nq = noise_quartet(DetectorParams.emitter_offset(g1, g2, z, collector_depth=1e7))
        ref = deep_collector_quartet(g1, g2, z)
        # S_I converges like 1/depth, the rest like 1/depth^2 or faster
        assert nq.s_i == pytest.approx(ref.s_i, rel=1e-5)
        assert nq.s_q == pytest.approx(ref.s_q, rel=1e-9)
        assert nq.lam == pytest.approx(ref.lam, rel=1e-9)
        assert abs(nq.s_iq - ref.s_iq) <= 1e-9 * abs(ref.s_iq)


def test_deep_collector_values():
    g = 1.0
    nq = deep_collector_quartet(g / 2, g / 2, 0.0)
    assert nq.s_i == pytest.approx(g / (16 * math.pi), rel=1e-12)
    g1, g2 = 0.25, 0.75
    nq = deep_collector_quartet(g1, g2, -1.3)
    assert nq.s_iq.real == pytest.approx((g2 - g1) * nq.s_q, rel=1e-12)
    full = deep_collector_quartet(g1, g2, 1e12)
    assert full.s_i == pytest.approx(2 * g1 * g2 / (g1 + g2) / (2 * math.pi) * (1 - 2 * g1 * g2), rel=1e-9)
    assert full.s_q == pytest.approx(g1 * g2 / (2 * math.pi), rel=1e-9)


@pytest.mark.parametrize("z", [-20.0, -1.0, 0.0, 0.7, 4.0])
def test_closed_sensitivity_matches_quartet(z):
    for ratio in (0.1, 1.0, 10.0):
        g1, g2 = ratio / (1 + ratio), 1 / (1 + ratio)
        assert deep_collector_quartet(g1, g2, z).energy_sensitivity == pytest.approx(
            deep_collector_sensitivity(z), rel=1e-12)


def test_sensitivity_extremes():
    assert deep_collector_sensitivity(0.0) == pytest.approx(math.pi / 4, abs=1e-15)
    zs = np.linspace(5, 50, 10)
    assert np.allclose(deep_collector_sensitivity(zs) / (math.pi * zs ** 2 / 2), 1, rtol=0.2 / 5)
    assert deep_collector_quartet(0.5, 0.5, 0.0).snr == pytest.approx((4 / math.pi) ** 2, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(-30, 5), st.booleans())
def test_bounds_and_asymmetry(ratio, z, swap):
    g1, g2 = ratio / (1 + ratio), 1 / (1 + ratio)
    if swap:
        g1, g2 = g2, g1
    nq = deep_collector_quartet(g1, g2, z)
    assert nq.energy_sensitivity >= 0.5
    assert nq.snr <= 4.0
    assert abs(nq.energy_sensitivity - deep_collector_quartet(0.5, 0.5, z).energy_sensitivity) < 1e-10


@settings(max_examples=60, deadline=None)
@given(rates, rates, st.floats(-2, 2), st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0, 0.5))
def test_sensitivity_bound_general_route(g1, g2, eps, up, down, temp):
    p = DetectorParams(g1, g2, eps, up, -down, temp)
    nq = noise_quartet(p)
    if nq.lam != 0:
        assert nq.energy_sensitivity >= 0.5 * (1 - 1e-9)
        assert nq.snr <= 4 * (1 + 1e-9)


def test_symmetric_snr_equals_inverse_square_sensitivity():
    for z in (-10.0, 0.0, 1.5):
        nq = noise_quartet(DetectorParams.emitter_offset(0.5, 0.5, z, collector_depth=80.0))
        assert nq.snr == pytest.approx(1 / nq.energy_sensitivity ** 2, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(rates, rates, st.floats(-5, 5), st.floats(-10, 10))
def test_pointwise_identities(g1, g2, eps, nu):
    res = pointwise_quantum_limit(DetectorParams(g1, g2, eps, 1.0, 0.0), nu)
    assert res.product < 1e-12 and res.imaginary < 1e-12
    if nu != eps:
        assert res.sensitivity == pytest.approx(0.5, rel=1e-12)


def test_pointwise_symmetric_snr():
    res = pointwise_quantum_limit(DetectorParams(0.5, 0.5, 0.0, 1.0, 0.0), 0.37)
    assert res.snr == pytest.approx(4.0, rel=1e-12)


def test_zero_response_and_noise():
    with pytest.raises(ZeroResponse):
        energy_sensitivity(DetectorParams(0.3, 0.5, 0.1, 0.2, 0.2))
    with pytest.raises(ZeroNoise):
        signal_to_noise(DetectorParams(0.3, 0.5, 0.1, 0.2, 0.2))
    with pytest.raises(ZeroNoise):
        NoiseQuartet(0.0, 1.0, 0j, 1.0).snr


def test_finite_temperature_window_converges():
    p = DetectorParams(0.3, 0.7, 0.0, 2.0, -3.0, temp=0.5)
    cold = DetectorParams(0.3, 0.7, 0.0, 2.0, -3.0, temp=1e-9)
    assert noise_quartet(cold).s_q == pytest.approx(noise_quartet(DetectorParams(0.3, 0.7, 0.0, 2.0, -3.0)).s_q)
    warm = noise_quartet(p)
    assert warm.s_i > 0 and warm.s_q > 0 and warm.lam > 0
    with pytest.raises(ValueError):
        backaction_noise(p, "closed")


def test_sweep_rows():
    rows = sensitivity_sweep(0.5, 0.5, [-30.0, 0.0, 5.0])
    assert rows.shape == (3, 7)
    assert rows[1, 5] == pytest.approx(math.pi / 4)
    assert np.all(rows[:, 6] <= 4)


@settings(max_examples=200, deadline=None)
@given(rates, rates, st.floats(-5, 5), st.floats(-10, 10))
def test_float_kernels_satisfy_identities(g1, g2, eps, nu):
    from mesojj.detector import kernel_lambda, kernel_sq, kernel_siq
    p = DetectorParams(g1, g2, eps, 1.0, 0.0)
    s_i, s_q, s_iq = float(kernel_si(p, nu)), float(kernel_sq(p, nu)), complex(kernel_siq(p, nu))
    lam = float(kernel_lambda(p, nu))
    assert abs(s_i * s_q - abs(s_iq) ** 2) <= 1e-12 * max(s_i * s_q, abs(s_iq) ** 2)
    assert abs(s_iq.imag + lam / (4 * math.pi)) <= 1e-12 * abs(lam) / (4 * math.pi)
