import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import mathieu_a, mathieu_b

from mesojj.bands import (FD_STEP, JunctionParams, auto_truncation, average_n,
                          average_n_direct, band_columns, band_sweep,
                          build_hamiltonian, free_energy, junction_voltage,
                          spectrum)
from mesojj.errors import TruncationError
from mesojj.numerics import central_difference


def test_hamiltonian_entries():
    h = build_hamiltonian(JunctionParams(1.0, 0.0, 0.0, n_max=1))
    assert np.array_equal(h.diag, [1.0, 0.0, 1.0]) and np.array_equal(h.offdiag, [0.0, 0.0])
    h = build_hamiltonian(JunctionParams(1.0, 2.0, 0.5, n_max=1))
    assert np.allclose(h.diag, [2.25, 0.25, 0.25]) and np.allclose(h.offdiag, [-1.0, -1.0])


def test_truncation_rule():
    assert auto_truncation(0.0, 1.0) == 8
    assert auto_truncation(25.0, 1.0, q=0.3) == 1 + 20 + 8


def test_uncoupled_levels():
    e = spectrum(JunctionParams(1.0, 0.0, 0.3), 2).energies
    assert np.allclose(e, [0.09, 0.49], atol=1e-14)


@pytest.mark.parametrize("ratio", [0.1, 1.0, 5.0, 20.0])
def test_ground_band_matches_mathieu(ratio):
    # E_C (n - q)^2 - E_J cos(phi) maps onto Mathieu's equation with s = -2 E_J / E_C
    ec = 1.0
    e0 = spectrum(JunctionParams(ec, ratio * ec, 0.0), 1).energies[0]
    assert abs(e0 - ec / 4 * mathieu_a(0, -2 * ratio)) < 1e-10
    e0h = spectrum(JunctionParams(ec, ratio * ec, 0.5), 1).energies[0]
    assert abs(e0h - ec / 4 * mathieu_b(1, 2 * ratio)) < 1e-10


def test_dense_oracle_with_doubled_cutoff():
    p = JunctionParams(1.0, 3.0, 0.37)
    n = 2 * p.resolved_n_max()
    states = np.arange(-n, n + 1)
    dense = np.diag(p.e_c * (states - p.q) ** 2) - 0.5 * p.e_j * (np.eye(2 * n + 1, k=1) + np.eye(2 * n + 1, k=-1))
    ref = np.linalg.eigvalsh(dense)[:5]
    assert np.allclose(spectrum(p, 5).energies, ref, atol=1e-10)


def test_truncation_error_is_raised():
    with pytest.raises(TruncationError):
        spectrum(JunctionParams(1.0, 50.0, 0.0, n_max=3), 1)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(-2.0, 2.0))
def test_periodicity_and_reflection(ratio, q):
    p = JunctionParams(1.0, ratio, q, n_max=auto_truncation(ratio, 1.0, abs(q) + 1))
    e = spectrum(p, 3).energies
    assert np.allclose(spectrum(p.with_q(q + 1), 3).energies, e, atol=1e-10)
    assert np.allclose(spectrum(p.with_q(-q), 3).energies, e, atol=1e-10)


def test_average_n_periodic_shift():
    p = JunctionParams(1.0, 0.7, 0.23)
    assert abs(average_n(p.with_q(1.23)) - average_n(p) - 1.0) < 1e-10


def test_free_energy_direct_sum():
    p = JunctionParams(1.0, 0.0, 0.2)
    n = np.arange(-60, 61)
    ref = -math.log(np.exp(-(n - 0.2) ** 2).sum())
    assert abs(free_energy(p, 1.0) - ref) < 1e-12
    assert free_energy(p, 0.0) == spectrum(p, 1).energies[0]


@pytest.mark.parametrize("ratio,q,t", [(0.1, 0.2, 0.0), (1.0, 0.37, 0.0), (5.0, 0.1, 0.0),
                                       (1.0, 0.3, 0.2), (0.3, 0.45, 0.05), (10.0, 0.8, 1.0)])
def test_hellmann_feynman(ratio, q, t):
    p = JunctionParams(1.0, ratio, q)
    assert abs(average_n(p, t, "thermo") - average_n_direct(p, t)) < 1e-6


def test_half_integer_and_uncoupled():
    for ratio in (0.0, 0.01, 1.0, 10.0):
        assert abs(average_n(JunctionParams(1.0, ratio, 0.5)) - 0.5) < 1e-10
        assert abs(junction_voltage(JunctionParams(1.0, ratio, 0.5))) < 1e-10
    assert average_n(JunctionParams(1.0, 0.0, 0.49)) == 0.0
    assert abs(junction_voltage(JunctionParams(1.0, 0.0, 0.3)) + 0.3) < 1e-14


def test_sweep_columns_and_order():
    rows = band_sweep(JunctionParams(1.0, 0.0), [0.0, 0.25, 0.5], m_levels=2)
    assert rows.shape == (3, len(band_columns(2)))
    assert np.allclose(rows[:, 1], [0.0, 0.0625, 0.25])
    threaded = band_sweep(JunctionParams(1.0, 0.0), [0.0, 0.25, 0.5], m_levels=2, threads=3)
    assert np.array_equal(rows, threaded)


@pytest.mark.parametrize("ratio", [0.1, 1.0, 10.0])
def test_average_n_monotone(ratio):
    rows = band_sweep(JunctionParams(1.0, ratio), np.linspace(0, 1, 41), m_levels=1)
    assert np.all(np.diff(rows[:, -2]) >= -1e-9)


def test_two_level_reduction():
    for ratio in (0.01, 0.05):
        for q in (0.45, 0.5, 0.55):
            p = JunctionParams(1.0, ratio, q)
            e = spectrum(p, 2).energies
            bias, half = q - 0.5, 0.5 * ratio
            centre = bias ** 2 + 0.25
            two = np.array([centre - math.hypot(bias, half), centre + math.hypot(bias, half)])
            assert np.all(np.abs(e - two) <= 2 * ratio ** 2)


def test_flat_band_at_large_coupling():
    e0 = [spectrum(JunctionParams(1.0, 20.0, q), 1).energies[0] for q in np.linspace(0, 1, 21)]
    assert max(e0) - min(e0) < 1e-3 * 20.0


@pytest.mark.parametrize("ratio,q", [(0.3, 0.2), (2.0, 0.37), (20.0, 0.81)])
def test_ground_difference_matches_plain_stencil(ratio, q):
    p = JunctionParams(1.0, ratio, q, n_max=30)
    plain = central_difference(lambda x: free_energy(p.with_q(x)), q, FD_STEP)
    assert abs(q - plain / 2.0 - average_n(p, 0.0, "thermo")) < 1e-9
