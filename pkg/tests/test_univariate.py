import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cxbox.errors import DivergentSeriesError, OrthogonalFrequencyError, TruncationLimitError, UnsupportedRegimeError
from cxbox.services.univariate import (
    ComplexBSpline,
    TruncatedPower,
    backward_difference,
    backward_difference_symbol,
    bspline_derivative_eval,
    bspline_eval,
    bspline_fourier,
    bspline_recurrence_eval,
    convolve_quadrature,
    omega_factor,
    principal_power,
    spectrum_factors,
    truncated_power_eval,
    truncated_power_fourier,
)
from tests.oracles import cardinal_bspline


def test_principal_power_maps_negative_real_axis_to_minus_pi():
    assert principal_power(-1.0, 0.5) == pytest.approx(-1j, abs=1e-15)
    assert principal_power(-4.0, 0.5) == pytest.approx(-2j, abs=1e-14)


def test_principal_power_at_zero():
    assert principal_power(0.0, 1 + 1j) == 0
    assert principal_power(0.0, 0.0) == 1
    assert np.isnan(principal_power(0.0, -0.5))


def test_omega_factor_values():
    assert omega_factor(0.0) == 1
    assert omega_factor(2 * math.pi) == 0
    assert omega_factor(-6 * math.pi) == 0
    theta = np.array([0.3, -1.7, 4.0, 11.0])
    expected = (1 - np.exp(-1j * theta)) / (1j * theta)
    np.testing.assert_allclose(omega_factor(theta), expected, rtol=1e-13)


def test_truncated_power_is_causal():
    t = np.array([-2.0, -0.1, 0.0])
    np.testing.assert_array_equal(truncated_power_eval(1.5 + 2j, t), np.zeros(3))
    assert truncated_power_eval(1 + 1j, 2.0) == pytest.approx(2.0 ** (1 + 1j), rel=1e-14)


def test_normalized_truncated_power():
    # k_2(t) = t²/2
    assert truncated_power_eval(2, 3.0, normalized=True) == pytest.approx(4.5, rel=1e-13)
    k = TruncatedPower(2)
    assert k(3.0) == pytest.approx(4.5, rel=1e-13)


@pytest.mark.parametrize("z", [0.6 + 0.3j, 1.5 + 0.5j, 2.2 - 1.1j, 3.0 + 2.0j])
def test_kernel_derivative_lowers_degree(z, rng):
    # d/dt k_z = k_{z-1} при t > 0
    t = rng.uniform(0.5, 4.0, size=40)
    h = 1e-5
    numeric = (truncated_power_eval(z, t + h, normalized=True) - truncated_power_eval(z, t - h, normalized=True)) / (2 * h)
    np.testing.assert_allclose(numeric, truncated_power_eval(z - 1, t, normalized=True), rtol=0, atol=1e-5)


def test_truncated_power_rejects_non_integrable_order():
    with pytest.raises(DivergentSeriesError):
        TruncatedPower(-1.2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_integer_degree_matches_de_boor(n, rng):
    t = rng.uniform(-0.5, n + 1.5, size=100)
    np.testing.assert_allclose(bspline_eval(n, t).real, cardinal_bspline(n, t), atol=1e-12)
    assert np.max(np.abs(bspline_eval(n, t).imag)) < 1e-14


def test_degree_zero_is_indicator():
    t = np.array([-0.5, 0.0, 0.25, 0.999, 1.0, 1.5])
    np.testing.assert_array_equal(bspline_eval(0, t), np.array([0, 1, 1, 1, 0, 0], dtype=complex))


def test_pointwise_evaluation_regimes():
    with pytest.raises(UnsupportedRegimeError):
        bspline_eval(-0.5 + 1j, 1.0)
    with pytest.raises(DivergentSeriesError):
        bspline_eval(-1.5, 1.0)
    with pytest.raises(UnsupportedRegimeError):
        ComplexBSpline(0.0 + 0.5j)


def test_complex_bspline_vanishes_left_of_origin():
    t = np.array([-3.0, -1e-9, 0.0])
    assert np.all(bspline_eval(1.3 + 0.8j, t) == 0)


def test_recurrence_agrees_with_closed_form(rng):
    z = 2.5 + 0.7j
    t = rng.uniform(0.0, 6.0, size=60)
    np.testing.assert_allclose(bspline_recurrence_eval(z, t), bspline_eval(z, t), atol=1e-10)


def test_derivative_matches_central_differences(rng):
    z = 2.3 + 0.4j
    t = rng.uniform(0.1, 0.9, size=30) + rng.integers(0, 4, size=30)
    h = 1e-5
    numeric = (bspline_eval(z, t + h) - bspline_eval(z, t - h)) / (2 * h)
    np.testing.assert_allclose(bspline_derivative_eval(z, t), numeric, atol=1e-5)


def test_backward_difference_of_kernel_is_bspline():
    z = 1.7 - 0.6j
    kernel = TruncatedPower(z)
    for t in (0.4, 1.5, 3.25, 7.9):
        assert backward_difference(z, kernel, t, causal=True) == pytest.approx(bspline_eval(z, t), abs=1e-12)


def test_backward_difference_of_bounded_function():
    # ∇^1 cos(t) = cos(t) - cos(t - 1)
    value = backward_difference(0, np.cos, 0.3)
    assert value == pytest.approx(math.cos(0.3) - math.cos(-0.7), abs=1e-14)


def test_backward_difference_near_minus_one_hits_the_cap():
    with pytest.raises(TruncationLimitError) as info:
        backward_difference(-0.9 + 0.2j, np.cos, 0.3)
    assert info.value.exit_code == 1


def test_fourier_symbol_special_values():
    z = 0.8 + 1.3j
    assert bspline_fourier(z, 0.0) == 1
    assert bspline_fourier(z, 2 * math.pi) == 0
    assert bspline_fourier(z, -4 * math.pi) == 0


def test_fourier_symbol_integer_degree_is_plain_power():
    omega = np.array([0.4, -2.2, 5.0, 9.1])
    np.testing.assert_allclose(bspline_fourier(2, omega), omega_factor(omega) ** 3, rtol=1e-13)


@given(
    re=st.floats(min_value=-0.9, max_value=4.0),
    im=st.floats(min_value=-3.0, max_value=3.0),
    omega=st.floats(min_value=0.05, max_value=6.2),
    sign=st.sampled_from([-1.0, 1.0]),
)
@settings(max_examples=80, deadline=None)
def test_spectrum_factorization(re, im, omega, sign):
    z = complex(re, im)
    w = sign * omega
    base, modulation, damping = spectrum_factors(z, w)
    assert abs(modulation) == pytest.approx(1.0, rel=1e-12)
    assert damping > 0
    assert base * modulation * damping == pytest.approx(bspline_fourier(z, w), rel=1e-10, abs=1e-14)


def test_spectrum_factors_undefined_at_symbol_zero():
    with pytest.raises(UnsupportedRegimeError):
        spectrum_factors(1 + 1j, 2 * math.pi)


def test_truncated_power_symbol_pole():
    with pytest.raises(OrthogonalFrequencyError):
        truncated_power_fourier(1.0, 0.0)
    assert truncated_power_fourier(0, 2.0) == pytest.approx(1 / 2j, rel=1e-14)


def test_symbol_is_difference_times_kernel(rng):
    omega = rng.uniform(0.05, 1.9 * math.pi, size=200) * rng.choice([-1, 1], size=200)
    for z in (0.5 + 0.5j, 2.0 - 1.0j, -0.4 + 0.2j):
        via_difference = backward_difference_symbol(z, omega) * truncated_power_fourier(z, omega)
        np.testing.assert_allclose(via_difference, bspline_fourier(z, omega), rtol=1e-11)


def test_quadrature_convolution_of_indicators_is_hat():
    box = lambda s: bspline_eval(0, s)
    assert convolve_quadrature(box, box, 0.5, (0.0, 0.5)) == pytest.approx(0.5, abs=1e-10)
    assert convolve_quadrature(box, box, 1.5, (0.0, 1.5)) == pytest.approx(0.5, abs=1e-10)


def test_quadrature_convolution_adds_degrees():
    z, w = 1.2 + 0.3j, 1.5 - 0.4j
    f = lambda s: bspline_eval(z, s)
    g = lambda s: bspline_eval(w, s)
    for t in (0.7, 1.3, 2.6):
        value = convolve_quadrature(f, g, t, (0.0, t))
        assert value == pytest.approx(bspline_eval(z + w + 1, t), abs=1e-6)
