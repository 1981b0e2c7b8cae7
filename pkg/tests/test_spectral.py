import math

import numpy as np
import pytest

from cxbox.errors import ScopeError, SpecValidationError, TailBudgetExceededError
from cxbox.models import FrequencyGrid
from cxbox.services.directions import validate
from cxbox.services.multivariate import boxspline_eval_invertible, boxspline_symbol
from cxbox.services.spectral import (
    boxspline_sample,
    choose_omega_max,
    estimate_decay,
    frequency_to_time,
    empirical_omega_max,
    grid_l2_norm,
    plan_grid,
    sample_from_symbol,
    smoothness_exponents,
    symbol_on_grid,
    tail_energy_fraction,
)
from tests.oracles import cardinal_bspline

LINE = validate([[1.0]])


def _interior(x, knots, distance):
    return np.all(np.abs(x[:, None] - np.asarray(knots)[None, :]) >= distance, axis=1)


def test_grid_spacing_and_steps():
    grid = FrequencyGrid.uniform(2, bins=64, omega_max=16 * math.pi, padding=4)
    assert grid.spacing == pytest.approx((1 / 16, 1 / 16))
    assert grid.frequency_step == pytest.approx((math.pi / 2, math.pi / 2))
    with pytest.raises(SpecValidationError):
        FrequencyGrid((8,), (1.0,), (0.0,), padding=0)


def test_degree_zero_samples_indicator():
    grid = FrequencyGrid.uniform(1, bins=2 ** 16, omega_max=4096 * math.pi)
    field = boxspline_sample((0,), LINE, grid)
    x = field.axis(0)
    keep = (x > 0.25) & (x < 0.75)
    assert np.max(np.abs(field.values[keep] - 1.0)) < 1e-3
    outside = (x > 1.25) & (x < 15.0)
    assert np.max(np.abs(field.values[outside])) < 1e-3


def test_degree_one_samples_hat():
    grid = FrequencyGrid.uniform(1, bins=2048, omega_max=512 * math.pi, padding=4)
    field = boxspline_sample((1,), LINE, grid)
    x = field.axis(0)
    keep = _interior(x, [0.0, 1.0, 2.0], 0.25)
    expected = cardinal_bspline(1, x)
    assert np.max(np.abs(field.values[keep] - expected[keep])) < 1e-6


@pytest.mark.slow
def test_complex_box_spline_samples_match_closed_form(diag23):
    zv = (3 + 1j, 2 + 1j)
    grid = FrequencyGrid.uniform(2, bins=256, omega_max=32 * math.pi, padding=4)
    field = boxspline_sample(zv, diag23, grid)
    assert field.spacing == pytest.approx((1 / 32, 1 / 32))
    # сравнение на сетке 128 x 128 с шагом 1/16
    coarse = field.coordinates()[::2, ::2]
    assert coarse.shape == (128, 128, 2)
    exact = boxspline_eval_invertible(zv, diag23, coarse.reshape(-1, 2)).reshape(128, 128)
    assert np.max(np.abs(field.values[::2, ::2] - exact)) < 1e-4


def test_refining_the_grid_keeps_samples():
    zv = (1.5 + 0.5j,)
    coarse = boxspline_sample(zv, LINE, FrequencyGrid.uniform(1, bins=512, omega_max=64 * math.pi))
    fine = boxspline_sample(zv, LINE, FrequencyGrid.uniform(1, bins=1024, omega_max=128 * math.pi))
    np.testing.assert_allclose(fine.axis(0)[::2], coarse.axis(0))
    assert np.max(np.abs(fine.values[::2] - coarse.values)) < 1e-3


def test_sampling_respects_tail_budget():
    grid = FrequencyGrid.uniform(1, bins=64, omega_max=8 * math.pi)
    with pytest.raises(TailBudgetExceededError) as info:
        boxspline_sample((0.1 + 1j,), LINE, grid, tail_budget=1e-6)
    assert info.value.tail_fraction > 1e-6
    assert boxspline_sample((3.0,), LINE, grid, tail_budget=1e-3).extents == (64,)


def test_tail_fraction_and_omega_max_are_inverse():
    for alpha in (-0.2, 0.5, 2.0):
        omega_max = choose_omega_max(alpha, 1e-6, d=2)
        assert tail_energy_fraction(alpha, omega_max, d=2) == pytest.approx(1e-6, rel=1e-9)
    with pytest.raises(TailBudgetExceededError):
        tail_energy_fraction(-0.5, 10.0)
    with pytest.raises(TailBudgetExceededError):
        choose_omega_max(-0.7, 1e-3)


def test_plan_grid_for_nonnegative_alpha():
    grid = plan_grid((1.0,), LINE, tail_budget=1e-6)
    n = grid.bins[0]
    assert grid.omega_max == (pytest.approx(choose_omega_max(1.0, 1e-6, 1)),)
    assert n & (n - 1) == 0
    assert n * grid.spacing[0] >= 10.0
    assert grid.origin == (-1.0,)
    assert grid.padding == 2
    assert tail_energy_fraction(1.0, grid.omega_max[0], 1) <= 1e-6 * (1 + 1e-9)
    field = boxspline_sample((1.0,), LINE, grid)
    x = field.axis(0)
    assert np.interp(0.5, x, field.values.real) == pytest.approx(0.5, abs=2e-2)


def test_plan_grid_keeps_given_bins(diag23):
    grid = plan_grid((2.0, 2.5), diag23, bins=(32, 64))
    assert grid.bins == (32, 64)
    assert grid.omega_max[0] == pytest.approx(choose_omega_max(2.0, 1e-6, 2))
    assert grid.origin == (-1.0, -1.0)


def test_plan_grid_for_negative_alpha():
    grid = plan_grid((-0.2,), LINE, tail_budget=1e-2, max_nodes=2 ** 16)
    assert grid.bins[0] <= 2 ** 16
    assert grid.omega_max[0] >= 16 * math.pi
    omega = empirical_omega_max((-0.2,), LINE, 1e-2, extent=10.0, max_nodes=2 ** 16)
    assert grid.omega_max[0] == pytest.approx(omega)


def test_plan_grid_for_negative_alpha_runs_out_of_nodes():
    with pytest.raises(TailBudgetExceededError):
        plan_grid((-0.2,), LINE, tail_budget=1e-6, max_nodes=2 ** 12)


def test_plan_grid_below_minus_half():
    with pytest.raises(TailBudgetExceededError) as info:
        plan_grid((-0.6 + 0.3j,), LINE)
    assert info.value.tail_fraction == math.inf


def test_plan_grid_node_cap(identity2):
    with pytest.raises(TailBudgetExceededError) as info:
        plan_grid((0.0, 0.0), identity2)
    assert 0 < info.value.tail_fraction < math.inf


def test_parseval_on_unpadded_grid():
    zv = (0.5 + 0.5j,)
    bins, omega_max = 1024, 64 * math.pi
    time = boxspline_sample(zv, LINE, FrequencyGrid.uniform(1, bins=bins, omega_max=omega_max))
    frequency = symbol_on_grid(lambda w: boxspline_symbol(zv, LINE, w), (bins,), (omega_max,))
    assert grid_l2_norm(time) == pytest.approx(grid_l2_norm(frequency), rel=1e-2)


def test_frequency_to_time_recovers_gaussian():
    sigma = 0.7
    field = symbol_on_grid(
        lambda w: sigma * math.sqrt(2 * math.pi) * np.exp(-0.5 * (sigma * w[..., 0]) ** 2),
        (512,), (20 * math.pi,),
    )
    time = frequency_to_time(field, (-12.8,))
    x = time.axis(0)
    np.testing.assert_allclose(time.values, np.exp(-x ** 2 / (2 * sigma ** 2)), atol=1e-12)


def test_sample_from_symbol_shifts_origin():
    grid = FrequencyGrid.uniform(1, bins=256, omega_max=16 * math.pi, origin=-4.0, padding=2)
    field = sample_from_symbol(lambda w: np.exp(-0.5 * w[..., 0] ** 2), grid)
    x = field.axis(0)
    assert x[0] == -4.0
    np.testing.assert_allclose(field.values, np.exp(-x ** 2 / 2) / math.sqrt(2 * math.pi), atol=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("degrees, diag, alpha", [
    ((0.0, 0.0), (1.0, 1.0), 0.0),
    ((1.0, 3.0), (1.0, 1.0), 1.0),
    ((0.5 + 1j, 2.0), (2.0, 3.0), 0.5),
])
def test_decay_fit(degrees, diag, alpha, rng):
    report = estimate_decay(degrees, validate(np.diag(diag)), ray_count=6, rng=rng)
    assert report.alpha_theory == pytest.approx(alpha)
    assert abs(report.alpha_est - alpha) < 0.15
    assert len(report.rays) == 6
    data = report.to_json()
    assert data['omega_range'] == [100.0, 10000.0]


def test_decay_needs_diagonal_matrix(shear):
    with pytest.raises(ScopeError):
        estimate_decay((1, 1), shear)


@pytest.mark.parametrize("degrees, diag, sobolev, holder", [
    ((1, 1), (1.0, 1.0), 1.5, (0, 0.5)),
    ((0, 0), (1.0, 1.0), 0.5, None),
    ((3 + 1j, 2 + 1j), (2.0, 3.0), 2.5, (1, 0.5)),
])
def test_smoothness_exponents(degrees, diag, sobolev, holder):
    s, h = smoothness_exponents(degrees, validate(np.diag(diag)))
    assert s == pytest.approx(sobolev)
    if holder is None:
        assert h is None
    else:
        assert h[0] == holder[0]
        assert h[1] == pytest.approx(holder[1])


def test_smoothness_needs_diagonal_matrix(mesh3):
    with pytest.raises(ScopeError):
        smoothness_exponents((1, 1, 1), mesh3)
