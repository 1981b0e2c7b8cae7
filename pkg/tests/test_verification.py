import math

import pytest

from cxbox.config import DEFAULT_TOLERANCES
from cxbox.services.directions import validate
from cxbox.services.refinement import compute_mask
from cxbox.services.verification import CheckResult, effective_tolerances, run_verification

LINE = validate([[1.0]])


def test_check_result_passed():
    assert CheckResult('pou', 'pou', 1e-6, 1e-4).passed
    assert CheckResult('fractional', 'fractional_window', 0.0, 0.0).passed
    assert not CheckResult('pou', 'pou', 2e-4, 1e-4).passed
    assert not CheckResult('pou', 'pou', math.nan, 1e-4).passed
    assert not CheckResult('pou', 'pou', math.inf, 1e-4).passed


def test_check_result_json():
    data = CheckResult('twoscale', 'mask_dc_sum', 0.0, 1e-9).to_json()
    assert data == {'suite': 'twoscale', 'name': 'mask_dc_sum', 'residual': 0.0, 'tolerance': 1e-9, 'passed': True}


def test_effective_tolerances():
    effective = effective_tolerances({'pou': 1e-3})
    assert effective['pou'] == 1e-3
    assert effective['convolution_symbol'] == DEFAULT_TOLERANCES['convolution_symbol']
    assert set(effective) == set(DEFAULT_TOLERANCES)
    with pytest.raises(ValueError):
        effective_tolerances({'no_such_check': 1.0})


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_verification((1,), LINE, suite='fourier')


@pytest.mark.parametrize("degrees", [(0,), (1,), (2,)])
def test_twoscale_suite_for_integer_degrees(degrees):
    results = run_verification(degrees, LINE, suite='twoscale')
    assert [r.name for r in results] == ['twoscale_integer', 'mask_dc_sum']
    assert all(r.passed for r in results)


def test_twoscale_suite_uses_given_mask(identity2):
    mask = compute_mask((0.5 + 0.5j, 1.0), identity2, eps=1e-10)
    results = run_verification((0.5 + 0.5j, 1.0), identity2, suite='twoscale', mask=mask)
    assert [r.name for r in results] == ['twoscale_complex', 'mask_dc_sum']
    assert all(r.passed for r in results)


def test_twoscale_tolerance_follows_eps(identity2):
    assert effective_tolerances(eps=1e-8)['twoscale_complex'] == pytest.approx(1e-7)
    assert effective_tolerances({'twoscale_complex': 1e-3}, eps=1e-8)['twoscale_complex'] == 1e-3
    results = run_verification((0.5 + 0.5j, 0.5), identity2, suite='twoscale', eps=1e-8)
    assert [r.tolerance for r in results] == [pytest.approx(1e-7), pytest.approx(1e-7)]
    loose = run_verification((0.5 + 0.5j, 0.5), identity2, suite='twoscale', eps=1e-8,
                             tolerances={'twoscale_complex': 1e-3})
    assert loose[0].tolerance == 1e-3
    assert loose[0].passed


def test_twoscale_failure_is_reported():
    results = run_verification((1,), LINE, suite='twoscale', tolerances={'twoscale_integer': -1.0})
    assert not results[0].passed
    assert results[1].passed


def test_twoscale_suite_skips_non_integer_columns():
    assert run_verification((1,), validate([[0.5]]), suite='twoscale') == []


def test_derivative_suite():
    results = run_verification((2.5 + 0.5j,), LINE, suite='derivative')
    assert {r.name for r in results} == {
        'derivative_symbol', 'mixed_derivative_ladder', 'mixed_derivative_symbol', 'derivative_finite_difference'}
    assert all(r.passed for r in results), [r.to_json() for r in results]


def test_derivative_suite_shifts_small_degree():
    # при Re z <= 1 конечные разности считаются для z + k
    results = run_verification((0.3 + 0.2j,), LINE, suite='derivative')
    assert all(r.passed for r in results), [r.to_json() for r in results]


def test_fractional_suite():
    results = run_verification((0.5 + 0.5j,), LINE, suite='fractional')
    assert [r.name for r in results] == [
        'spline_equation_complex', 'fractional_inverse', 'fractional_semigroup',
        'riemann_liouville_caputo', 'fractional_window']
    assert all(r.passed for r in results), [r.to_json() for r in results]


def test_fractional_suite_for_integer_degrees(identity2):
    results = run_verification((1, 1), identity2, suite='fractional')
    assert results[0].name == 'spline_equation_integer'
    assert all(r.passed for r in results), [r.to_json() for r in results]


def test_fractional_suite_near_minus_one():
    results = run_verification((-0.5 + 0.3j,), LINE, suite='fractional')
    assert [r.name for r in results] == [
        'spline_equation_complex', 'fractional_inverse', 'fractional_semigroup',
        'riemann_liouville_caputo', 'fractional_window']
    assert results[0].passed, results[0].to_json()


def test_same_seed_same_residuals():
    first = run_verification((1.5 + 0.5j,), LINE, suite='derivative', seed=7)
    second = run_verification((1.5 + 0.5j,), LINE, suite='derivative', seed=7)
    assert [r.residual for r in first] == [r.residual for r in second]


@pytest.mark.slow
def test_convolution_suite():
    results = run_verification((1,), LINE, suite='convolution')
    assert len(results) == 5
    assert all(r.passed for r in results), [r.to_json() for r in results]


@pytest.mark.slow
def test_pou_suite():
    results = run_verification((2.5 + 0.5j,), LINE, suite='pou')
    assert [r.name for r in results] == ['pou', 'pou_monotone']
    assert all(r.passed for r in results), [r.to_json() for r in results]


def test_pou_suite_for_integer_degrees(identity2):
    results = run_verification((0, 0), identity2, suite='pou')
    assert [r.residual for r in results][1] == 0
    assert all(r.passed for r in results), [r.to_json() for r in results]
