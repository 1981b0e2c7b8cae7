"""
Verification suites service
Численные проверки тождеств: свёртка, разбиение единицы, масштабное
соотношение, производные, дробные операторы. Каждая проверка возвращает
невязку и сравнивает её с допуском
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from cxbox.config import DEFAULT_TOLERANCES, POU_RADIUS_CAP
from cxbox.logging_config import get_logger
from cxbox.models import DegreeVector, FractionalOrder, LizorkinWindow, MaskCoefficients
from cxbox.services import fractional, multivariate, refinement, univariate
from cxbox.services.directions import DirectionSet, random_frequencies

logger = get_logger(__name__)

SUITES = ('convolution', 'pou', 'twoscale', 'derivative', 'fractional')

SYMBOL_SAMPLES = 1000
DEGREE_PAIRS = 20
TIME_PAIRS = 5
SPLINE_EQUATION_SAMPLES = 500
FINITE_DIFFERENCE_POINTS = 50
FINITE_DIFFERENCE_STEP = 1e-5

# Допуски, по умолчанию равные 10·eps усечения маски
EPS_SCALED_TOLERANCES = ('twoscale_complex', 'mask_dc_sum')


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_json(self) -> dict:
        return {
            'suite': self.suite,
            'name': self.name,
            'residual': self.residual,
            'tolerance': self.tolerance,
            'passed': self.passed,
        }


def _random_degrees(rng: np.random.Generator, count: int, re_range=(-0.5, 3.0), im_range=(-2.0, 2.0)) -> DegreeVector:
    re = rng.uniform(*re_range, size=count)
    im = rng.uniform(*im_range, size=count)
    return DegreeVector(tuple(complex(a, b) for a, b in zip(re, im)))


def _result(suite: str, name: str, residual: float, tolerances: Dict[str, float]) -> CheckResult:
    result = CheckResult(suite, name, float(residual), float(tolerances[name]))
    marker = "✅" if result.passed else "❌"
    logger.info(f"{marker} [{suite}] {name}: residual {result.residual:.3e} (tolerance {result.tolerance:.1e})")
    return result


def _one_sided_frequencies(rng: np.random.Generator, count: int, top: float) -> np.ndarray:
    """Частоты в (-top, top) с |ω| >= 0.01"""
    omega = rng.uniform(0.01, top, size=count)
    return omega * rng.choice([-1.0, 1.0], size=count)


def convolution_suite(zv: DegreeVector, M: DirectionSet, rng: np.random.Generator,
                      tolerances: Dict[str, float]) -> List[CheckResult]:
    """ℬ_z * ℬ_w = ℬ_{z+w+1} для символов, ядер, разностей и во временной области (d=1)"""
    n = M.n_plus_1
    omega = random_frequencies(M, SYMBOL_SAMPLES, rng)
    symbol_worst, power_worst = 0.0, 0.0
    for _ in range(DEGREE_PAIRS):
        a, b = _random_degrees(rng, n), _random_degrees(rng, n)
        symbol_worst = max(symbol_worst, multivariate.convolution_symbol_residual(a, b, M, omega))
        power_worst = max(power_worst, multivariate.truncated_power_convolution_residual(a, b, M, omega))

    theta = _one_sided_frequencies(rng, SYMBOL_SAMPLES, 1.9 * math.pi)
    difference_worst, bspline_worst = 0.0, 0.0
    for _ in range(DEGREE_PAIRS):
        a, b = _random_degrees(rng, 2)
        lhs = univariate.backward_difference_symbol(a[0], theta) * univariate.backward_difference_symbol(b[0], theta)
        rhs = univariate.backward_difference_symbol(a[0] + b[0] + 1.0, theta)
        difference_worst = max(difference_worst, multivariate.relative_gap(rhs, lhs))
        via_difference = (univariate.backward_difference_symbol(a[0], theta)
                          * univariate.truncated_power_fourier(a[0], theta))
        bspline_worst = max(bspline_worst, multivariate.relative_gap(univariate.bspline_fourier(a[0], theta), via_difference))

    time_worst = 0.0
    for _ in range(TIME_PAIRS):
        a, b = _random_degrees(rng, 2, re_range=(0.5, 2.0), im_range=(-1.0, 1.0))
        z, w = a[0], b[0]
        for t in (0.5, 1.3, 2.7):
            value = univariate.convolve_quadrature(
                lambda s: univariate.bspline_eval(z, s),
                lambda s: univariate.bspline_eval(w, s),
                t, (0.0, t),
            )
            expected = univariate.bspline_eval(z + w + 1.0, t)
            time_worst = max(time_worst, abs(value - expected))

    return [
        _result('convolution', 'convolution_symbol', symbol_worst, tolerances),
        _result('convolution', 'truncated_power_convolution', power_worst, tolerances),
        _result('convolution', 'difference_convolution', difference_worst, tolerances),
        _result('convolution', 'bspline_via_difference', bspline_worst, tolerances),
        _result('convolution', 'convolution_time', time_worst, tolerances),
    ]


def pou_suite(zv: DegreeVector, M: DirectionSet, rng: np.random.Generator,
              tolerances: Dict[str, float], cap: int = POU_RADIUS_CAP) -> List[CheckResult]:
    """
    Σ_k ℬ_z(x - k|M) = 1 с адаптивным радиусом

    pou_monotone - число последних трёх удвоений радиуса, на которых
    невязка не уменьшилась.
    """
    points = rng.uniform(0.0, 1.0, size=(3, M.d))
    report = multivariate.adaptive_partition_of_unity(zv, M, points, cap=cap)
    logger.debug(f"🔍 [pou_suite] history: {report.history}")
    return [
        _result('pou', 'pou', report.residual, tolerances),
        _result('pou', 'pou_monotone', report.rising_steps(3), tolerances),
    ]


def twoscale_suite(zv: DegreeVector, M: DirectionSet, rng: np.random.Generator,
                   tolerances: Dict[str, float], eps: float,
                   mask: Optional[MaskCoefficients] = None) -> List[CheckResult]:
    """2^d ℬ̂(2ω) = Ĥ(ω)ℬ̂(ω) и Σ h = 2^d"""
    if not M.integer_columns:
        logger.warning("⚠️ Two-scale suite skipped: direction columns are not integer")
        return []
    if mask is None:
        mask = refinement.compute_mask(zv, M, eps)
    omega = refinement.two_scale_frequencies(M, SYMBOL_SAMPLES, rng)
    residual = refinement.verify_two_scale(zv, M, omega, mask=mask)
    name = 'twoscale_integer' if zv.is_integer else 'twoscale_complex'
    dc_gap = abs(mask.dc_sum() - 2.0 ** M.d)
    return [
        _result('twoscale', name, residual, tolerances),
        _result('twoscale', 'mask_dc_sum', dc_gap, tolerances),
    ]


def _finite_difference_degree(zv: DegreeVector) -> complex:
    z = zv[0]
    if z.real <= 1.0:
        z = z + float(math.floor(1.0 - z.real) + 1)
    return z


def derivative_suite(zv: DegreeVector, M: DirectionSet, rng: np.random.Generator,
                     tolerances: Dict[str, float]) -> List[CheckResult]:
    """Производные вдоль направлений на стороне Фурье и конечные разности (d=1)"""
    omega = random_frequencies(M, SYMBOL_SAMPLES, rng, min_phase=1e-3)
    symbol_worst = 0.0
    for j in range(M.n_plus_1):
        for order in (1, 2):
            lhs, rhs = multivariate.derivative_symbol_check(zv, M, j, omega, order=order)
            symbol_worst = max(symbol_worst, multivariate.relative_gap(lhs, rhs))
    ladder_worst = multivariate.relative_gap(*multivariate.mixed_ladder_check(zv, M, omega))
    mixed_worst = multivariate.relative_gap(*multivariate.mixed_derivative_symbol_check(zv, M, omega))

    z = _finite_difference_degree(zv)
    t = rng.uniform(0.05, 0.95, size=FINITE_DIFFERENCE_POINTS) + rng.integers(0, 4, size=FINITE_DIFFERENCE_POINTS)
    h = FINITE_DIFFERENCE_STEP
    numeric = (univariate.bspline_eval(z, t + h) - univariate.bspline_eval(z, t - h)) / (2.0 * h)
    exact = univariate.bspline_derivative_eval(z, t)
    fd_worst = float(np.max(np.abs(numeric - exact)))

    return [
        _result('derivative', 'derivative_symbol', symbol_worst, tolerances),
        _result('derivative', 'mixed_derivative_ladder', ladder_worst, tolerances),
        _result('derivative', 'mixed_derivative_symbol', mixed_worst, tolerances),
        _result('derivative', 'derivative_finite_difference', fd_worst, tolerances),
    ]


def _relative_field_gap(a, b) -> float:
    scale = float(np.max(np.abs(b.values))) or 1.0
    return float(np.max(np.abs(a.values - b.values))) / scale


def _semigroup_gap(first: FractionalOrder, second: FractionalOrder, field, window: LizorkinWindow) -> float:
    """𝒟^a 𝒟^b f против 𝒟^{a+b} f"""
    combined = FractionalOrder(DegreeVector(tuple(a + b for a, b in zip(first.degrees, second.degrees))))
    chained = fractional.apply_fractional(first, '+', fractional.apply_fractional(second, '+', field, window), window)
    return _relative_field_gap(chained, fractional.apply_fractional(combined, '+', field, window))


def fractional_suite(zv: DegreeVector, M: DirectionSet, rng: np.random.Generator,
                     tolerances: Dict[str, float]) -> List[CheckResult]:
    """Сплайновое уравнение и свойства 𝒟^{±z} на гауссианах с окном Лизоркина"""
    omega = random_frequencies(M, SPLINE_EQUATION_SAMPLES, rng, min_phase=0.1)
    equation = fractional.verify_spline_equation(zv, M, omega)
    equation_name = 'spline_equation_integer' if zv.is_integer else 'spline_equation_complex'

    n = len(zv)
    bins = (128,) * n if n <= 2 else (32,) * n
    window = LizorkinWindow(inner_radius=0.5, taper=2.0)
    field = fractional.lizorkin_windowed_gaussian(window, bins, (12.0,) * n)
    order = FractionalOrder(zv)

    roundtrip = fractional.apply_fractional(order, '+', fractional.apply_fractional(order, '-', field, window), window)
    inverse_gap = _relative_field_gap(roundtrip, field)

    conjugate = FractionalOrder(DegreeVector(tuple(z.conjugate() for z in zv)))
    semigroup_gap = _semigroup_gap(order, conjugate, field, window)
    first = FractionalOrder(_random_degrees(rng, n, re_range=(-0.5, 1.5), im_range=(-1.0, 1.0)))
    second = FractionalOrder(_random_degrees(rng, n, re_range=(-0.5, 1.5), im_range=(-1.0, 1.0)))
    semigroup_gap = max(semigroup_gap, _semigroup_gap(first, second, field, window))

    rl = fractional.riemann_liouville(order, field, window)
    rl_gap = max(_relative_field_gap(rl, fractional.caputo(order, field, window)),
                 _relative_field_gap(rl, fractional.apply_fractional(order, '+', field, window)))

    zero_set = window.weights(field.coordinates()) == 0
    leak = float(np.max(np.abs(roundtrip.values[zero_set]))) if np.any(zero_set) else 0.0

    return [
        _result('fractional', equation_name, equation, tolerances),
        _result('fractional', 'fractional_inverse', inverse_gap, tolerances),
        _result('fractional', 'fractional_semigroup', semigroup_gap, tolerances),
        _result('fractional', 'riemann_liouville_caputo', rl_gap, tolerances),
        _result('fractional', 'fractional_window', leak, tolerances),
    ]


def effective_tolerances(overrides: Optional[Dict[str, float]] = None,
                         eps: Optional[float] = None) -> Dict[str, float]:
    """
    DEFAULT_TOLERANCES с переопределениями; неизвестные имена - ошибка

    При заданном eps допуски из EPS_SCALED_TOLERANCES равны 10·eps,
    если они не переопределены явно.
    """
    unknown = sorted(set(overrides or {}) - set(DEFAULT_TOLERANCES))
    if unknown:
        raise ValueError(f"unknown tolerance name(s): {unknown}")
    effective = dict(DEFAULT_TOLERANCES)
    if eps is not None and math.isfinite(eps):
        for name in EPS_SCALED_TOLERANCES:
            effective[name] = 10.0 * eps
    effective.update(overrides or {})
    return effective


def run_verification(zv, M: DirectionSet, suite: str = 'all', tolerances: Optional[Dict[str, float]] = None,
                     seed: int = 0, eps: float = 1e-10,
                     mask: Optional[MaskCoefficients] = None) -> List[CheckResult]:
    """
    Запустить набор проверок

    Args:
        zv, M: Сплайн из описания задачи
        suite: Имя набора из SUITES или 'all'
        tolerances: Переопределения допусков (остальные из effective_tolerances)
        seed: Seed генератора частот и степеней
        eps: Допуск усечения маски (задаёт и допуски EPS_SCALED_TOLERANCES)
        mask: Готовая маска для набора twoscale
    """
    zv = multivariate._degrees(zv, M)
    effective = effective_tolerances(tolerances, eps)
    names = SUITES if suite == 'all' else (suite,)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {unknown}")

    results: List[CheckResult] = []
    for name in names:
        rng = np.random.default_rng([seed, SUITES.index(name)])
        logger.info(f"🔍 Running {name} suite")
        if name == 'convolution':
            results.extend(convolution_suite(zv, M, rng, effective))
        elif name == 'pou':
            results.extend(pou_suite(zv, M, rng, effective))
        elif name == 'twoscale':
            results.extend(twoscale_suite(zv, M, rng, effective, eps, mask))
        elif name == 'derivative':
            results.extend(derivative_suite(zv, M, rng, effective))
        elif name == 'fractional':
            results.extend(fractional_suite(zv, M, rng, effective))
    failed = sum(1 for r in results if not r.passed)
    logger.info(f"📊 Verification finished: {len(results)} checks, {failed} failed")
    return results
