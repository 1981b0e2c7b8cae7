"""
Complex box splines service
Многомерные усечённые степени 𝒯_z(·|M) и комплексные box-сплайны ℬ_z(·|M):
символы Фурье, замкнутые формулы для обратимой M, рекуррентная формула,
представление через разности, разбиение единицы и тождества для производных
"""
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import integrate

from cxbox.config import DEFAULT_EPS, POU_DECREASE_FACTOR, POU_NOISE_FLOOR, POU_RADIUS_CAP
from cxbox.errors import OrthogonalFrequencyError, QuadratureError, SpecValidationError
from cxbox.logging_config import get_logger
from cxbox.models import DegreeVector
from cxbox.services.directions import DirectionSet, det_and_inverse, support_box
from cxbox.services.special_fn import TAIL_SEARCH_LIMIT, binomial_tail_index, is_nonnegative_integer, signed_binomials
from cxbox.services.univariate import (
    _check_pointwise,
    bspline_eval,
    bspline_fourier,
    lattice_zero,
    principal_power,
    truncated_power_eval,
)

logger = get_logger(__name__)

# Предел интегрирования по u в рекуррентной формуле
RECURRENCE_UPPER_CAP = 1024.0
EVAL_CHUNK = 200_000


def _degrees(zv, M: DirectionSet) -> DegreeVector:
    zv = DegreeVector.of(zv)
    if len(zv) != M.n_plus_1:
        raise SpecValidationError(f"{len(zv)} degrees given for {M.n_plus_1} direction columns")
    return zv


def _points(x, d: int) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x.reshape(1, -1) if single else x.reshape(-1, x.shape[-1])
    if pts.shape[1] != d:
        raise SpecValidationError(f"points must have {d} coordinates, got {pts.shape[1]}")
    return pts, single


def _phases(M: DirectionSet, omega) -> Tuple[np.ndarray, bool]:
    omega = np.asarray(omega, dtype=float)
    single = omega.ndim == 1
    if single:
        omega = omega.reshape(1, -1)
    if omega.shape[-1] != M.d:
        raise SpecValidationError(f"frequencies must have {M.d} components, got {omega.shape[-1]}")
    return M.phases(omega), single


def _finish(values: np.ndarray, single: bool):
    return complex(values.reshape(-1)[0]) if single else values


def tensor_kernel_eval(zv, t):
    """
    Тензорное ядро k_z(t) = Π_j k_{z_j}(t_j)

    Args:
        zv: Вектор степеней длины n+1
        t: Точка (n+1,) или массив (..., n+1)
    """
    zv = DegreeVector.of(zv)
    t = np.asarray(t, dtype=float)
    single = t.ndim == 1
    t = t.reshape(1, -1) if single else t
    if t.shape[-1] != len(zv):
        raise SpecValidationError(f"t must have {len(zv)} components")
    out = np.ones(t.shape[:-1], dtype=complex)
    for j, z in enumerate(zv):
        out = out * truncated_power_eval(z, t[..., j], normalized=True)
    return _finish(out, single)


def truncated_power_symbol(zv, M: DirectionSet, omega):
    """
    Символ 𝒯̂_z(ω|M) = Π_j (iω·m_j)^{-(z_j+1)}

    Raises:
        OrthogonalFrequencyError: ω·m_j = 0 для некоторого j
    """
    zv = _degrees(zv, M)
    theta, single = _phases(M, omega)
    if np.any(theta == 0):
        raise OrthogonalFrequencyError("ω is orthogonal to a direction column; the truncated power symbol has a pole")
    out = np.ones(theta.shape[:-1], dtype=complex)
    for j, z in enumerate(zv):
        out = out * principal_power(1j * theta[..., j], -(z + 1.0))
    return _finish(out, single)


def truncated_power_eval_invertible(zv, M: DirectionSet, x):
    """𝒯_z(x|M) = k_z(M⁻¹x)/|det M| для квадратной обратимой M"""
    zv = _degrees(zv, M)
    det, inverse = det_and_inverse(M)
    pts, single = _points(x, M.d)
    values = tensor_kernel_eval(zv, pts @ inverse.T) / abs(det)
    return _finish(np.atleast_1d(values), single)


def boxspline_symbol(zv, M: DirectionSet, omega):
    """
    Символ ℬ̂_z(ω|M) = Π_j Ω(ω·m_j)^{z_j+1}

    Ω_j = 1 при ω·m_j = 0; множитель равен 0 на 2πℤ∖{0}; главная ветвь.
    """
    zv = _degrees(zv, M)
    theta, single = _phases(M, omega)
    out = np.ones(theta.shape[:-1], dtype=complex)
    for j, z in enumerate(zv):
        out = out * bspline_fourier(z, theta[..., j])
    return _finish(out, single)


def symbol_zero_set(M: DirectionSet, omega) -> np.ndarray:
    """Маска частот, где ω·m_j ∈ 2πℤ∖{0} для некоторого j"""
    theta, _ = _phases(M, omega)
    return np.any(lattice_zero(theta), axis=-1)


def boxspline_eval_invertible(zv, M: DirectionSet, y):
    """
    ℬ_z(y|M) = B_z(M⁻¹y)/|det M|, B_z(t) = Π_j B_{z_j}(t_j)

    Индикатор носителя M([0,1)^d) не применяется: сомножители B_{z_j}
    при нецелых степенях имеют носитель [0, ∞).

    Raises:
        NotSquareError: M не квадратная
        UnsupportedRegimeError: Re(z_j) <= 0 (кроме z_j = 0)
    """
    zv = _degrees(zv, M)
    det, inverse = det_and_inverse(M)
    pts, single = _points(y, M.d)
    out = np.empty(pts.shape[0], dtype=complex)
    for start in range(0, pts.shape[0], EVAL_CHUNK):
        t = pts[start:start + EVAL_CHUNK] @ inverse.T
        chunk = np.ones(t.shape[0], dtype=complex)
        for j, z in enumerate(zv):
            chunk = chunk * bspline_eval(z, t[:, j])
        out[start:start + EVAL_CHUNK] = chunk / abs(det)
    return _finish(out, single)


def _quad_complex(func, lo: float, hi: float, points: List[float], eps: float) -> complex:
    limit = max(100, 4 * len(points) + 50)
    parts = []
    for part in (lambda u: func(u).real, lambda u: func(u).imag):
        out = integrate.quad(part, lo, hi, points=points or None, epsabs=eps, epsrel=1e-10,
                             limit=limit, full_output=1)
        if len(out) > 3 and out[1] > 1e3 * eps:
            raise QuadratureError(f"recurrence quadrature did not converge on [{lo}, {hi}]: error {out[1]:.3g}")
        parts.append(out[0])
    return complex(parts[0], parts[1])


def _recurrence_point(zv: DegreeVector, M: DirectionSet, x: np.ndarray, quad_eps: float) -> complex:
    if M.is_square:
        return boxspline_eval_invertible(zv, M, x)

    reduced = M.without_last()
    inner = zv.without_last()
    z_n = zv[-1]
    m_n = np.array(M.columns[-1])
    _check_pointwise(z_n)

    lower, upper = 0.0, math.inf
    breaks = set()
    if reduced.is_square:
        _, inverse = det_and_inverse(reduced)
        a = inverse @ x
        b = inverse @ m_n
        # причинный носитель внутреннего сплайна: a - u·b >= 0
        for aj, bj in zip(a, b):
            if bj > 0:
                upper = min(upper, aj / bj)
            elif bj < 0:
                lower = max(lower, aj / bj)
            elif aj < 0:
                return 0j

    # верхний предел по убыванию весовой функции B_{z_n}
    if is_nonnegative_integer(z_n):
        cutoff = z_n.real + 1.0
    else:
        cutoff = 1.0
        while abs(bspline_eval(z_n, cutoff)) >= quad_eps and cutoff < RECURRENCE_UPPER_CAP:
            cutoff *= 2.0
    hi = min(upper, cutoff)
    if hi <= lower:
        return 0j

    breaks.update(float(k) for k in range(int(math.ceil(lower)), int(math.floor(hi)) + 1))
    if reduced.is_square:
        for aj, bj in zip(a, b):
            if bj == 0:
                continue
            t_lo, t_hi = sorted((aj - lower * bj, aj - hi * bj))
            for k in range(int(math.floor(t_lo)), int(math.ceil(t_hi)) + 1):
                breaks.add((aj - k) / bj)
    points = sorted(p for p in breaks if lower < p < hi)

    def integrand(u: float) -> complex:
        weight = bspline_eval(z_n, u)
        if weight == 0:
            return 0j
        return weight * _recurrence_point(inner, reduced, x - u * m_n, quad_eps)

    return _quad_complex(integrand, lower, hi, points, quad_eps)


def boxspline_recurrence_eval(zv, M: DirectionSet, x, quad_eps: float = 1e-10):
    """
    ℬ_z(x|M) = ∫_0^∞ B_{z_n}(u)·ℬ_{z∖z_n}(x - u·m_n | M∖m_n) du

    Рекурсия снимает последний столбец, пока M не станет квадратной; база
    вычисляется замкнутой формулой. Для квадратной M сокращённый набор
    вырожден, поэтому сразу используется замкнутая формула.

    Raises:
        InvalidReducedDirectionsError: M∖m_n теряет ранг
    """
    zv = _degrees(zv, M)
    pts, single = _points(x, M.d)
    if M.is_square:
        logger.debug("🔧 [boxspline_recurrence_eval] square M, using the closed form")
        return boxspline_eval_invertible(zv, M, pts[0] if single else pts)
    out = np.array([_recurrence_point(zv, M, p, quad_eps) for p in pts], dtype=complex)
    return _finish(out, single)


def boxspline_eval(zv, M: DirectionSet, x, quad_eps: float = 1e-10):
    """Значения ℬ_z(x|M): замкнутая формула для квадратной M, иначе рекуррентная"""
    if M.is_square:
        return boxspline_eval_invertible(zv, M, x)
    return boxspline_recurrence_eval(zv, M, x, quad_eps=quad_eps)


def difference_representation_eval(zv, M: DirectionSet, x, eps: float = DEFAULT_EPS):
    """
    ℬ_z(x|M) = Σ_{k_0}…Σ_{k_n} Π_j (-1)^{k_j} binom(z_j+1, k_j)·𝒯_z(x - Σ k_j m_j | M)

    Сумма по оси j усечена на min(K_j, ⌊t_j⌋), t = M⁻¹x, K_j из оценки хвоста
    с допуском eps/(n+1).
    """
    zv = _degrees(zv, M)
    for z in zv:
        _check_pointwise(z)
    _, inverse = det_and_inverse(M)
    pts, single = _points(x, M.d)
    A = M.matrix
    tails = [binomial_tail_index(z, eps / len(zv), limit=TAIL_SEARCH_LIMIT) for z in zv]

    out = np.zeros(pts.shape[0], dtype=complex)
    for i, p in enumerate(pts):
        t = inverse @ p
        K = [min(tail, int(math.floor(tj))) for tail, tj in zip(tails, t)]
        if min(K) < 0:
            continue
        grid = np.indices([k + 1 for k in K]).reshape(len(K), -1).T
        weights = np.ones(grid.shape[0], dtype=complex)
        for j, z in enumerate(zv):
            weights = weights * signed_binomials(z, K[j])[grid[:, j]]
        shifted = p[None, :] - grid @ A.T
        out[i] = np.sum(weights * truncated_power_eval_invertible(zv, M, shifted))
    return _finish(out, single)


def _lattice(d: int, radius: int) -> np.ndarray:
    axis = np.arange(-radius, radius + 1)
    return np.stack(np.meshgrid(*([axis] * d), indexing='ij'), axis=-1).reshape(-1, d)


def partition_of_unity_residual(zv, M: DirectionSet, x, radius: int) -> float:
    """
    |Σ_{|k|_∞ <= radius} ℬ_z(x - k|M) - 1|

    Для массива точек возвращается максимум по точкам.
    """
    zv = _degrees(zv, M)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    pts, _ = _points(x, M.d)
    shifts = _lattice(M.d, int(radius))
    worst = 0.0
    for p in pts:
        total = np.sum(boxspline_eval(zv, M, p[None, :] - shifts))
        worst = max(worst, abs(total - 1.0))
    return float(worst)


@dataclass(frozen=True)
class PartitionReport:
    radius: int
    residual: float
    history: Tuple[Tuple[int, float], ...]

    def rising_steps(self, doublings: int = 3) -> int:
        """Сколько из последних doublings удвоений до выбранного радиуса не уменьшили невязку"""
        end = [r for r, _ in self.history].index(self.radius)
        window = [res for _, res in self.history[max(0, end - doublings):end + 1]]
        return sum(1 for before, after in zip(window, window[1:]) if after >= before)


def adaptive_partition_of_unity(zv, M: DirectionSet, x, cap: int = POU_RADIUS_CAP,
                                floor: float = POU_NOISE_FLOOR) -> PartitionReport:
    """
    Разбиение единицы с удвоением радиуса 1, 2, 4, ... до cap

    Удвоение продолжается, пока невязка за два последних удвоения падает
    не меньше чем в POU_DECREASE_FACTOR раз. Остановка также при невязке
    не выше floor (уровень округления) или на радиусе cap.
    В history - все пройденные (радиус, невязка), radius - лучший из них.
    """
    history: List[Tuple[int, float]] = []
    radius = 1
    while True:
        residual = partition_of_unity_residual(zv, M, x, radius)
        history.append((radius, residual))
        logger.debug(f"🔍 [adaptive_partition_of_unity] radius={radius}, residual={residual:.3e}")
        if residual <= floor:
            break
        if len(history) >= 3 and residual * POU_DECREASE_FACTOR > history[-3][1]:
            logger.info(f"⚠️ Partition of unity residual stopped decreasing at radius {radius}")
            break
        if radius >= cap:
            break
        radius = min(2 * radius, cap)
    best_radius, best = min(history, key=lambda item: item[1])
    return PartitionReport(radius=best_radius, residual=best, history=tuple(history))


def derivative_symbol_check(zv, M: DirectionSet, j: int, omega, order: int = 1):
    """
    Производная вдоль m_j на стороне Фурье, порядок order

    lhs = (iω·m_j)^k·ℬ̂_z(ω), rhs = (1 - e^{-iω·m_j})^k·ℬ̂_{z - k·e_j}(ω);
    rhs строится k-кратным применением тождества первого порядка.

    Returns:
        (lhs, rhs)
    """
    zv = _degrees(zv, M)
    if not 0 <= j < len(zv):
        raise SpecValidationError(f"column index {j} out of range")
    theta, single = _phases(M, omega)
    omega = np.asarray(omega, dtype=float).reshape(theta.shape[:-1] + (M.d,))
    theta_j = theta[..., j]
    lhs = (1j * theta_j) ** order * boxspline_symbol(zv, M, omega)
    difference = 1.0 - np.exp(-1j * theta_j)
    rhs = np.ones_like(lhs)
    current = zv
    for _ in range(order):
        current = current.shifted(-1.0, j)
        rhs = rhs * difference
    rhs = rhs * boxspline_symbol(current, M, omega)
    return _finish(lhs, single), _finish(rhs, single)


def mixed_derivative_symbol_check(zv, M: DirectionSet, omega):
    """lhs = Π_j(iω·m_j)·ℬ̂_z(ω), rhs = Π_j(1 - e^{-iω·m_j})·ℬ̂_{z-1}(ω)"""
    zv = _degrees(zv, M)
    theta, single = _phases(M, omega)
    omega = np.asarray(omega, dtype=float).reshape(theta.shape[:-1] + (M.d,))
    lhs = np.prod(1j * theta, axis=-1) * boxspline_symbol(zv, M, omega)
    rhs = np.prod(1.0 - np.exp(-1j * theta), axis=-1) * boxspline_symbol(zv.shifted(-1.0), M, omega)
    return _finish(lhs, single), _finish(rhs, single)


def mixed_ladder_check(zv, M: DirectionSet, omega):
    """lhs = Π_j(iω·m_j)·𝒯̂_z(ω), rhs = 𝒯̂_{z-1}(ω)"""
    zv = _degrees(zv, M)
    theta, single = _phases(M, omega)
    omega = np.asarray(omega, dtype=float).reshape(theta.shape[:-1] + (M.d,))
    lhs = np.prod(1j * theta, axis=-1) * truncated_power_symbol(zv, M, omega)
    rhs = truncated_power_symbol(zv.shifted(-1.0), M, omega)
    return _finish(lhs, single), _finish(rhs, single)


def relative_gap(lhs, rhs) -> float:
    """max |lhs - rhs| / (1 + |lhs|)"""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    if lhs.size == 0:
        return 0.0
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))


def convolution_symbol_residual(zv, zw, M: DirectionSet, omega) -> float:
    """max |ℬ̂_z·ℬ̂_w - ℬ̂_{z+w+1}| / (1 + |ℬ̂_{z+w+1}|)"""
    zv = _degrees(zv, M)
    zw = _degrees(zw, M)
    product = boxspline_symbol(zv, M, omega) * boxspline_symbol(zw, M, omega)
    combined = boxspline_symbol((zv + zw).shifted(1.0), M, omega)
    return relative_gap(combined, product)


def truncated_power_convolution_residual(zv, zw, M: DirectionSet, omega) -> float:
    """То же для усечённых степеней: 𝒯̂_z·𝒯̂_w = 𝒯̂_{z+w+1}"""
    zv = _degrees(zv, M)
    zw = _degrees(zw, M)
    product = truncated_power_symbol(zv, M, omega) * truncated_power_symbol(zw, M, omega)
    combined = truncated_power_symbol((zv + zw).shifted(1.0), M, omega)
    scale = np.abs(combined)
    return float(np.max(np.abs(product - combined) / np.maximum(scale, np.finfo(float).tiny)))


def boxspline_l2_norm(zv, M: DirectionSet, spacing: float, extent: float) -> float:
    """
    Сеточная L²-норма ℬ_z(·|M) по узлам-серединам

    Сетка покрывает ограничивающий прямоугольник множества M·[0, extent]^d.
    """
    zv = _degrees(zv, M)
    corners = support_box(M) * extent
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    axes = [np.arange(l + 0.5 * spacing, h, spacing) for l, h in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, M.d)
    total = 0.0
    for start in range(0, pts.shape[0], EVAL_CHUNK):
        values = boxspline_eval_invertible(zv, M, pts[start:start + EVAL_CHUNK])
        total += float(np.sum(np.abs(values) ** 2))
    norm = math.sqrt(total * spacing ** M.d)
    logger.debug(f"📊 [boxspline_l2_norm] {pts.shape[0]} nodes, norm={norm:.8f}")
    return norm
