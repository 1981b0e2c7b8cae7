"""
Univariate complex B-splines service
Усечённые комплексные степени k_z, комплексный разностный оператор
и B-сплайны комплексной степени во временной и частотной области
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from cxbox.config import DEFAULT_EPS
from cxbox.errors import (
    DivergentSeriesError,
    OrthogonalFrequencyError,
    QuadratureError,
    UnsupportedRegimeError,
)
from cxbox.logging_config import get_logger
from cxbox.services.special_fn import (
    binomial_tail_index,
    is_nonnegative_integer,
    reciprocal_gamma,
    signed_binomials,
)

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi


def principal_power(w, a):
    """
    w^a = exp(a·Log w), ветвь arg ∈ [-π, π)

    В нуле: 0 при Re(a) > 0, 1 при a = 0, иначе nan
    """
    w = np.asarray(w, dtype=complex)
    a = np.asarray(a, dtype=complex)
    zero = (w == 0)
    safe = np.where(zero, 1.0, w)
    log_w = np.log(safe)
    # arg = π переносим на -π
    log_w = np.where(log_w.imag == math.pi, log_w.real - 1j * math.pi, log_w)
    out = np.exp(a * log_w)
    if np.any(zero):
        at_zero = np.where(a.real > 0, 0.0, np.where(a == 0, 1.0, np.nan))
        out = np.where(zero, at_zero, out)
    return out


def lattice_zero(theta) -> np.ndarray:
    """theta ∈ 2πℤ∖{0} (с учётом округления)"""
    theta = np.asarray(theta, dtype=float)
    q = theta / TWO_PI
    nearest = np.round(q)
    return (nearest != 0) & (np.abs(q - nearest) <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(q)))


def omega_factor(theta) -> np.ndarray:
    """
    Ω(θ) = (1 - e^{-iθ})/(iθ) = e^{-iθ/2}·sinc(θ/2)

    Ω(0) = 1, Ω = 0 точно на 2πℤ∖{0}
    """
    theta = np.asarray(theta, dtype=float)
    out = np.exp(-0.5j * theta) * np.sinc(theta / TWO_PI)
    return np.where(lattice_zero(theta), 0.0, out)


def truncated_power_eval(z: complex, t, normalized: bool = False):
    """
    Усечённая степень t_+^z (или k_z = t_+^z/Γ(z+1) при normalized=True)

    Args:
        z: Комплексная степень
        t: Точка или массив точек
        normalized: Делить на Γ(z+1)

    Returns:
        0 при t <= 0, t^{Re z}·e^{i Im z log t} при t > 0
    """
    z = complex(z)
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    positive = t > 0
    logs = np.log(np.where(positive, t, 1.0))
    out = np.where(positive, np.exp(z * logs), 0.0)
    if normalized:
        out = out * reciprocal_gamma(z + 1.0)
    return complex(out) if scalar else out


def backward_difference(z: complex, f: Callable, t, causal: bool = False, eps: float = DEFAULT_EPS):
    """
    Комплексная обратная разность ∇^{z+1} f(t) = Σ (-1)^k binom(z+1, k) f(t - k)

    Args:
        z: Степень, Re(z) > -1
        f: Векторизованная функция вещественного аргумента
        t: Точка
        causal: f обращается в ноль на (-∞, 0], тогда сумма конечна (K = ⌊t⌋)
        eps: Допуск усечения ряда для ограниченной f

    Raises:
        DivergentSeriesError: Re(z) <= -1
    """
    z = complex(z)
    if z.real <= -1.0:
        raise DivergentSeriesError(f"∇^(z+1) undefined for Re(z) = {z.real} <= -1")
    t = float(t)
    if causal:
        K = int(math.floor(t))
        if K < 0:
            return 0j
        if is_nonnegative_integer(z):
            K = min(K, int(z.real) + 1)
    else:
        K = binomial_tail_index(z, eps)
    coeffs = signed_binomials(z, K)
    values = np.asarray(f(t - np.arange(K + 1, dtype=float)), dtype=complex)
    return complex(np.sum(coeffs * values))


def _check_pointwise(z: complex):
    if z == 0:
        return
    if z.real <= -1.0:
        raise DivergentSeriesError(f"B_z undefined for Re(z) = {z.real} <= -1")
    if z.real <= 0.0:
        raise UnsupportedRegimeError(
            f"pointwise evaluation of B_z is unsupported for Re(z) = {z.real} in (-1, 0]; "
            f"sample the Fourier symbol instead"
        )


def bspline_eval(z: complex, t):
    """
    Комплексный B-сплайн B_z(t) = Σ_{k=0}^{⌊t⌋} (-1)^k binom(z+1, k) k_z(t - k)

    Поточечно определён при Re(z) > 0; z = 0 даёт индикатор [0, 1).

    Raises:
        UnsupportedRegimeError: Re(z) ∈ (-1, 0], z != 0
    """
    z = complex(z)
    _check_pointwise(z)
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)

    if z == 0:
        out = ((t >= 0) & (t < 1)).astype(complex)
        return complex(out) if scalar else out

    integer = is_nonnegative_integer(z)
    t_max = float(np.max(t)) if t.size else 0.0
    K = int(math.floor(t_max)) if t_max > 0 else 0
    if integer:
        K = min(K, int(z.real) + 1)
    coeffs = signed_binomials(z, K)
    inv_gamma = reciprocal_gamma(z + 1.0)

    out = np.zeros(t.shape, dtype=complex)
    for k in range(K + 1):
        out = out + coeffs[k] * truncated_power_eval(z, t - k)
    out = out * inv_gamma
    if integer:
        # носитель классического сплайна [0, z+1]
        out = np.where(t >= z.real + 1.0, 0.0, out)
    return complex(out) if scalar else out


def bspline_recurrence_eval(z: complex, t):
    """B_z(t) = (t/z)·B_{z-1}(t) + ((z+1-t)/z)·B_{z-1}(t-1)"""
    z = complex(z)
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    out = (t / z) * bspline_eval(z - 1.0, t) + ((z + 1.0 - t) / z) * bspline_eval(z - 1.0, t - 1.0)
    return complex(out) if scalar else out


def bspline_derivative_eval(z: complex, t):
    """d/dt B_z(t) = B_{z-1}(t) - B_{z-1}(t-1)"""
    z = complex(z)
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    out = bspline_eval(z - 1.0, t) - bspline_eval(z - 1.0, t - 1.0)
    return complex(out) if scalar else out


def bspline_fourier(z: complex, omega):
    """
    Символ B̂_z(ω) = Ω(ω)^{z+1}, главная ветвь

    B̂(0) = 1; на 2πℤ∖{0} значение 0 при Re(z) + 1 > 0
    """
    scalar = np.isscalar(omega)
    out = principal_power(omega_factor(omega), complex(z) + 1.0)
    return complex(out) if scalar else out


def backward_difference_symbol(z: complex, omega):
    """Символ ∇^{z+1}: (1 - e^{-iω})^{z+1}"""
    scalar = np.isscalar(omega)
    omega = np.asarray(omega, dtype=float)
    base = np.where(lattice_zero(omega) | (omega == 0), 0.0, 1.0 - np.exp(-1j * omega))
    out = principal_power(base, complex(z) + 1.0)
    return complex(out) if scalar else out


def truncated_power_fourier(z: complex, omega):
    """
    Символ k_z: (iω)^{-(z+1)}

    Raises:
        OrthogonalFrequencyError: ω = 0
    """
    scalar = np.isscalar(omega)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise OrthogonalFrequencyError("(iω)^{-(z+1)} has a pole at ω = 0")
    out = principal_power(1j * omega, -(complex(z) + 1.0))
    return complex(out) if scalar else out


def spectrum_factors(z: complex, omega) -> Tuple[complex, complex, float]:
    """
    Разложение B̂_z(ω) = base · modulation · damping

    base = B̂_{Re z}(ω), modulation = e^{i Im z ln|Ω|}, damping = e^{-Im z arg Ω}

    Raises:
        UnsupportedRegimeError: Ω(ω) = 0
    """
    z = complex(z)
    w = complex(omega_factor(float(omega)))
    if w == 0:
        raise UnsupportedRegimeError(f"Ω({omega}) = 0, factorization undefined")
    log_w = complex(np.log(w))
    arg = log_w.imag if log_w.imag != math.pi else -math.pi
    base = complex(principal_power(w, z.real + 1.0))
    modulation = complex(np.exp(1j * z.imag * log_w.real))
    damping = float(math.exp(-z.imag * arg))
    return base, modulation, damping


@dataclass(frozen=True)
class TruncatedPower:
    degree: complex
    normalized: bool = True

    def __post_init__(self):
        if complex(self.degree).real <= -1.0:
            raise DivergentSeriesError("k_z is not locally integrable for Re(z) <= -1")

    def __call__(self, t):
        return truncated_power_eval(self.degree, t, normalized=self.normalized)


@dataclass(frozen=True)
class ComplexBSpline:
    degree: complex
    truncation_eps: float = DEFAULT_EPS

    def __post_init__(self):
        _check_pointwise(complex(self.degree))

    def __call__(self, t):
        return bspline_eval(self.degree, t)

    def fourier(self, omega):
        return bspline_fourier(self.degree, omega)


def _knots_between(lo: float, hi: float, shifts: Sequence[float]) -> list:
    points = set()
    for s in shifts:
        for k in range(int(math.ceil(lo - s)), int(math.floor(hi - s)) + 1):
            p = k + s
            if lo < p < hi:
                points.add(p)
    return sorted(points)


def convolve_quadrature(f: Callable, g: Callable, t: float, support_hint: Tuple[float, float],
                        abs_tol: float = 1e-10, breakpoints: Optional[Sequence[float]] = None) -> complex:
    """
    (f * g)(t) = ∫ f(s) g(t - s) ds по адаптивной квадратуре Гаусса-Кронрода

    Интервал разбивается в целых узлах и в точках t - k, где у подынтегральной
    функции изломы.

    Args:
        f, g: Функции вещественного аргумента (могут быть комплексными)
        t: Точка
        support_hint: Отрезок интегрирования (lo, hi)
        abs_tol: Абсолютная точность
        breakpoints: Дополнительные особые точки

    Raises:
        QuadratureError: Квадратура не сошлась
    """
    lo, hi = float(support_hint[0]), float(support_hint[1])
    if hi <= lo:
        return 0j
    frac_t = t - math.floor(t)
    points = _knots_between(lo, hi, (0.0, frac_t))
    if breakpoints:
        points = sorted(set(points) | {p for p in breakpoints if lo < p < hi})
    limit = max(100, 4 * len(points) + 50)

    def integrand(s):
        return complex(f(s)) * complex(g(t - s))

    parts = []
    for part in (lambda s: integrand(s).real, lambda s: integrand(s).imag):
        out = integrate.quad(part, lo, hi, points=points or None, epsabs=abs_tol, epsrel=1e-12,
                             limit=limit, full_output=1)
        if len(out) > 3:
            logger.warning(f"⚠️ [convolve_quadrature] t={t}: {out[3]}")
            if out[1] > 100 * abs_tol:
                raise QuadratureError(f"quadrature did not converge at t={t}: estimated error {out[1]:.3g}")
        parts.append(out[0])
    return complex(parts[0], parts[1])
