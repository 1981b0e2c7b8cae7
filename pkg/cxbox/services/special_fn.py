"""
Special functions service
Комплексная гамма-функция, её логарифм и обобщённые биномиальные коэффициенты
"""
import math
from functools import lru_cache
from typing import Optional

import numpy as np

from cxbox.config import MAX_TRUNCATION_INDEX
from cxbox.errors import DivergentSeriesError, GammaPoleError, TruncationLimitError
from cxbox.logging_config import get_logger

logger = get_logger(__name__)

# Коэффициенты Ланцоша, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
POLE_TOLERANCE = 1e-13

# Предел поиска индекса усечения там, где он служит только границей и массив не строится
TAIL_SEARCH_LIMIT = 2 ** 50


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    """log Γ(z) для Re(z) >= 1/2"""
    z = z - 1.0
    x = np.full_like(z, LANCZOS_COEFFICIENTS[0])
    for i, c in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        x = x + c / (z + i)
    t = z + LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(x)


def _check_poles(z: np.ndarray):
    nearest = np.round(z.real)
    at_pole = (nearest <= 0) & (np.abs(z - nearest) < POLE_TOLERANCE * np.maximum(1.0, np.abs(nearest)))
    if np.any(at_pole):
        bad = complex(np.asarray(z)[at_pole].flat[0])
        raise GammaPoleError(f"Γ has a pole at {bad}")


def log_gamma(z):
    """
    Логарифм гамма-функции (аппроксимация Ланцоша + отражение при Re z < 1/2)

    Для Re(z) >= 1/2 совпадает с аналитическим продолжением ln Γ;
    в левой полуплоскости гарантируется только exp(log_gamma(z)) = Γ(z).

    Args:
        z: Комплексное число или массив

    Returns:
        complex или массив complex той же формы

    Raises:
        GammaPoleError: z совпадает с неположительным целым

    Example:
        >>> log_gamma(5)  # log(24)
    """
    scalar = np.isscalar(z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_poles(zz)

    out = np.empty_like(zz)
    right = zz.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_log_gamma(zz[right])
    left = ~right
    if np.any(left):
        zl = zz[left]
        # Γ(z)Γ(1-z) = π / sin(πz)
        out[left] = math.log(math.pi) - np.log(np.sin(np.pi * zl)) - _lanczos_log_gamma(1.0 - zl)

    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


def gamma(z):
    """Γ(z) = exp(log_gamma(z))"""
    return np.exp(log_gamma(z)) if not np.isscalar(z) else complex(np.exp(log_gamma(z)))


def reciprocal_gamma(z) -> complex:
    """1/Γ(z), равна 0 в полюсах"""
    try:
        return complex(np.exp(-log_gamma(z)))
    except GammaPoleError:
        return 0j


def binomial_sequence(a: complex, K: int) -> np.ndarray:
    """
    Массив binom(a, k) для k = 0..K через нисходящее произведение

    binom(a, k+1) = binom(a, k)·(a - k)/(k + 1)
    """
    K = int(K)
    if K < 0:
        return np.zeros(0, dtype=complex)
    k = np.arange(K, dtype=float)
    ratios = (complex(a) - k) / (k + 1.0)
    out = np.empty(K + 1, dtype=complex)
    out[0] = 1.0
    with np.errstate(over='ignore', invalid='ignore'):
        out[1:] = np.cumprod(ratios)
    return out


def complex_binomial(a: complex, k: int) -> complex:
    """
    Обобщённый биномиальный коэффициент Γ(a+1)/(Γ(k+1)Γ(a+1-k))

    Считается нисходящим произведением a(a-1)···(a-k+1)/k!, что корректно
    и в полюсах знаменателя. При переполнении возвращается inf.

    Example:
        >>> complex_binomial(3, 2)  # 3
    """
    if k < 0:
        return 0j
    result = 1.0 + 0j
    a = complex(a)
    for i in range(int(k)):
        result = result * (a - i) / (i + 1)
    return result


@lru_cache(maxsize=256)
def signed_binomials(z: complex, K: int) -> np.ndarray:
    """Коэффициенты (-1)^k binom(z+1, k), k = 0..K, для разностного оператора"""
    b = binomial_sequence(complex(z) + 1.0, K)
    signs = np.where(np.arange(K + 1) % 2 == 0, 1.0, -1.0)
    coeffs = signs * b
    coeffs.setflags(write=False)
    return coeffs


def is_nonnegative_integer(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real >= 0 and float(z.real).is_integer()


def log_abs_binomial(a: complex, K: int) -> float:
    """
    log|binom(a, K)| для больших K через отражение Γ(a+1-K)

    |binom(a,K)| = |Γ(a+1)|·|sin πa|·|Γ(K-a)| / (π·K!)
    """
    a = complex(a)
    s = abs(np.sin(np.pi * a))
    if s == 0.0:
        return -math.inf
    return (log_gamma(a + 1.0).real + math.log(s) + log_gamma(K - a).real
            - math.lgamma(K + 1.0) - math.log(math.pi))


def _log_tail_bound(a: complex, K: int) -> float:
    # log(2|b_K|(K+1)/Re a): Σ_{k>K} |b_k| <= 2|b_K|(K+1)/Re(a) при K >= k0
    return log_abs_binomial(a, K) + math.log(2.0 * (K + 1) / a.real)


def tail_start_index(a: complex) -> int:
    """Индекс k0, начиная с которого |b_(k+1)/b_k| <= 1 - (1 + Re a/2)/(k+1)"""
    re, im = a.real, a.imag
    return int(math.ceil(max(re, 0.75 * re + im * im / re))) + 1


def binomial_tail_index(z: complex, eps: float, limit: Optional[int] = None) -> int:
    """
    Индекс усечения K: Σ_{k>K} |binom(z+1, k)| < eps

    Для целого z >= 0 биномы обращаются в ноль за K = z+1. Иначе
    используется строгая оценка хвоста через убывание |b_k| ~ k^(-Re z - 2),
    вычисляемая в логарифмах: удвоение K (не дальше limit), затем
    бинарный поиск по монотонной оценке.

    Args:
        z: Степень, Re(z) > -1
        eps: Допуск на хвост
        limit: Наибольший допустимый K (по умолчанию MAX_TRUNCATION_INDEX)

    Returns:
        int: Индекс усечения K

    Raises:
        DivergentSeriesError: Re(z) <= -1
        TruncationLimitError: оценка хвоста при K = limit всё ещё не меньше eps
    """
    z = complex(z)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if z.real <= -1.0:
        raise DivergentSeriesError(f"binomial series of order z+1 diverges for Re(z) = {z.real} <= -1")
    if is_nonnegative_integer(z):
        return int(z.real) + 1
    limit = MAX_TRUNCATION_INDEX if limit is None else int(limit)

    a = z + 1.0
    log_eps = math.log(eps)
    k0 = max(tail_start_index(a), 1)
    if k0 > limit or _log_tail_bound(a, limit) >= log_eps:
        raise TruncationLimitError(
            f"binomial tail for z={z} needs more than {limit} terms to fall below {eps:g}; "
            f"relax eps or raise CXBOX_MAX_TERMS",
            limit,
        )
    hi = k0
    while _log_tail_bound(a, hi) >= log_eps:
        hi = min(2 * hi, limit)
    lo = max(k0, hi // 2)
    if _log_tail_bound(a, lo) < log_eps:
        return lo
    # инвариант: bound(lo) >= eps > bound(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _log_tail_bound(a, mid) < log_eps:
            hi = mid
        else:
            lo = mid
    logger.debug(f"🔧 [binomial_tail_index] z={z}, eps={eps:g} -> K={hi}")
    return hi


def magnitude_cutoff_index(z: complex, threshold: float, limit: int) -> int:
    """
    Длина K <= limit префикса, вне которого |binom(z+1, k)| < threshold (k >= K)

    Используется для обрезки одномерных массивов маски перед перебором
    """
    z = complex(z)
    if is_nonnegative_integer(z):
        return min(int(z.real) + 2, limit)
    a = z + 1.0
    k0 = tail_start_index(a)
    if k0 >= limit:
        return limit
    log_thr = math.log(threshold)
    if log_abs_binomial(a, k0) < log_thr:
        return k0
    lo, hi = k0, limit
    if log_abs_binomial(a, hi) >= log_thr:
        return limit
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_abs_binomial(a, mid) < log_thr:
            hi = mid
        else:
            lo = mid
    return hi
