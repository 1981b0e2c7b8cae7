"""
Two-scale refinement service
Маска масштабного соотношения h_z(k), её символ и проверка
2^d·ℬ̂(2ω) = Ĥ(ω)·ℬ̂(ω) в частотной области
"""
import math
from typing import List, Optional

import numpy as np

from cxbox.config import MAX_TRUNCATION_INDEX
from cxbox.errors import NonIntegerColumnsError, TruncationLimitError
from cxbox.logging_config import get_logger
from cxbox.models import DegreeVector, MaskCoefficients
from cxbox.services.directions import DirectionSet, random_frequencies
from cxbox.services.multivariate import _degrees, boxspline_symbol
from cxbox.services.special_fn import (
    TAIL_SEARCH_LIMIT,
    binomial_sequence,
    binomial_tail_index,
    is_nonnegative_integer,
    magnitude_cutoff_index,
)

logger = get_logger(__name__)

# Ограничение на число элементов матрицы exp(-ik·ω) в одном блоке
SYMBOL_BLOCK = 2_000_000


def _axis_binomials(zv: DegreeVector, eps: float) -> List[np.ndarray]:
    """Одномерные массивы binom(z_j+1, t), t = 0..K_j, обрезанные по модулю"""
    share = eps / len(zv)
    arrays = []
    for z in zv:
        K = binomial_tail_index(z, share, limit=TAIL_SEARCH_LIMIT)
        if not is_nonnegative_integer(z):
            # члены меньше share не могут дать коэффициент выше порога
            K = min(K, magnitude_cutoff_index(z, share, K + 1) - 1)
        if K > MAX_TRUNCATION_INDEX:
            raise TruncationLimitError(
                f"mask axis for z={z} keeps {K} coefficients above {share:g}, more than {MAX_TRUNCATION_INDEX}",
                MAX_TRUNCATION_INDEX,
            )
        arrays.append(binomial_sequence(z + 1.0, K))
    return arrays


def _enumerate_products(arrays: List[np.ndarray], threshold: float):
    """
    Перебор произведений Π_j b_j[t_j] с |произведение| >= threshold (гиперболический крест)

    Последняя ось обрабатывается векторно; для отсечения используются
    суффиксные максимумы |b_j|.

    Returns:
        (indices (count, n+1), values (count,))
    """
    magnitudes = [np.abs(b) for b in arrays]
    suffix_max = [np.maximum.accumulate(m[::-1])[::-1] for m in magnitudes]
    # максимум произведения по осям j+1..n
    rest = [1.0] * (len(arrays) + 1)
    for j in range(len(arrays) - 1, -1, -1):
        rest[j] = rest[j + 1] * float(suffix_max[j][0])

    last = len(arrays) - 1
    last_suffix_reversed = suffix_max[last][::-1]
    index_chunks, value_chunks = [], []

    def cut(j: int, bound: float) -> int:
        # число первых индексов t, для которых suffix_max[j][t] >= bound
        return int(len(suffix_max[j]) - np.searchsorted(suffix_max[j][::-1], bound, side='left'))

    def visit(j: int, prefix: List[int], product: complex):
        if j == last:
            product_magnitude = abs(product)
            if product_magnitude == 0:
                return
            count = int(len(last_suffix_reversed) - np.searchsorted(last_suffix_reversed, threshold / product_magnitude, side='left'))
            if count <= 0:
                return
            t = np.arange(count)
            block = np.empty((count, len(arrays)), dtype=np.int64)
            block[:, :last] = prefix
            block[:, last] = t
            index_chunks.append(block)
            value_chunks.append(product * arrays[last][:count])
            return
        bound = threshold / (abs(product) * rest[j + 1]) if abs(product) > 0 else math.inf
        for t in range(cut(j, bound)):
            if magnitudes[j][t] == 0:
                continue
            visit(j + 1, prefix + [t], product * arrays[j][t])

    visit(0, [], 1.0 + 0j)
    if not index_chunks:
        return np.zeros((0, len(arrays)), dtype=np.int64), np.zeros(0, dtype=complex)
    return np.concatenate(index_chunks), np.concatenate(value_chunks)


def compute_mask(zv, M: DirectionSet, eps: float = 1e-10) -> MaskCoefficients:
    """
    Маска h_z(k) масштабного соотношения ℬ_z(x/2|M) = Σ_k h(k)·ℬ_z(x - k|M)

    Произведения Π_j binom(z_j+1, t_j) накапливаются в ячейке k = Σ_j t_j m_j,
    ячейки с |h| < eps·max|h| отбрасываются, затем маска нормируется так,
    чтобы Σ_k h(k) = 2^d. Константа из явной формулы 2^(d - Σ(z_j+1))
    сохраняется рядом для сравнения.

    Raises:
        NonIntegerColumnsError: столбцы M не целочисленные
        DivergentSeriesError: Re(z_j) <= -1
    """
    zv = _degrees(zv, M)
    if not M.integer_columns:
        raise NonIntegerColumnsError("two-scale masks need integer direction columns")
    if eps <= 0:
        raise ValueError("eps must be positive")

    logger.info(f"🔧 Computing two-scale mask: z={list(zv)}, d={M.d}, eps={eps:g}")
    arrays = _axis_binomials(zv, eps)
    peak = float(np.prod([np.max(np.abs(b)) for b in arrays]))
    threshold = eps * peak
    if zv.is_integer:
        threshold = 0.0
    indices, values = _enumerate_products(arrays, threshold) if threshold > 0 else _full_product(arrays)
    logger.debug(f"🔍 [compute_mask] axis lengths {[len(b) for b in arrays]}, {len(values)} products kept")

    columns = np.rint(M.matrix).astype(np.int64)
    keys = indices @ columns.T
    unique_keys, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    buckets = np.zeros(unique_keys.shape[0], dtype=complex)
    np.add.at(buckets, inverse, values)

    keep = np.abs(buckets) >= eps * np.max(np.abs(buckets)) if not zv.is_integer else buckets != 0
    unique_keys, buckets = unique_keys[keep], buckets[keep]

    normalization = (2.0 ** M.d) / complex(np.sum(buckets))
    closed_form_constant = complex(2.0 ** (M.d - sum(z + 1.0 for z in zv)))
    logger.info(f"✅ Mask ready: {len(buckets)} coefficients, normalization {normalization:.12g}")
    return MaskCoefficients(
        keys=unique_keys,
        values=buckets * normalization,
        eps=float(eps),
        degrees=zv,
        directions=M,
        normalization=normalization,
        closed_form_constant=closed_form_constant,
    )


def _full_product(arrays: List[np.ndarray]):
    shape = [len(b) for b in arrays]
    indices = np.indices(shape).reshape(len(shape), -1).T.astype(np.int64)
    values = np.ones(indices.shape[0], dtype=complex)
    for j, b in enumerate(arrays):
        values = values * b[indices[:, j]]
    return indices, values


def mask_symbol(mask: MaskCoefficients, omega):
    """Ĥ(ω) = Σ_k h(k)·e^{-ik·ω}"""
    omega = np.asarray(omega, dtype=float)
    single = omega.ndim == 1
    flat = omega.reshape(-1, mask.ndim)
    out = np.empty(flat.shape[0], dtype=complex)
    keys = mask.keys.astype(float)
    block = max(1, SYMBOL_BLOCK // max(1, len(mask)))
    for start in range(0, flat.shape[0], block):
        phases = flat[start:start + block] @ keys.T
        out[start:start + block] = np.exp(-1j * phases) @ mask.values
    if single:
        return complex(out[0])
    return out.reshape(omega.shape[:-1])


def two_scale_frequencies(M: DirectionSet, count: int, rng: np.random.Generator,
                          fraction: float = 0.5) -> np.ndarray:
    """
    Частоты с |ω·m_j| < fraction·π

    В этом окне главные ветви согласованы и 2^d ℬ̂(2ω) не обращается в ноль
    """
    return random_frequencies(M, count, rng, max_phase=fraction * math.pi)


def verify_two_scale(zv, M: DirectionSet, omega_samples, mask: Optional[MaskCoefficients] = None,
                     eps: float = 1e-10) -> float:
    """
    max |2^d ℬ̂(2ω) - Ĥ(ω)ℬ̂(ω)| / (|2^d ℬ̂(2ω)| + ε_machine)

    Args:
        zv, M: Сплайн
        omega_samples: Частоты (count, d) вне нулей ℬ̂
        mask: Готовая маска (иначе вычисляется с eps)
        eps: Допуск для compute_mask
    """
    zv = _degrees(zv, M)
    if mask is None:
        mask = compute_mask(zv, M, eps)
    omega = np.asarray(omega_samples, dtype=float).reshape(-1, M.d)
    lhs = (2.0 ** M.d) * boxspline_symbol(zv, M, 2.0 * omega)
    rhs = mask_symbol(mask, omega) * boxspline_symbol(zv, M, omega)
    residual = np.abs(lhs - rhs) / (np.abs(lhs) + np.finfo(float).eps)
    worst = float(np.max(residual)) if residual.size else 0.0
    logger.info(f"📊 Two-scale residual {worst:.3e} over {omega.shape[0]} frequencies")
    return worst
