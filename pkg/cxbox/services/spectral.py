"""
Spectral sampling service
Сэмплирование распределений, заданных символом Фурье, через обратное ДПФ,
а также оценка скорости убывания символа и показателей гладкости
"""
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import fft

from cxbox.config import MAX_GRID_NODES, SAMPLE_PADDING, SAMPLE_SPAN, TAIL_BUDGET, THREADS
from cxbox.errors import ScopeError, TailBudgetExceededError
from cxbox.logging_config import get_logger
from cxbox.models import DecayReport, DegreeVector, FrequencyGrid, RaySlope, SampledField
from cxbox.services.directions import DirectionSet, support_box
from cxbox.services.multivariate import _degrees, boxspline_symbol

logger = get_logger(__name__)

# Отсчётов на один лепесток |B̂| при поиске огибающей
SAMPLES_PER_LOBE = 64
SHELLS_PER_OCTAVE = 2

# Начальное Ω_max для подбора по измеренной энергии
EMPIRICAL_START_OMEGA = 16.0 * math.pi


def tail_energy_fraction(alpha: float, omega_max: float, d: int = 1) -> float:
    """
    Доля энергии символа вне куба [-Ω_max, Ω_max]^d

    Модель: |B̂(ω)|² ~ |ω|^{-2(α+1)} по каждой оси, что даёт
    d·Ω_max^{-(2α+1)}/(π(2α+1)).

    Raises:
        TailBudgetExceededError: α <= -1/2 (энергия бесконечна)
    """
    exponent = 2.0 * alpha + 1.0
    if exponent <= 0:
        raise TailBudgetExceededError(
            f"symbol is not square integrable for alpha = {alpha} <= -1/2", math.inf)
    return d * omega_max ** (-exponent) / (math.pi * exponent)


def choose_omega_max(alpha: float, budget: float, d: int = 1) -> float:
    """Наименьшее Ω_max с tail_energy_fraction(α, Ω_max, d) <= budget"""
    exponent = 2.0 * alpha + 1.0
    if exponent <= 0:
        raise TailBudgetExceededError(
            f"no finite omega_max meets the tail budget for alpha = {alpha} <= -1/2", math.inf)
    return (d / (math.pi * exponent * budget)) ** (1.0 / exponent)


def frequency_axes(grid: FrequencyGrid) -> list:
    """Частоты ДПФ (порядок fft) для сетки с учётом padding"""
    return [
        2.0 * math.pi * fft.fftfreq(n * grid.padding, d=h)
        for n, h in zip(grid.bins, grid.spacing)
    ]


def sample_from_symbol(symbol: Callable[[np.ndarray], np.ndarray], grid: FrequencyGrid,
                       dc_value: complex = 1.0, alpha: Optional[float] = None,
                       tail_budget: Optional[float] = None) -> SampledField:
    """
    Значения функции f на пространственной сетке по её символу f̂

    f(x_n) ≈ (Δω/2π)^d Σ_k f̂(ω_k) e^{iω_k x_n},  x_n = origin + n·h,
    что вычисляется одним обратным ДПФ. Прямое преобразование - e^{-iωx}.

    Args:
        symbol: Функция массива частот (..., d) -> комплексный массив
        grid: Частотная сетка
        dc_value: Значение в нулевой частоте (1 для box-сплайнов)
        alpha: Показатель убывания символа для оценки хвоста
        tail_budget: Допустимая доля энергии хвоста (None - не проверять)

    Returns:
        SampledField во временной области, extents = grid.bins

    Raises:
        TailBudgetExceededError: Оценка хвоста превышает бюджет
    """
    d = grid.ndim
    if alpha is not None and tail_budget is not None:
        fraction = max(tail_energy_fraction(alpha, w, d) for w in grid.omega_max)
        if fraction > tail_budget:
            raise TailBudgetExceededError(
                f"tail energy fraction {fraction:.3e} exceeds budget {tail_budget:.1e}; "
                f"increase omega_max to at least {choose_omega_max(alpha, tail_budget, d):.4g}",
                fraction,
            )
        logger.debug(f"📊 [sample_from_symbol] tail energy fraction {fraction:.3e}")

    axes = frequency_axes(grid)
    mesh = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    values = np.asarray(symbol(mesh), dtype=complex).reshape(mesh.shape[:-1])
    values[(0,) * d] = dc_value

    # сдвиг начала координат: множитель e^{iω·origin}
    phase = np.zeros(values.shape)
    for j, (w, x0) in enumerate(zip(axes, grid.origin)):
        shape = [1] * d
        shape[j] = -1
        phase = phase + (w * x0).reshape(shape)
    values = values * np.exp(1j * phase)

    samples = fft.ifftn(values, workers=THREADS) / float(np.prod(grid.spacing))
    samples = samples[tuple(slice(0, n) for n in grid.bins)]
    logger.debug(f"🔧 [sample_from_symbol] grid {grid.bins} x padding {grid.padding}, h={grid.spacing}")
    return SampledField('time', tuple(grid.origin), tuple(grid.spacing), np.ascontiguousarray(samples))


def boxspline_sample(zv, M: DirectionSet, grid: FrequencyGrid,
                     tail_budget: Optional[float] = None) -> SampledField:
    """Сэмплы ℬ_z(·|M) на сетке grid"""
    zv = _degrees(zv, M)
    if grid.ndim != M.d:
        raise ValueError(f"grid dimension {grid.ndim} does not match M dimension {M.d}")
    return sample_from_symbol(
        lambda omega: boxspline_symbol(zv, M, omega.reshape(-1, M.d)),
        grid,
        dc_value=1.0,
        alpha=zv.min_real,
        tail_budget=tail_budget,
    )


def _bins_for(omega_max: float, extent: float) -> int:
    """Наименьшая степень двойки n с n·π/Ω_max >= extent"""
    need = max(1, math.ceil(extent * omega_max / math.pi))
    return 1 << (need - 1).bit_length()


def _symbol_energy(zv: DegreeVector, M: DirectionSet, bins, omega_max) -> float:
    field = symbol_on_grid(lambda omega: boxspline_symbol(zv, M, omega), bins, omega_max)
    return float(np.sum(np.abs(field.values) ** 2)) * float(np.prod(field.spacing))


def empirical_omega_max(zv, M: DirectionSet, tail_budget: float, extent: float,
                        start: float = EMPIRICAL_START_OMEGA, max_nodes: int = MAX_GRID_NODES) -> float:
    """
    Ω_max удвоением по измеренной энергии символа (для α < 0)

    Энергия слоя между Ω/2 и Ω убывает примерно геометрически, поэтому хвост
    за Ω оценивается как S·r/(1 - r), где S - энергия последнего слоя,
    r - отношение энергий двух последних слоёв.

    Raises:
        TailBudgetExceededError: бюджет не достигнут на сетке из max_nodes узлов
    """
    zv = _degrees(zv, M)
    d = M.d
    omega = float(start)
    energies = []
    fraction = math.inf
    while True:
        n = _bins_for(omega, extent)
        if n ** d > max_nodes:
            raise TailBudgetExceededError(
                f"tail energy fraction {fraction:.3e} still above budget {tail_budget:.1e} "
                f"at omega_max={omega / 2:.4g}; a finer grid needs more than {max_nodes} nodes",
                fraction,
            )
        energies.append(_symbol_energy(zv, M, (n,) * d, (omega,) * d))
        if len(energies) >= 3:
            shell, previous = energies[-1] - energies[-2], energies[-2] - energies[-3]
            ratio = shell / previous if previous > 0 else math.inf
            tail = shell * ratio / (1.0 - ratio) if 0.0 <= ratio < 1.0 else math.inf
            fraction = tail / (energies[-1] + tail)
            logger.debug(f"📊 [empirical_omega_max] omega_max={omega:.4g}, shell ratio {ratio:.3f}, tail {fraction:.3e}")
            if fraction < tail_budget:
                return omega
        omega *= 2.0


def plan_grid(zv, M: DirectionSet, tail_budget: float = TAIL_BUDGET,
              bins: Optional[Tuple[int, ...]] = None, omega_max: Optional[Tuple[float, ...]] = None,
              span: float = SAMPLE_SPAN, padding: int = SAMPLE_PADDING,
              max_nodes: int = MAX_GRID_NODES) -> FrequencyGrid:
    """
    Сетка для сэмплирования ℬ_z(·|M), если она задана не полностью

    Ω_max выбирается по показателю убывания α = min Re z_j так, чтобы доля
    энергии хвоста не превышала tail_budget: choose_omega_max при α >= 0,
    empirical_omega_max при α < 0. Узлы начинаются на единицу левее образа
    [0,1]^{n+1} и заходят на span правее него; число узлов - степень двойки.

    Raises:
        TailBudgetExceededError: α <= -1/2 или сетка больше max_nodes узлов
    """
    zv = _degrees(zv, M)
    d = M.d
    corners = support_box(M)
    low = np.floor(corners.min(axis=0)) - 1.0
    extent = float(np.max(corners.max(axis=0) - low)) + span
    alpha = zv.min_real

    if omega_max is None:
        if alpha >= 0:
            omega_max = (choose_omega_max(alpha, tail_budget, d),) * d
        else:
            if 2.0 * alpha + 1.0 <= 0:
                raise TailBudgetExceededError(f"symbol is not square integrable for alpha = {alpha} <= -1/2", math.inf)
            omega_max = (empirical_omega_max(zv, M, tail_budget, extent, max_nodes=max_nodes),) * d
    omega_max = tuple(float(w) for w in omega_max)
    if bins is None:
        bins = tuple(_bins_for(w, extent) for w in omega_max)
    nodes = int(np.prod(bins))
    if nodes > max_nodes:
        affordable = math.pi * max_nodes ** (1.0 / d) / extent
        raise TailBudgetExceededError(
            f"a grid meeting tail budget {tail_budget:.1e} needs {nodes} nodes "
            f"(omega_max={max(omega_max):.4g}), more than {max_nodes}",
            tail_energy_fraction(alpha, affordable, d),
        )
    grid = FrequencyGrid(tuple(int(n) for n in bins), omega_max, tuple(float(v) for v in low), padding)
    logger.info(f"📐 Planned grid {grid.bins}, omega_max={max(omega_max):.4g}, origin={grid.origin}")
    return grid


def symbol_on_grid(symbol: Callable[[np.ndarray], np.ndarray], bins, omega_max) -> SampledField:
    """
    Символ на центрированной сетке ω_k = -Ω_max + k·Δω (частотная область)
    """
    bins = tuple(int(n) for n in bins)
    omega_max = tuple(float(w) for w in omega_max)
    steps = tuple(2.0 * w / n for w, n in zip(omega_max, bins))
    origin = tuple(-w for w in omega_max)
    axes = [o + s * np.arange(n) for o, s, n in zip(origin, steps, bins)]
    mesh = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    values = np.asarray(symbol(mesh.reshape(-1, len(bins))), dtype=complex).reshape(bins)
    return SampledField('frequency', origin, steps, values)


def frequency_to_time(field: SampledField, origin: Tuple[float, ...]) -> SampledField:
    """
    Обратное преобразование центрированной частотной сетки

    Пространственный шаг h = 2π/(N·Δω), узлы origin + n·h.
    """
    if field.domain_tag != 'frequency':
        raise ValueError("expected a frequency-domain field")
    d = field.ndim
    spacing = tuple(2.0 * math.pi / (n * s) for n, s in zip(field.extents, field.spacing))
    # перестановка в порядок fft: нулевая частота в начало
    shifted = fft.ifftshift(field.values)
    axes = [2.0 * math.pi * fft.fftfreq(n, d=h) for n, h in zip(field.extents, spacing)]
    phase = np.zeros(shifted.shape)
    for j, (w, x0) in enumerate(zip(axes, origin)):
        shape = [1] * d
        shape[j] = -1
        phase = phase + (w * x0).reshape(shape)
    samples = fft.ifftn(shifted * np.exp(1j * phase), workers=THREADS) / float(np.prod(spacing))
    return SampledField('time', tuple(float(o) for o in origin), spacing, samples)


def grid_l2_norm(field: SampledField) -> float:
    """sqrt(Σ|v|²·Π h); для частотной области делится на (2π)^d"""
    norm2 = float(np.sum(np.abs(field.values) ** 2)) * float(np.prod(field.spacing))
    if field.domain_tag == 'frequency':
        norm2 /= (2.0 * math.pi) ** field.ndim
    return math.sqrt(norm2)


def _require_diagonal(M: DirectionSet):
    if not M.is_diagonal:
        raise ScopeError("decay and smoothness analysis is implemented for diagonal M only")


def _ray_directions(M: DirectionSet, ray_count: int, rng: np.random.Generator) -> np.ndarray:
    rays = [np.eye(M.d)[j] for j in range(M.d)]
    for _ in range(max(0, ray_count - M.d)):
        u = np.abs(rng.normal(size=M.d)) + 0.05
        rays.append(u / np.linalg.norm(u))
    return np.array(rays)


def _fit_ray(zv: DegreeVector, M: DirectionSet, direction: np.ndarray,
             omega_range: Tuple[float, float]) -> RaySlope:
    lo, hi = omega_range
    scale = float(np.max(np.abs(direction @ M.matrix)))
    step = 2.0 * math.pi / scale / SAMPLES_PER_LOBE
    edges = lo * 2.0 ** (np.arange(0, math.log2(hi / lo) * SHELLS_PER_OCTAVE + 1) / SHELLS_PER_OCTAVE)
    edges = np.append(edges[edges < hi], hi)

    log_r, log_env = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r = np.arange(a, b, step)
        if r.size == 0:
            continue
        magnitude = np.abs(boxspline_symbol(zv, M, r[:, None] * direction[None, :]))
        k = int(np.argmax(magnitude))
        if magnitude[k] > 0:
            log_r.append(math.log(r[k]))
            log_env.append(math.log(magnitude[k]))
    coeffs, residuals, *_ = np.polyfit(log_r, log_env, 1, full=True)
    rms = math.sqrt(float(residuals[0]) / len(log_r)) if len(residuals) else 0.0
    return RaySlope(tuple(float(v) for v in direction), float(coeffs[0]), rms)


def estimate_decay(zv, M: DirectionSet, ray_count: int = 6,
                   omega_range: Tuple[float, float] = (1e2, 1e4),
                   rng: Optional[np.random.Generator] = None) -> DecayReport:
    """
    Оценка показателя α в |B̂(ω)| ~ |ω|^{-(α+1)}

    Вдоль каждого луча берутся максимумы |B̂| в полуоктавных слоях
    (нули символа не портят регрессию), затем наклон в log-log.
    Лучи: координатные оси плюс случайные направления в положительном ортанте.

    Raises:
        ScopeError: M не диагональна
    """
    zv = _degrees(zv, M)
    _require_diagonal(M)
    rng = rng or np.random.default_rng(0)
    rays = tuple(_fit_ray(zv, M, u, omega_range) for u in _ray_directions(M, ray_count, rng))
    alpha_est = min(-ray.slope for ray in rays) - 1.0
    alpha_theory = zv.min_real
    logger.info(f"📊 Decay fit: alpha_est={alpha_est:.4f}, alpha_theory={alpha_theory:.4f} over {len(rays)} rays")
    return DecayReport(alpha_est=alpha_est, alpha_theory=alpha_theory, rays=rays,
                       omega_range=(float(omega_range[0]), float(omega_range[1])))


def smoothness_exponents(zv, M: DirectionSet) -> Tuple[float, Optional[Tuple[int, float]]]:
    """
    Показатели гладкости ℬ_z(·|M) для диагональной M

    Returns:
        (sobolev_sup, holder): sobolev_sup = α + 1/2; holder = (l, γ) с
        l = ⌊k - d/2⌋, γ = k - d/2 - l при k = sobolev_sup > d/2, иначе None
    """
    zv = _degrees(zv, M)
    _require_diagonal(M)
    sobolev_sup = zv.min_real + 0.5
    excess = sobolev_sup - M.d / 2.0
    if excess <= 0:
        return sobolev_sup, None
    l = int(math.floor(excess))
    return sobolev_sup, (l, excess - l)
