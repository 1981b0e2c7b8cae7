"""
Domain models
Неизменяемые структуры данных, которыми обмениваются сервисы и обработчики
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from cxbox.errors import SpecValidationError


def as_complex(value) -> complex:
    """
    Привести степень к complex

    Принимает число, пару [re, im] или словарь {"re": ..., "im": ...}
    """
    if isinstance(value, dict):
        return complex(float(value.get('re', 0.0)), float(value.get('im', 0.0)))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SpecValidationError(f"Степень должна быть парой [re, im], получено {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


@dataclass(frozen=True)
class DegreeVector:
    """Вектор комплексных степеней z_0..z_n (по одной на столбец M)"""
    entries: Tuple[complex, ...]

    @classmethod
    def of(cls, values) -> 'DegreeVector':
        if isinstance(values, DegreeVector):
            return values
        if np.isscalar(values):
            values = [values]
        return cls(tuple(as_complex(v) for v in values))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.entries)

    def __getitem__(self, j: int) -> complex:
        return self.entries[j]

    def __add__(self, other) -> 'DegreeVector':
        other = DegreeVector.of(other)
        if len(other) != len(self):
            raise SpecValidationError("Векторы степеней разной длины")
        return DegreeVector(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def shifted(self, delta: complex, j: Optional[int] = None) -> 'DegreeVector':
        """z + delta (по всем осям) или z + delta·e_j"""
        return DegreeVector(tuple(
            z + delta if (j is None or i == j) else z
            for i, z in enumerate(self.entries)
        ))

    def without_last(self) -> 'DegreeVector':
        return DegreeVector(self.entries[:-1])

    @property
    def real_parts(self) -> np.ndarray:
        return np.array([z.real for z in self.entries])

    @property
    def min_real(self) -> float:
        return float(min(z.real for z in self.entries))

    @property
    def is_integer(self) -> bool:
        """Все степени неотрицательные целые"""
        return all(z.imag == 0 and z.real >= 0 and float(z.real).is_integer() for z in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex)

    def to_json(self):
        return [[z.real, z.imag] for z in self.entries]


@dataclass(frozen=True, eq=False)
class SampledField:
    """
    Равномерная d-мерная сетка комплексных отсчётов

    values хранится в форме extents (row-major), первая ось соответствует x_0
    """
    domain_tag: str
    origin: Tuple[float, ...]
    spacing: Tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.domain_tag not in ('time', 'frequency'):
            raise SpecValidationError(f"Неизвестная область {self.domain_tag!r}")
        if len(self.origin) != self.values.ndim or len(self.spacing) != self.values.ndim:
            raise SpecValidationError("origin/spacing не согласованы с размерностью values")
        if any(h <= 0 for h in self.spacing):
            raise SpecValidationError("spacing должен быть положительным")

    @property
    def extents(self) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.values.shape)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def axis(self, j: int) -> np.ndarray:
        """Координаты узлов вдоль оси j"""
        return self.origin[j] + self.spacing[j] * np.arange(self.values.shape[j])

    def coordinates(self) -> np.ndarray:
        """Массив координат формы extents + (d,)"""
        axes = [self.axis(j) for j in range(self.ndim)]
        return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)

    def with_values(self, values: np.ndarray) -> 'SampledField':
        return SampledField(self.domain_tag, self.origin, self.spacing, values)


@dataclass(frozen=True)
class FrequencyGrid:
    """
    Описание частотной сетки для сэмплирования по символу

    bins[j] отсчётов на оси j покрывают [-omega_max[j], omega_max[j]);
    шаг по пространству h_j = pi / omega_max[j], узлы x = origin + n·h.
    padding увеличивает период обратного ДПФ, результат затем обрезается.
    """
    bins: Tuple[int, ...]
    omega_max: Tuple[float, ...]
    origin: Tuple[float, ...]
    padding: int = 1

    def __post_init__(self):
        d = len(self.bins)
        if len(self.omega_max) != d or len(self.origin) != d:
            raise SpecValidationError("bins, omega_max и origin должны иметь одинаковую длину")
        if any(n < 1 for n in self.bins) or any(w <= 0 for w in self.omega_max):
            raise SpecValidationError("bins >= 1 и omega_max > 0 обязательны")
        if self.padding < 1:
            raise SpecValidationError("padding должен быть >= 1")

    @classmethod
    def uniform(cls, d: int, bins: int, omega_max: float, origin=0.0, padding: int = 1) -> 'FrequencyGrid':
        if np.isscalar(origin):
            origin = (float(origin),) * d
        return cls((int(bins),) * d, (float(omega_max),) * d, tuple(float(o) for o in origin), int(padding))

    @property
    def ndim(self) -> int:
        return len(self.bins)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(math.pi / w for w in self.omega_max)

    @property
    def frequency_step(self) -> Tuple[float, ...]:
        return tuple(2.0 * w / n for w, n in zip(self.omega_max, self.bins))


@dataclass(frozen=True)
class RaySlope:
    direction: Tuple[float, ...]
    slope: float
    residual: float


@dataclass(frozen=True)
class DecayReport:
    """Результат оценки скорости убывания |B̂| вдоль лучей"""
    alpha_est: float
    alpha_theory: float
    rays: Tuple[RaySlope, ...]
    omega_range: Tuple[float, float] = (1e2, 1e4)

    def to_json(self) -> dict:
        return {
            'alpha_est': self.alpha_est,
            'alpha_theory': self.alpha_theory,
            'omega_range': list(self.omega_range),
            'rays': [
                {'direction': list(r.direction), 'slope': r.slope, 'residual': r.residual}
                for r in self.rays
            ],
        }


@dataclass(frozen=True, eq=False)
class MaskCoefficients:
    """
    Разреженная маска масштабного соотношения h_z(k)

    keys: целочисленный массив (count, d), отсортирован лексикографически
    values: комплексные коэффициенты той же длины
    normalization: константа, обеспечивающая Σ h = 2^d
    closed_form_constant: 2^(d - Σ(z_j + 1)), значение из явной формулы
    """
    keys: np.ndarray
    values: np.ndarray
    eps: float
    degrees: DegreeVector
    directions: object
    normalization: complex = 1.0
    closed_form_constant: complex = 1.0

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def ndim(self) -> int:
        return int(self.keys.shape[1])

    def as_dict(self) -> Dict[Tuple[int, ...], complex]:
        return {tuple(int(v) for v in k): complex(h) for k, h in zip(self.keys, self.values)}

    def dc_sum(self) -> complex:
        return complex(np.sum(self.values))


@dataclass(frozen=True)
class LizorkinWindow:
    """
    Частотное окно: обнуляет спектр при |ω_j| < inner_radius по каждой оси
    и плавно (приподнятый косинус) выходит на 1 на [r, r + taper]
    """
    inner_radius: float
    taper: float

    def __post_init__(self):
        if self.inner_radius <= 0 or self.taper <= 0:
            raise SpecValidationError("inner_radius и taper должны быть положительными")

    def axis_weights(self, omega: np.ndarray) -> np.ndarray:
        r = np.abs(np.asarray(omega, dtype=float))
        s = np.clip((r - self.inner_radius) / self.taper, 0.0, 1.0)
        w = 0.5 * (1.0 - np.cos(np.pi * s))
        w[r < self.inner_radius] = 0.0
        return w

    def weights(self, omega: np.ndarray) -> np.ndarray:
        """Веса для массива частот формы (..., d)"""
        omega = np.asarray(omega, dtype=float)
        w = np.ones(omega.shape[:-1])
        for j in range(omega.shape[-1]):
            w = w * self.axis_weights(omega[..., j])
        return w


@dataclass(frozen=True)
class FractionalOrder:
    """Порядок дробного оператора: m_j = ceil(Re z_j + 1), nu_j = m_j - z_j"""
    degrees: DegreeVector
    m: Tuple[int, ...] = field(init=False)
    nu: Tuple[complex, ...] = field(init=False)

    def __post_init__(self):
        m = tuple(int(math.ceil(z.real + 1.0)) for z in self.degrees)
        object.__setattr__(self, 'm', m)
        object.__setattr__(self, 'nu', tuple(mj - z for mj, z in zip(m, self.degrees)))

    @classmethod
    def of(cls, values) -> 'FractionalOrder':
        return cls(DegreeVector.of(values))

    @property
    def total_m(self) -> int:
        return sum(self.m)


@dataclass(frozen=True)
class ProblemSpec:
    """Описание задачи, прочитанное из JSON"""
    degrees: DegreeVector
    directions: object
    grid: Optional[FrequencyGrid] = None
    eps: float = 1e-10
    radius: Optional[int] = None
    rays: int = 6
    omega_range: Tuple[float, float] = (1e2, 1e4)
    points: Optional[Sequence[Sequence[float]]] = None
