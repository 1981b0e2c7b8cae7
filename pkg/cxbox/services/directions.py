"""
Direction sets service
Матрицы направлений M (d×(n+1)), их проверка и порождаемая геометрия
"""
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from cxbox.errors import DirectionSetError, InvalidReducedDirectionsError, NotSquareError
from cxbox.logging_config import get_logger

logger = get_logger(__name__)


class SignConventionWarning(UserWarning):
    """Первая ненулевая компонента столбца отрицательна"""


@dataclass(frozen=True)
class DirectionSet:
    """
    Проверенный набор направлений

    columns хранятся в заявленном порядке: вектор степеней z
    сопоставляется столбцам позиционно.
    """
    d: int
    columns: Tuple[Tuple[float, ...], ...]
    integer_columns: bool
    sign_convention: bool

    @property
    def n_plus_1(self) -> int:
        return len(self.columns)

    @property
    def matrix(self) -> np.ndarray:
        """M формы (d, n+1)"""
        return np.array(self.columns, dtype=float).T

    @property
    def is_square(self) -> bool:
        return self.n_plus_1 == self.d

    @property
    def is_diagonal(self) -> bool:
        M = self.matrix
        return self.is_square and np.count_nonzero(M - np.diag(np.diag(M))) == 0

    def phases(self, omega) -> np.ndarray:
        """θ_j = ω·m_j для массива частот формы (..., d)"""
        return np.asarray(omega, dtype=float) @ self.matrix

    def without_last(self) -> 'DirectionSet':
        """M∖m_n; ошибка, если ранг теряется"""
        try:
            return validate(np.array(self.columns[:-1], dtype=float).T, warn=False)
        except DirectionSetError as e:
            raise InvalidReducedDirectionsError(f"M without its last column is not a direction set: {e}")

    def to_json(self) -> dict:
        cols = [[int(v) if self.integer_columns else v for v in c] for c in self.columns]
        return {'d': self.d, 'columns': cols}


def validate(M, warn: bool = True) -> DirectionSet:
    """
    Проверить матрицу направлений

    Args:
        M: Матрица формы (d, n+1) (столбцы - направления)
        warn: Выдавать предупреждение при нарушении знакового соглашения

    Returns:
        DirectionSet

    Raises:
        DirectionSetError: нулевой столбец или неполный ранг
    """
    if isinstance(M, DirectionSet):
        return M
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DirectionSetError(f"direction matrix must be 2-D, got shape {M.shape}", 'shape')
    if not np.all(np.isfinite(M)):
        raise DirectionSetError("direction matrix has non-finite entries", 'shape')
    d, cols = M.shape

    if cols < d or np.linalg.matrix_rank(M) < d:
        raise DirectionSetError(f"columns do not span R^{d} (rank-deficient)", 'rank-deficient')

    zero = [j for j in range(cols) if not np.any(M[:, j])]
    if zero:
        raise DirectionSetError(f"zero column(s) at index {zero}", 'zero-column')

    sign_ok = True
    for j in range(cols):
        first = M[np.flatnonzero(M[:, j])[0], j]
        if first < 0:
            sign_ok = False
    if not sign_ok and warn:
        message = "first nonzero component of some direction is negative; truncated-power time-domain evaluation is not covered"
        warnings.warn(message, SignConventionWarning, stacklevel=2)

    integer = bool(np.all(M == np.round(M)))
    logger.debug(f"🧭 Direction set: d={d}, n={cols}, integer={integer}, sign_convention={sign_ok}")
    return DirectionSet(
        d=d,
        columns=tuple(tuple(float(v) for v in M[:, j]) for j in range(cols)),
        integer_columns=integer,
        sign_convention=sign_ok,
    )


def from_json(data: dict) -> DirectionSet:
    """{"d": 2, "columns": [[2, 0], [0, 3]]}"""
    try:
        columns = data['columns']
        d = int(data.get('d', len(columns[0])))
    except (KeyError, IndexError, TypeError) as e:
        raise DirectionSetError(f"malformed direction set JSON: {e}", 'shape')
    if any(len(c) != d for c in columns):
        raise DirectionSetError(f"every column must have length d={d}", 'shape')
    return validate(np.array(columns, dtype=float).T)


def det_and_inverse(M: DirectionSet) -> Tuple[float, np.ndarray]:
    """
    Определитель и обратная матрица

    Raises:
        NotSquareError: n+1 != d
    """
    if not M.is_square:
        raise NotSquareError(f"M has {M.n_plus_1} columns in dimension {M.d}; an invertible square M is required")
    A = M.matrix
    det = float(np.linalg.det(A))
    if M.is_diagonal:
        inverse = np.diag(1.0 / np.diag(A))
    else:
        inverse = np.linalg.inv(A)
    return det, inverse


def support_box(M: DirectionSet) -> np.ndarray:
    """
    Образы вершин единичного куба [0,1]^{n+1} под действием M

    Returns:
        Массив (2^{n+1}, d) в порядке itertools.product
    """
    A = M.matrix
    vertices = np.array(list(itertools.product((0.0, 1.0), repeat=M.n_plus_1)))
    return vertices @ A.T


def three_direction_mesh() -> DirectionSet:
    return validate([[1, 0, 1], [0, 1, 1]])


def random_frequencies(M: DirectionSet, count: int, rng: np.random.Generator,
                       max_phase: float = math.pi, min_phase: float = 0.0,
                       max_rounds: int = 200) -> np.ndarray:
    """
    Случайные частоты ω с min_phase <= |ω·m_j| < max_phase для всех j

    Returns:
        Массив (count, d)
    """
    A = M.matrix
    scale = max_phase / np.max(np.sum(np.abs(A), axis=0))
    accepted = []
    total = 0
    for _ in range(max_rounds):
        omega = rng.uniform(-scale, scale, size=(count, M.d))
        theta = np.abs(omega @ A)
        keep = np.all((theta >= min_phase) & (theta < max_phase), axis=1)
        accepted.append(omega[keep])
        total += int(np.count_nonzero(keep))
        if total >= count:
            break
    omega = np.concatenate(accepted, axis=0)[:count]
    if omega.shape[0] < count:
        raise ValueError(f"could only draw {omega.shape[0]} of {count} frequencies with the phase constraints")
    return omega

