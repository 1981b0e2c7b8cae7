"""
Error hierarchy
Все ошибки библиотеки наследуют CxboxError и несут код завершения CLI
"""


class CxboxError(Exception):
    """Базовая ошибка cxbox (код завершения 1)"""
    exit_code = 1


class SpecValidationError(CxboxError):
    """Некорректное описание задачи: JSON, длины, матрица направлений"""
    exit_code = 2


class DirectionSetError(SpecValidationError):
    """Нулевой столбец, неполный ранг, неквадратная матрица"""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


class UnsupportedRegimeError(CxboxError):
    """Операция не определена в запрошенном режиме параметров (код 3)"""
    exit_code = 3


class ScopeError(UnsupportedRegimeError):
    """Анализ поддерживается только для диагональной матрицы M"""


class OrthogonalFrequencyError(UnsupportedRegimeError):
    """Полюс символа: ω·m_j = 0"""


class WindowViolationError(UnsupportedRegimeError):
    """Спектр поля не обращается в ноль внутри окна Лизоркина"""


class NumericalError(CxboxError):
    """Численная ошибка"""


class GammaPoleError(NumericalError):
    """Полюс гамма-функции в неположительном целом"""


class DivergentSeriesError(NumericalError):
    """Биномиальный ряд расходится при Re(z) <= -1"""


class TruncationLimitError(NumericalError):
    """Для достижения допуска хвоста нужно больше членов ряда, чем разрешено"""

    def __init__(self, message: str, limit: int):
        super().__init__(message)
        self.limit = limit


class QuadratureError(NumericalError):
    """Квадратура не сошлась"""


class TailBudgetExceededError(NumericalError):
    """Энергия отброшенного хвоста спектра превышает бюджет"""

    def __init__(self, message: str, tail_fraction: float):
        super().__init__(message)
        self.tail_fraction = tail_fraction


class NotSquareError(UnsupportedRegimeError):
    """Требуется квадратная обратимая матрица направлений"""


class InvalidReducedDirectionsError(UnsupportedRegimeError):
    """После удаления последнего столбца набор направлений вырождается"""


class NonIntegerColumnsError(SpecValidationError):
    """Масштабное соотношение требует целочисленных столбцов M"""
