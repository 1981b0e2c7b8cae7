"""
Configuration module for cxbox
Параметры берутся из переменных окружения (и файла .env, если он есть)
"""
import os
import sys
from dotenv import load_dotenv

# Загружаем переменные из .env файла
load_dotenv()


def _read_threads() -> int:
    """Прочитать CXBOX_THREADS; при ошибке вернуть 1 и сообщить в stderr"""
    raw = os.getenv('CXBOX_THREADS')
    if raw is None or not raw.strip():
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        print(f"⚠️  CXBOX_THREADS={raw!r} не является целым числом, используем 1", file=sys.stderr)
        return 1
    if value < 1:
        print(f"⚠️  CXBOX_THREADS={value} должно быть >= 1, используем 1", file=sys.stderr)
        return 1
    return value


# Ограничение числа потоков (workers для scipy.fft и пул вычисления точек)
THREADS: int = _read_threads()

# Seed генератора случайных чисел по умолчанию
DEFAULT_SEED = int(os.getenv('CXBOX_SEED', '0'))

# Logging Configuration
# Пустая строка отключает запись в файл
LOG_FILE = os.getenv('CXBOX_LOG_FILE', 'logs/cxbox.log')
LOG_LEVEL = os.getenv('CXBOX_LOG_LEVEL', 'INFO')
LOG_MAX_BYTES = 10 * 1024 * 1024  # 10MB
LOG_BACKUP_COUNT = 5

# Допуск по умолчанию для усечения биномиальных рядов
DEFAULT_EPS = 1e-10

# Наибольший индекс усечения биномиального ряда (при Re z около -1 хвост убывает медленно)
MAX_TRUNCATION_INDEX = int(os.getenv('CXBOX_MAX_TERMS', str(2 ** 18)))

# Допуски проверок по умолчанию (переопределяются флагами CLI)
DEFAULT_TOLERANCES = {
    'convolution_symbol': 1e-12,
    'convolution_time': 1e-6,
    'truncated_power_convolution': 1e-12,
    'difference_convolution': 1e-12,
    'bspline_via_difference': 1e-12,
    'pou': 1e-4,
    'pou_monotone': 0.0,
    'twoscale_integer': 1e-8,
    'twoscale_complex': 10 * DEFAULT_EPS,
    'mask_dc_sum': 10 * DEFAULT_EPS,
    'derivative_symbol': 1e-10,
    'mixed_derivative_ladder': 1e-10,
    'mixed_derivative_symbol': 1e-10,
    'derivative_finite_difference': 1e-5,
    'spline_equation_integer': 1e-10,
    'spline_equation_complex': 1e-6,
    'fractional_inverse': 1e-9,
    'fractional_semigroup': 1e-9,
    'riemann_liouville_caputo': 1e-6,
    'fractional_window': 0.0,
}

# Максимальный радиус для адаптивной проверки разбиения единицы
POU_RADIUS_CAP = 64

# Удвоение радиуса прекращается, когда невязка за два удвоения падает меньше чем в столько раз
POU_DECREASE_FACTOR = 10.0

# Невязка на уровне округления: дальше радиус не растёт
POU_NOISE_FLOOR = 1e-13

# Бюджет энергии хвоста спектра при сэмплировании
TAIL_BUDGET = 1e-6

# Сетка, подбираемая автоматически: запас справа от носителя, padding и предел числа узлов
SAMPLE_SPAN = 8.0
SAMPLE_PADDING = 2
MAX_GRID_NODES = 2 ** 20

# Suite Display Mapping
SUITE_DISPLAY = {
    'convolution': '🔗 Свёртка',
    'pou': '🧩 Разбиение единицы',
    'twoscale': '🔍 Масштабное соотношение',
    'derivative': '📐 Производные',
    'fractional': '🌀 Дробные операторы',
}

# Domain Display Mapping
DOMAIN_DISPLAY = {
    'time': '⏱ Пространственная область',
    'frequency': '📡 Частотная область',
}
