"""
Logging configuration module
Лог в файл с ротацией и короткий лог в stderr; stdout остаётся за
результатами команд (CSV, JSON, бинарные поля)
"""
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from cxbox.config import LOG_FILE, LOG_LEVEL, LOG_MAX_BYTES, LOG_BACKUP_COUNT

FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CONSOLE_FORMAT = '%(levelname)s %(name)s: %(message)s'


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def _file_handler(path: str) -> RotatingFileHandler:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    handler = RotatingFileHandler(path, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT, encoding='utf-8')
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    return handler


def _console_handler(level: int) -> logging.StreamHandler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    return handler


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """
    Настроить корневой логгер для запуска команды

    Файл получает всё, начиная с DEBUG (радиусы, индексы усечения, размеры
    сеток); консоль - только выбранный уровень. Предупреждения модуля
    warnings (SignConventionWarning, RuntimeWarning numpy) идут в тот же лог.

    Args:
        level: Уровень консоли (по умолчанию LOG_LEVEL)
        log_file: Путь к файлу логов (по умолчанию LOG_FILE, '' отключает файл)
    """
    level = level or LOG_LEVEL
    log_file = LOG_FILE if log_file is None else log_file

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(_console_handler(_level(level)))
    if log_file:
        root.addHandler(_file_handler(log_file))
        root.setLevel(logging.DEBUG)
    else:
        root.setLevel(_level(level))
    logging.captureWarnings(True)

    root.debug(f"📝 Logging configured: level={level}, file={log_file or '(disabled)'}")
    return root


def get_logger(name: str = __name__):
    """Получить логгер для модуля"""
    return logging.getLogger(name)
