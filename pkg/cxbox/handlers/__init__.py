"""
Handler modules for cxbox CLI commands
"""
import functools
from typing import Callable, Dict

from cxbox.errors import CxboxError
from cxbox.logging_config import get_logger

logger = get_logger(__name__)


class Router:
    """
    Набор обработчиков команд

    Обработчик получает argparse.Namespace и поток вывода и возвращает код
    завершения. Ошибки CxboxError превращаются в их exit_code.
    """

    def __init__(self, name: str):
        self.name = name
        self.handlers: Dict[str, Callable] = {}

    def command(self, name: str):
        def decorator(handler: Callable) -> Callable:
            @functools.wraps(handler)
            def wrapper(args, stdout) -> int:
                try:
                    return int(handler(args, stdout) or 0)
                except CxboxError as e:
                    logger.error(f"❌ {name}: {type(e).__name__}: {e}")
                    return e.exit_code
                except Exception as e:
                    logger.error(f"❌ Unexpected error in {name}: {e}", exc_info=True)
                    return 1

            if name in self.handlers:
                raise ValueError(f"command {name!r} is already registered on router {self.name!r}")
            self.handlers[name] = wrapper
            logger.debug(f"🔧 [{self.name}] registered command {name}")
            return wrapper
        return decorator


# Создаем роутеры для разных групп обработчиков
evaluation_router = Router('evaluation')
analysis_router = Router('analysis')

__all__ = [
    'Router',
    'evaluation_router',
    'analysis_router',
]
