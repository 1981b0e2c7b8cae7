"""
Main CLI module
Разбор аргументов, регистрация роутеров и запуск команды
"""
import argparse
import sys
from typing import Callable, Dict, List, Optional

from cxbox import __version__
from cxbox.config import DEFAULT_SEED, LOG_LEVEL, TAIL_BUDGET, THREADS
from cxbox.logging_config import get_logger, setup_logging

logger = get_logger(__name__)

COMMANDS = ('eval', 'sample', 'spectrum', 'mask', 'verify', 'decay')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--spec', required=True, help="problem spec JSON file")
    common.add_argument('--out', default=None, help="output file (default: stdout)")
    common.add_argument('--eps', type=float, default=None, help="truncation tolerance (default: spec eps)")
    common.add_argument('--seed', type=int, default=DEFAULT_SEED, help="random seed for sampled frequencies")
    common.add_argument('--log-level', default=None, help=f"log level (default: {LOG_LEVEL})")

    parser = argparse.ArgumentParser(
        prog='cxbox',
        description="Complex B-splines and complex box splines: evaluation, sampling, masks and checks",
    )
    parser.add_argument('--version', action='version', version=f"cxbox {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('eval', parents=[common], help="evaluate at points (CSV)")
    p.add_argument('--points', default=None, help="points file, one point per line")
    p.add_argument('--function', choices=('boxspline', 'truncated-power', 'normalized-power'), default='boxspline')
    p.add_argument('--sweep-im', default=None, metavar='START:STOP:COUNT',
                   help="sweep Im z over a range (single degree only)")

    for name, help_text in (('sample', "sample on a grid via inverse DFT"),
                            ('spectrum', "Fourier symbol on a centered grid (CSV)")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument('--omega-max', type=float, default=None)
        p.add_argument('--bins', type=int, default=None)
        if name == 'sample':
            p.add_argument('--format', choices=('binary', 'csv'), default='binary')
            p.add_argument('--tail-budget', type=float, default=TAIL_BUDGET,
                           help=f"largest neglected spectral energy fraction (default: {TAIL_BUDGET:g})")

    sub.add_parser('mask', parents=[common], help="two-scale mask (JSON)")

    p = sub.add_parser('verify', parents=[common], help="run verification suites (JSON report)")
    p.add_argument('--suite', choices=('convolution', 'pou', 'twoscale', 'derivative', 'fractional', 'all'),
                   default='all')
    p.add_argument('--mask', default=None, help="mask JSON written by 'cxbox mask'")
    p.add_argument('--xlsx', default=None, help="also write an Excel report")
    p.add_argument('--tol', action='append', default=None, metavar='NAME=VALUE', help="override a tolerance")

    p = sub.add_parser('decay', parents=[common], help="decay-rate fit (JSON)")
    p.add_argument('--rays', type=int, default=None)
    return parser


def register_routers() -> Dict[str, Callable]:
    """
    Собрать обработчики всех роутеров в таблицу команд
    """
    logger.debug("📝 Registering routers...")

    # ВАЖНО: Импортируем handler модули, чтобы декораторы @router выполнились
    from cxbox.handlers import analysis_router, evaluation_router
    import cxbox.handlers.analysis  # noqa: F401
    import cxbox.handlers.evaluation  # noqa: F401

    table: Dict[str, Callable] = {}
    for router in (evaluation_router, analysis_router):
        table.update(router.handlers)
    missing = [c for c in COMMANDS if c not in table]
    if missing:
        raise RuntimeError(f"commands without handlers: {missing}")

    logger.debug("✅ All routers registered successfully")
    return table


def run_cli(argv: Optional[List[str]] = None, stdout=None) -> int:
    """
    Точка входа: разбор аргументов, логирование, запуск команды

    Returns:
        Код завершения (0, 1, 2 или 3)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level)

    logger.info("=" * 60)
    logger.info(f"🚀 cxbox {__version__}: {args.command}")
    logger.debug(f"   🔧 Threads: {THREADS}, seed: {args.seed}")
    logger.info("=" * 60)

    handlers = register_routers()
    code = handlers[args.command](args, stdout or sys.stdout)
    logger.info(f"🛑 {args.command} finished with exit code {code}")
    return code


if __name__ == '__main__':
    sys.exit(run_cli())
