"""
Запуск через python -m cxbox
"""
import sys

from cxbox.main import run_cli

sys.exit(run_cli())
