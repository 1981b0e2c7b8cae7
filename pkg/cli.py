#!/usr/bin/env python3
"""
cxbox - Entry Point

Точка входа для запуска командной строки
"""

if __name__ == '__main__':
    import sys
    from cxbox.main import run_cli
    sys.exit(run_cli())
