"""
Verification report generation
JSON отчёт по проверкам и Excel книга с листом на каждый набор
"""
import io
import json
from datetime import datetime
from typing import Any, Dict, Iterable, Optional

from cxbox.config import SUITE_DISPLAY
from cxbox.logging_config import get_logger
from cxbox.services.verification import CheckResult

logger = get_logger(__name__)

# Опциональный импорт openpyxl (после инициализации logger)
OPENPYXL_AVAILABLE = False

try:
    from openpyxl import Workbook
    from openpyxl.styles import Font, PatternFill
    OPENPYXL_AVAILABLE = True
    logger.debug("✅ openpyxl loaded successfully")
except ImportError as e:
    OPENPYXL_AVAILABLE = False
    logger.warning(f"⚠️ openpyxl not available, Excel export will be disabled: {e}")

PASS_FILL = "C6EFCE"
FAIL_FILL = "FFB3B3"
HEADER_FILL = "4472C4"


def build_report(results: Iterable[CheckResult], tolerances: Dict[str, float],
                 context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Собрать JSON-совместимый отчёт

    Args:
        results: Результаты проверок
        tolerances: Эффективные допуски (выводятся целиком)
        context: Описание задачи (степени, направления, seed)

    Returns:
        Dict: {'passed', 'checks', 'tolerances', 'context'}
    """
    checks = [r.to_json() for r in results]
    report = {
        'passed': all(c['passed'] for c in checks),
        'checks': checks,
        'tolerances': {k: float(v) for k, v in sorted(tolerances.items())},
    }
    if context:
        report['context'] = context
    failed = [c['name'] for c in checks if not c['passed']]
    if failed:
        logger.warning(f"⚠️ Failed checks: {failed}")
    logger.info(f"📊 Report built: {len(checks)} checks, passed={report['passed']}")
    return report


def report_to_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def generate_excel_report(report: Dict[str, Any]) -> io.BytesIO:
    """
    Excel книга: сводный лист и по листу на каждый набор проверок

    Returns:
        BytesIO объект с Excel файлом

    Raises:
        ImportError: Если openpyxl не установлен
    """
    if not OPENPYXL_AVAILABLE:
        raise ImportError("openpyxl не установлен. Установите его командой: pip install openpyxl")

    logger.info("📊 Generating Excel verification report")
    wb = Workbook()
    ws = wb.active
    ws.title = "Сводка"

    ws['A1'] = "Отчёт о проверках"
    ws['A1'].font = Font(size=16, bold=True)
    ws['A2'] = f"Дата создания: {datetime.now().strftime('%d.%m.%Y %H:%M')}"
    ws['A2'].font = Font(size=10, italic=True)

    checks = report.get('checks', [])
    if not checks:
        logger.warning("⚠️ No checks in the report")
        ws['A4'] = "Нет данных для отчёта"
        output = io.BytesIO()
        wb.save(output)
        output.seek(0)
        return output

    ws['A4'] = "Итог"
    ws['A4'].font = Font(size=14, bold=True, color="FFFFFF")
    ws['A4'].fill = PatternFill(start_color=HEADER_FILL, end_color=HEADER_FILL, fill_type="solid")
    ws['A5'] = "Всего проверок:"
    ws['B5'] = len(checks)
    ws['A6'] = "Не пройдено:"
    ws['B6'] = sum(1 for c in checks if not c['passed'])
    ws['B6'].font = Font(color="FF0000", bold=True)

    by_suite: Dict[str, list] = {}
    for check in checks:
        by_suite.setdefault(check['suite'], []).append(check)

    row = 8
    for suite, items in by_suite.items():
        ws[f'A{row}'] = SUITE_DISPLAY.get(suite, suite)
        ws[f'B{row}'] = f"{sum(1 for c in items if c['passed'])}/{len(items)}"
        row += 1

        # Лист набора
        sheet = wb.create_sheet(title=suite[:31])
        for col, title in zip("ABCD", ("Проверка", "Невязка", "Допуск", "Результат")):
            sheet[f'{col}1'] = title
            sheet[f'{col}1'].font = Font(bold=True)
            sheet[f'{col}1'].fill = PatternFill(start_color="D9E1F2", end_color="D9E1F2", fill_type="solid")
        for i, check in enumerate(items, start=2):
            sheet[f'A{i}'] = check['name']
            sheet[f'B{i}'] = check['residual']
            sheet[f'C{i}'] = check['tolerance']
            sheet[f'D{i}'] = "✅" if check['passed'] else "❌"
            color = PASS_FILL if check['passed'] else FAIL_FILL
            for col in "ABCD":
                sheet[f'{col}{i}'].fill = PatternFill(start_color=color, end_color=color, fill_type="solid")
            sheet[f'B{i}'].number_format = '0.000E+00'
            sheet[f'C{i}'].number_format = '0.0E+00'
        sheet.column_dimensions['A'].width = 32
        sheet.column_dimensions['B'].width = 14
        sheet.column_dimensions['C'].width = 12
        sheet.column_dimensions['D'].width = 12

    ws.column_dimensions['A'].width = 30
    ws.column_dimensions['B'].width = 15

    output = io.BytesIO()
    wb.save(output)
    output.seek(0)
    logger.info(f"✅ Excel report generated: {len(by_suite)} suite sheet(s)")
    return output
