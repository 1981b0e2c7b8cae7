import json

import pytest

from cxbox.reports import build_report, generate_excel_report, report_to_json
from cxbox.services.verification import CheckResult

RESULTS = [
    CheckResult('twoscale', 'twoscale_complex', 3.2e-8, 1e-6),
    CheckResult('twoscale', 'mask_dc_sum', 0.0, 1e-9),
    CheckResult('pou', 'pou', 5e-4, 1e-4),
]
TOLERANCES = {'twoscale_complex': 1e-6, 'pou': 1e-4, 'mask_dc_sum': 1e-9}


def test_report_passes_only_when_every_check_passes():
    assert not build_report(RESULTS, TOLERANCES)['passed']
    assert build_report(RESULTS[:2], TOLERANCES)['passed']
    assert build_report([], TOLERANCES)['passed']


def test_report_layout():
    report = build_report(RESULTS, TOLERANCES, context={'seed': 3})
    assert list(report['tolerances']) == ['mask_dc_sum', 'pou', 'twoscale_complex']
    assert report['context'] == {'seed': 3}
    assert [c['passed'] for c in report['checks']] == [True, True, False]
    assert 'context' not in build_report(RESULTS, TOLERANCES)


def test_report_json_is_deterministic():
    text = report_to_json(build_report(RESULTS, TOLERANCES))
    assert text == report_to_json(build_report(RESULTS, dict(reversed(list(TOLERANCES.items())))))
    assert json.loads(text)['checks'][2]['residual'] == 5e-4


def test_excel_report_sheets():
    openpyxl = pytest.importorskip('openpyxl')
    output = generate_excel_report(build_report(RESULTS, TOLERANCES))
    wb = openpyxl.load_workbook(output)
    assert wb.sheetnames == ['Сводка', 'twoscale', 'pou']
    summary = wb['Сводка']
    assert summary['B5'].value == 3
    assert summary['B6'].value == 1
    sheet = wb['pou']
    assert sheet['A2'].value == 'pou'
    assert sheet['D2'].value == '❌'


def test_excel_report_without_checks():
    openpyxl = pytest.importorskip('openpyxl')
    wb = openpyxl.load_workbook(generate_excel_report(build_report([], {})))
    assert wb.sheetnames == ['Сводка']
    assert wb['Сводка']['A4'].value == 'Нет данных для отчёта'
