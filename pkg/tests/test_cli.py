import io
import json
import math

import numpy as np
import pytest

from cxbox.main import run_cli
from cxbox.services.directions import validate
from cxbox.services.multivariate import boxspline_eval_invertible
from cxbox.services.spectral import choose_omega_max
from cxbox.storage import field_from_bytes, read_field

HAAR = {'degrees': [0], 'directions': {'d': 1, 'columns': [[1]]}}
HAT_2D = {'degrees': [1, 1], 'directions': {'d': 2, 'columns': [[1, 0], [0, 1]]}}
FIG3 = {
    'degrees': [[3, 1], [2, 1]],
    'directions': {'d': 2, 'columns': [[2, 0], [0, 3]]},
    'points': [[1.0, 1.5], [2.5, 4.0], [0.3, 5.9]],
}


def run(*argv):
    out = io.StringIO()
    code = run_cli(list(argv), stdout=out)
    return code, out.getvalue()


def csv_rows(text):
    lines = text.splitlines()
    return lines[0], lines[1], [[float(c) for c in line.split(',')] for line in lines[2:]]


def test_mask_for_haar(write_spec):
    code, text = run('mask', '--spec', write_spec(HAAR))
    assert code == 0
    assert json.loads(text) == [{'k': [0], 're': 1.0, 'im': 0.0}, {'k': [1], 're': 1.0, 'im': 0.0}]


def test_mask_output_is_deterministic(write_spec):
    spec = write_spec({'degrees': [[0.5, 0.5]], 'directions': {'d': 1, 'columns': [[1]]}})
    assert run('mask', '--spec', spec, '--eps', '1e-6') == run('mask', '--spec', spec, '--eps', '1e-6')


def test_eval_matches_closed_form(write_spec):
    code, text = run('eval', '--spec', write_spec(FIG3))
    assert code == 0
    header, names, rows = csv_rows(text)
    assert header == '# cxbox-eval v1'
    assert names == 'x0,x1,re,im'
    rows = np.array(rows)
    expected = boxspline_eval_invertible((3 + 1j, 2 + 1j), validate(np.diag([2.0, 3.0])), FIG3['points'])
    np.testing.assert_allclose(rows[:, 2] + 1j * rows[:, 3], expected, rtol=1e-13, atol=1e-15)


def test_eval_with_points_file(write_spec, tmp_path):
    points = tmp_path / 'points.txt'
    points.write_text('0.5 0.5\n1.0, 1.0\n', encoding='utf-8')
    out = tmp_path / 'values.csv'
    code, text = run('eval', '--spec', write_spec(HAT_2D), '--points', str(points), '--out', str(out))
    assert code == 0
    assert text == ''
    _, _, rows = csv_rows(out.read_text(encoding='utf-8'))
    assert rows[0][2] == pytest.approx(0.25)
    assert rows[1][2] == pytest.approx(1.0)


def test_eval_with_empty_points_file(write_spec, tmp_path):
    points = tmp_path / 'points.txt'
    points.write_text('', encoding='utf-8')
    code, text = run('eval', '--spec', write_spec(HAT_2D), '--points', str(points))
    assert code == 0
    assert text.splitlines() == ['# cxbox-eval v1', 'x0,x1,re,im']


def test_eval_needs_points(write_spec):
    code, _ = run('eval', '--spec', write_spec(HAT_2D))
    assert code == 2


def test_eval_sweep_over_imaginary_part(write_spec, tmp_path):
    spec = write_spec({'degrees': [1.5], 'directions': {'d': 1, 'columns': [[1]]}, 'points': [[0.5], [1.5]]})
    code, text = run('eval', '--spec', spec, '--sweep-im', '0:1:3')
    assert code == 0
    _, names, rows = csv_rows(text)
    assert names == 'gamma,x0,re,im'
    assert [r[0] for r in rows] == [0.0, 0.0, 0.5, 0.5, 1.0, 1.0]
    assert [r[1] for r in rows] == [0.5, 1.5] * 3
    assert abs(rows[0][3]) < 1e-14


def test_eval_bad_sweep(write_spec):
    spec = write_spec({'degrees': [1.5], 'directions': {'d': 1, 'columns': [[1]]}, 'points': [[0.5]]})
    code, _ = run('eval', '--spec', spec, '--sweep-im', '0:1')
    assert code == 2


def test_eval_normalized_power(write_spec):
    spec = write_spec({'degrees': [1, 2], 'directions': {'d': 2, 'columns': [[2, 0], [0, 3]]}, 'points': [[2, 3]]})
    code, text = run('eval', '--spec', spec, '--function', 'normalized-power')
    assert code == 0
    _, _, rows = csv_rows(text)
    assert rows[0][2] == pytest.approx(0.5 / 6)


def test_unnormalized_power_needs_one_direction(write_spec):
    code, _ = run('eval', '--spec', write_spec({**HAT_2D, 'points': [[1, 1]]}), '--function', 'truncated-power')
    assert code == 3


def test_unsupported_degree_exit_code(write_spec):
    spec = write_spec({'degrees': [[-0.5, 1], 1], 'directions': HAT_2D['directions'], 'points': [[0.5, 0.5]]})
    code, _ = run('eval', '--spec', spec)
    assert code == 3


@pytest.mark.parametrize("data", [
    {'degrees': [1, 1]},
    {'degrees': [1, 1], 'directions': {'d': 2, 'columns': [[1, 0], [2, 0]]}},
])
def test_invalid_spec_exit_code(data, write_spec):
    code, _ = run('mask', '--spec', write_spec(data))
    assert code == 2


def test_missing_spec_file(tmp_path):
    code, _ = run('mask', '--spec', str(tmp_path / 'missing.json'))
    assert code == 2


def test_spec_flag_is_required():
    with pytest.raises(SystemExit):
        run_cli(['mask'], stdout=io.StringIO())


def test_sample_to_file(write_spec, tmp_path):
    spec = write_spec({**HAAR, 'degrees': [1], 'grid': {'bins': 256, 'omega_max': 64 * math.pi}})
    out = tmp_path / 'field.bin'
    code, _ = run('sample', '--spec', spec, '--out', str(out))
    assert code == 0
    field = read_field(out)
    assert field.domain_tag == 'time'
    assert field.extents == (256,)
    assert field.spacing == pytest.approx((1 / 64,))
    x = field.axis(0)
    index = int(np.argmin(np.abs(x - 0.5)))
    assert field.values[index].real == pytest.approx(0.5, abs=1e-4)


def test_sample_binary_to_stdout(write_spec):
    spec = write_spec({**HAAR, 'degrees': [1]})
    stdout = io.TextIOWrapper(io.BytesIO(), encoding='utf-8')
    code = run_cli(['sample', '--spec', spec, '--bins', '32', '--omega-max', '100'], stdout=stdout)
    stdout.flush()
    assert code == 0
    field = field_from_bytes(stdout.buffer.getvalue())
    assert field.extents == (32,)


def test_sample_csv(write_spec):
    spec = write_spec({**HAAR, 'degrees': [1]})
    code, text = run('sample', '--spec', spec, '--bins', '16', '--omega-max', '200', '--format', 'csv')
    assert code == 0
    lines = text.splitlines()
    assert lines[:2] == ['# cxbox-field v1', 'i0,re,im']
    assert len(lines) == 2 + 16


def test_sample_plans_grid_from_tail_budget(write_spec, tmp_path):
    spec = write_spec({**HAAR, 'degrees': [1]})
    out = tmp_path / 'field.bin'
    code, _ = run('sample', '--spec', spec, '--out', str(out))
    assert code == 0
    field = read_field(out)
    n = field.extents[0]
    assert n & (n - 1) == 0
    assert field.spacing[0] == pytest.approx(math.pi / choose_omega_max(1.0, 1e-6, 1))
    assert field.origin == (-1.0,)
    assert n * field.spacing[0] >= 10.0
    x = field.axis(0)
    assert np.interp(0.5, x, field.values.real) == pytest.approx(0.5, abs=2e-2)


def test_sample_bins_only_keeps_bins(write_spec):
    code, text = run('sample', '--spec', write_spec({**HAAR, 'degrees': [1]}), '--bins', '16', '--format', 'csv')
    assert code == 0
    assert len(text.splitlines()) == 2 + 16


def test_sample_default_budget_rejects_coarse_grid(write_spec):
    spec = write_spec({**HAAR, 'degrees': [1]})
    code, _ = run('sample', '--spec', spec, '--bins', '16', '--omega-max', '20', '--format', 'csv')
    assert code == 1
    code, _ = run('sample', '--spec', spec, '--bins', '16', '--omega-max', '20', '--format', 'csv',
                  '--tail-budget', '1e-3')
    assert code == 0


@pytest.mark.parametrize("budget", ['0', '-0.5'])
def test_sample_tail_budget_must_be_positive(budget, write_spec):
    code, _ = run('sample', '--spec', write_spec({**HAAR, 'degrees': [1]}), '--bins', '16',
                  '--omega-max', '200', '--tail-budget', budget)
    assert code == 2


def test_sample_below_half_has_no_grid(write_spec):
    spec = write_spec({'degrees': [[-0.6, 0.2]], 'directions': HAAR['directions']})
    code, _ = run('sample', '--spec', spec, '--format', 'csv')
    assert code == 1


def test_sample_tail_budget(write_spec):
    spec = write_spec({'degrees': [[0.1, 1]], 'directions': HAAR['directions']})
    code, _ = run('sample', '--spec', spec, '--bins', '64', '--omega-max', str(8 * math.pi),
                  '--format', 'csv', '--tail-budget', '1e-6')
    assert code == 1


def test_spectrum(write_spec):
    code, text = run('spectrum', '--spec', write_spec(HAT_2D), '--bins', '8', '--omega-max', '10')
    assert code == 0
    header, names, rows = csv_rows(text)
    assert header == '# cxbox-spectrum v1'
    assert names == 'w0,w1,re,im'
    assert len(rows) == 64
    origin = [r for r in rows if r[0] == 0.0 and r[1] == 0.0]
    assert origin == [[0.0, 0.0, 1.0, 0.0]]


def test_verify_twoscale_passes(write_spec, tmp_path):
    out = tmp_path / 'report.json'
    code, _ = run('verify', '--spec', write_spec(HAT_2D), '--suite', 'twoscale', '--seed', '5', '--out', str(out))
    assert code == 0
    report = json.loads(out.read_text(encoding='utf-8'))
    assert report['passed']
    assert [c['name'] for c in report['checks']] == ['twoscale_integer', 'mask_dc_sum']
    assert report['context']['seed'] == 5
    assert report['tolerances']['pou'] == 1e-4


def test_verify_twoscale_tolerance_follows_eps(write_spec):
    code, text = run('verify', '--spec', write_spec(HAT_2D), '--suite', 'twoscale', '--eps', '1e-8')
    assert code == 0
    assert json.loads(text)['tolerances']['twoscale_complex'] == pytest.approx(1e-7)


def test_verify_fractional_near_minus_one(write_spec):
    spec = write_spec({'degrees': [[-0.5, 0.3]], 'directions': HAAR['directions']})
    code, text = run('verify', '--spec', spec, '--suite', 'fractional', '--seed', '2')
    assert code in (0, 1)
    names = [c['name'] for c in json.loads(text)['checks']]
    assert names == ['spline_equation_complex', 'fractional_inverse', 'fractional_semigroup',
                     'riemann_liouville_caputo', 'fractional_window']


def test_verify_failure_exit_code(write_spec):
    code, text = run('verify', '--spec', write_spec(HAT_2D), '--suite', 'twoscale', '--tol', 'mask_dc_sum=-1')
    assert code == 1
    report = json.loads(text)
    assert not report['passed']
    assert report['tolerances']['mask_dc_sum'] == -1.0


@pytest.mark.parametrize("tol", ['no_such_check=1', 'pou', 'pou=abc'])
def test_verify_bad_tolerance(tol, write_spec):
    code, _ = run('verify', '--spec', write_spec(HAT_2D), '--suite', 'twoscale', '--tol', tol)
    assert code == 2


def test_verify_with_mask_file(write_spec, tmp_path):
    spec = write_spec({'degrees': [[0.5, 0.5], 1], 'directions': HAT_2D['directions']})
    mask = tmp_path / 'mask.json'
    assert run('mask', '--spec', spec, '--out', str(mask))[0] == 0
    code, text = run('verify', '--spec', spec, '--suite', 'twoscale', '--mask', str(mask))
    assert code == 0
    names = [c['name'] for c in json.loads(text)['checks']]
    assert names == ['twoscale_complex', 'mask_dc_sum']


def test_verify_excel_report(write_spec, tmp_path):
    openpyxl = pytest.importorskip('openpyxl')
    xlsx = tmp_path / 'report.xlsx'
    code, _ = run('verify', '--spec', write_spec(HAAR), '--suite', 'twoscale', '--xlsx', str(xlsx))
    assert code == 0
    assert openpyxl.load_workbook(xlsx).sheetnames == ['Сводка', 'twoscale']


def test_verify_runs_are_deterministic(write_spec):
    spec = write_spec({'degrees': [[1.5, 0.5]], 'directions': HAAR['directions']})
    first = json.loads(run('verify', '--spec', spec, '--suite', 'derivative', '--seed', '3')[1])
    second = json.loads(run('verify', '--spec', spec, '--suite', 'derivative', '--seed', '3')[1])
    assert first['checks'] == second['checks']


def test_decay_report(write_spec):
    code, text = run('decay', '--spec', write_spec(HAT_2D), '--rays', '2')
    assert code == 0
    data = json.loads(text)
    assert data['alpha_theory'] == pytest.approx(1.0)
    assert data['sobolev_sup'] == pytest.approx(1.5)
    assert data['holder'] == {'l': 0, 'gamma': pytest.approx(0.5)}
    assert len(data['rays']) == 2


def test_decay_out_of_scope(write_spec):
    spec = write_spec({'degrees': [1, 1], 'directions': {'d': 2, 'columns': [[1, 1], [0, 1]]}})
    code, _ = run('decay', '--spec', spec)
    assert code == 3
