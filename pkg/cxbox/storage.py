"""
Storage module
Чтение описаний задач и запись результатов: бинарные поля, CSV, JSON маски
"""
import io
import json
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from cxbox.errors import SpecValidationError
from cxbox.logging_config import get_logger
from cxbox.models import DegreeVector, FrequencyGrid, MaskCoefficients, ProblemSpec, SampledField
from cxbox.services.directions import DirectionSet, from_json

logger = get_logger(__name__)

FIELD_FORMAT_VERSION = 1
FIELD_DTYPE = np.dtype('<c16')  # f64 re, f64 im, little-endian


def format_float(x: float) -> str:
    """Кратчайшее представление, восстанавливающее то же f64"""
    return repr(float(x))


def _parse_grid(data: dict, d: int) -> FrequencyGrid:
    def per_axis(value, name, cast):
        if value is None:
            raise SpecValidationError(f"grid.{name} is required")
        if np.isscalar(value):
            return tuple(cast(value) for _ in range(d))
        if len(value) != d:
            raise SpecValidationError(f"grid.{name} must have {d} entries")
        return tuple(cast(v) for v in value)

    return FrequencyGrid(
        bins=per_axis(data.get('bins'), 'bins', int),
        omega_max=per_axis(data.get('omega_max'), 'omega_max', float),
        origin=per_axis(data.get('origin', 0.0), 'origin', float),
        padding=int(data.get('padding', 1)),
    )


def parse_problem_spec(data: dict) -> ProblemSpec:
    """
    Разобрать описание задачи

    {"degrees": [[3, 1], [2, 1]], "directions": {"d": 2, "columns": [[2, 0], [0, 3]]},
     "grid": {"omega_max": 50.27, "bins": 128, "origin": 0, "padding": 8},
     "eps": 1e-10, "radius": 8, "rays": 6, "omega_range": [100, 10000]}

    Raises:
        SpecValidationError: некорректное описание
    """
    if not isinstance(data, dict):
        raise SpecValidationError("problem spec must be a JSON object")
    if 'degrees' not in data or 'directions' not in data:
        raise SpecValidationError("problem spec needs 'degrees' and 'directions'")
    try:
        degrees = DegreeVector.of(data['degrees'])
    except (TypeError, ValueError) as e:
        raise SpecValidationError(f"invalid degrees: {e}")
    directions = from_json(data['directions'])
    if len(degrees) != directions.n_plus_1:
        raise SpecValidationError(
            f"{len(degrees)} degrees given for {directions.n_plus_1} direction columns")

    grid = _parse_grid(data['grid'], directions.d) if data.get('grid') else None
    eps = float(data.get('eps', 1e-10))
    if eps <= 0:
        raise SpecValidationError("eps must be positive")
    omega_range = tuple(float(v) for v in data.get('omega_range', (1e2, 1e4)))
    if len(omega_range) != 2 or not 0 < omega_range[0] < omega_range[1]:
        raise SpecValidationError("omega_range must be [low, high] with 0 < low < high")
    return ProblemSpec(
        degrees=degrees,
        directions=directions,
        grid=grid,
        eps=eps,
        radius=int(data['radius']) if data.get('radius') is not None else None,
        rays=int(data.get('rays', 6)),
        omega_range=omega_range,
        points=data.get('points'),
    )


def load_problem_spec(path: Union[str, Path]) -> ProblemSpec:
    """Прочитать описание задачи из JSON файла"""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise SpecValidationError(f"cannot read spec file {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecValidationError(f"spec file {path} is not valid JSON: {e}")
    spec = parse_problem_spec(data)
    logger.debug(f"🔍 [load_problem_spec] {path}: z={list(spec.degrees)}, d={spec.directions.d}")
    return spec


def problem_spec_to_json(spec: ProblemSpec) -> dict:
    data = {
        'degrees': spec.degrees.to_json(),
        'directions': spec.directions.to_json(),
        'eps': spec.eps,
        'rays': spec.rays,
        'omega_range': list(spec.omega_range),
    }
    if spec.grid is not None:
        data['grid'] = {
            'bins': list(spec.grid.bins),
            'omega_max': list(spec.grid.omega_max),
            'origin': list(spec.grid.origin),
            'padding': spec.grid.padding,
        }
    if spec.radius is not None:
        data['radius'] = spec.radius
    return data


def field_header(field: SampledField) -> dict:
    return {
        'format': 'cxbox-field',
        'version': FIELD_FORMAT_VERSION,
        'domain_tag': field.domain_tag,
        'origin': [float(v) for v in field.origin],
        'spacing': [float(v) for v in field.spacing],
        'extents': list(field.extents),
    }


def field_to_bytes(field: SampledField) -> bytes:
    """Строка JSON-заголовка и затем отсчёты (re, im) little-endian f64, row-major"""
    header = json.dumps(field_header(field), sort_keys=True).encode('utf-8') + b'\n'
    return header + np.ascontiguousarray(field.values, dtype=FIELD_DTYPE).tobytes()


def field_from_bytes(raw: bytes) -> SampledField:
    newline = raw.find(b'\n')
    if newline < 0:
        raise SpecValidationError("field file has no header line")
    try:
        header = json.loads(raw[:newline].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SpecValidationError(f"field header is not valid JSON: {e}")
    if header.get('format') != 'cxbox-field' or header.get('version') != FIELD_FORMAT_VERSION:
        raise SpecValidationError(f"unsupported field format {header.get('format')!r} v{header.get('version')}")
    extents = tuple(int(n) for n in header['extents'])
    payload = raw[newline + 1:]
    expected = int(np.prod(extents)) * FIELD_DTYPE.itemsize
    if len(payload) != expected:
        raise SpecValidationError(f"field payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=FIELD_DTYPE).astype(complex).reshape(extents)
    return SampledField(header['domain_tag'], tuple(header['origin']), tuple(header['spacing']), values)


def write_field(field: SampledField, path: Union[str, Path]):
    Path(path).write_bytes(field_to_bytes(field))
    logger.info(f"✅ Field {field.extents} written to {path}")


def read_field(path: Union[str, Path]) -> SampledField:
    return field_from_bytes(Path(path).read_bytes())


def field_to_csv(field: SampledField) -> str:
    """CSV: индексы узла, re, im"""
    out = io.StringIO()
    out.write("# cxbox-field v1\n")
    out.write(",".join([f"i{j}" for j in range(field.ndim)] + ['re', 'im']) + "\n")
    for index in np.ndindex(*field.extents):
        v = complex(field.values[index])
        out.write(",".join([str(i) for i in index] + [format_float(v.real), format_float(v.imag)]) + "\n")
    return out.getvalue()


def values_to_csv(coordinates: np.ndarray, values: np.ndarray, kind: str, names: Sequence[str]) -> str:
    """CSV строк (координаты..., re, im) с версионированным заголовком"""
    out = io.StringIO()
    out.write(f"# cxbox-{kind} v1\n")
    out.write(",".join(list(names) + ['re', 'im']) + "\n")
    for row, v in zip(coordinates, values):
        v = complex(v)
        cells = [format_float(c) for c in np.atleast_1d(row)] + [format_float(v.real), format_float(v.imag)]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def read_points(path: Union[str, Path], d: int) -> np.ndarray:
    """
    Точки из текстового файла: по одной на строке, координаты через запятую
    или пробел; строки с '#' пропускаются. Пустой файл даёт массив (0, d).
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise SpecValidationError(f"cannot read points file {path}: {e}")
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            row = [float(v) for v in line.replace(',', ' ').split()]
        except ValueError:
            raise SpecValidationError(f"{path}:{number}: not a list of numbers")
        if len(row) != d:
            raise SpecValidationError(f"{path}:{number}: expected {d} coordinates, got {len(row)}")
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, d)


def mask_to_json(mask: MaskCoefficients) -> str:
    """JSON массив {"k": [...], "re": ..., "im": ...}, ключи по возрастанию"""
    order = np.lexsort(mask.keys.T[::-1]) if len(mask) else np.zeros(0, dtype=int)
    entries = [
        {'k': [int(v) for v in mask.keys[i]], 're': float(mask.values[i].real), 'im': float(mask.values[i].imag)}
        for i in order
    ]
    return json.dumps(entries)


def mask_from_json(text: str, degrees, directions: DirectionSet, eps: Optional[float] = None) -> MaskCoefficients:
    """
    Прочитать маску, записанную mask_to_json

    Raises:
        SpecValidationError: неверная структура или размерность ключей
    """
    try:
        entries = json.loads(text)
        keys = np.array([e['k'] for e in entries], dtype=np.int64).reshape(-1, directions.d)
        values = np.array([complex(e['re'], e['im']) for e in entries], dtype=complex)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise SpecValidationError(f"invalid mask JSON: {e}")
    degrees = DegreeVector.of(degrees)
    return MaskCoefficients(
        keys=keys,
        values=values,
        eps=float('nan') if eps is None else float(eps),
        degrees=degrees,
        directions=directions,
        normalization=1.0,
        closed_form_constant=complex(2.0 ** (directions.d - sum(z + 1.0 for z in degrees))),
    )


def write_text(text: str, path: Optional[Union[str, Path]], stream=None):
    """Записать текст в файл или в поток (stdout)"""
    if path:
        Path(path).write_text(text, encoding='utf-8')
        logger.debug(f"🔍 [write_text] {len(text)} characters written to {path}")
    else:
        stream.write(text)


__all__ = [
    'field_from_bytes',
    'field_to_bytes',
    'field_to_csv',
    'format_float',
    'load_problem_spec',
    'mask_from_json',
    'mask_to_json',
    'parse_problem_spec',
    'read_field',
    'read_points',
    'values_to_csv',
    'write_field',
    'write_text',
]
