"""
Evaluation handlers module
Команды eval, sample, spectrum: значения сплайнов в точках, сэмплы на сетке
и символ Фурье
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Tuple

import numpy as np

from cxbox.config import DOMAIN_DISPLAY, TAIL_BUDGET, THREADS
from cxbox.errors import SpecValidationError, UnsupportedRegimeError
from cxbox.handlers import evaluation_router
from cxbox.logging_config import get_logger
from cxbox.models import DegreeVector, FrequencyGrid, ProblemSpec
from cxbox.services import multivariate, spectral, univariate
from cxbox.storage import (
    field_to_bytes,
    field_to_csv,
    load_problem_spec,
    read_points,
    values_to_csv,
    write_field,
    write_text,
)

logger = get_logger(__name__)


def parse_sweep(text: str) -> np.ndarray:
    """'START:STOP:COUNT' -> np.linspace(START, STOP, COUNT)"""
    try:
        start, stop, count = text.split(':')
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise SpecValidationError(f"--sweep-im expects START:STOP:COUNT, got {text!r}")
    if values.size == 0:
        raise SpecValidationError("--sweep-im COUNT must be positive")
    return values


def _evaluator(function: str, zv: DegreeVector, spec: ProblemSpec) -> Callable[[np.ndarray], np.ndarray]:
    M = spec.directions
    if function == 'boxspline':
        return lambda pts: np.atleast_1d(multivariate.boxspline_eval(zv, M, pts))
    if function == 'normalized-power':
        return lambda pts: np.atleast_1d(multivariate.truncated_power_eval_invertible(zv, M, pts))
    if function == 'truncated-power':
        if M.d != 1 or M.n_plus_1 != 1:
            raise UnsupportedRegimeError("the unnormalized truncated power is evaluated for d = 1 and a single direction")
        m = M.columns[0][0]
        return lambda pts: univariate.truncated_power_eval(zv[0], pts[:, 0] / m) / abs(m)
    raise SpecValidationError(f"unknown function {function!r}")


def evaluate_points(evaluate: Callable[[np.ndarray], np.ndarray], points: np.ndarray,
                    threads: int = THREADS) -> np.ndarray:
    """Вычислить значения по блокам точек в пуле потоков; порядок сохраняется"""
    if points.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    chunks = [c for c in np.array_split(points, max(1, min(threads, points.shape[0]))) if c.shape[0]]
    if len(chunks) == 1:
        return np.asarray(evaluate(chunks[0]), dtype=complex)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(evaluate, chunks))
    return np.concatenate([np.asarray(p, dtype=complex) for p in parts])


def _points(args, spec: ProblemSpec) -> np.ndarray:
    d = spec.directions.d
    if args.points:
        return read_points(args.points, d)
    if spec.points is not None:
        return np.asarray(spec.points, dtype=float).reshape(-1, d)
    raise SpecValidationError("no points given: use --points or the spec's 'points' entry")


@evaluation_router.command("eval")
def cmd_eval(args, stdout):
    """Значения в точках: CSV x0..x{d-1},re,im (или gamma,x0,re,im для развёртки)"""
    spec = load_problem_spec(args.spec)
    points = _points(args, spec)
    function = args.function
    logger.info(f"🔍 Evaluating {function} at {points.shape[0]} point(s), z={list(spec.degrees)}")

    if args.sweep_im:
        if len(spec.degrees) != 1:
            raise SpecValidationError("--sweep-im needs a single degree")
        gammas = parse_sweep(args.sweep_im)
        rows, values = [], []
        base = spec.degrees[0].real
        for gamma in gammas:
            zv = DegreeVector((complex(base, gamma),))
            out = evaluate_points(_evaluator(function, zv, spec), points)
            rows.extend(np.concatenate([[gamma], p]) for p in points)
            values.extend(out)
        names = ['gamma'] + [f"x{j}" for j in range(spec.directions.d)]
        text = values_to_csv(np.array(rows).reshape(-1, len(names)), np.array(values, dtype=complex), 'eval', names)
    else:
        values = evaluate_points(_evaluator(function, spec.degrees, spec), points)
        names = [f"x{j}" for j in range(spec.directions.d)]
        text = values_to_csv(points, values, 'eval', names)

    write_text(text, args.out, stdout)
    logger.info("✅ Evaluation complete")
    return 0


def _grid(args, spec: ProblemSpec, tail_budget: float) -> Tuple[FrequencyGrid, bool]:
    """
    Сетка из описания задачи и флагов --bins/--omega-max

    Недостающие параметры подбираются spectral.plan_grid по бюджету хвоста.

    Returns:
        (сетка, True если Ω_max подобрано по бюджету хвоста)
    """
    d = spec.directions.d
    base: Optional[FrequencyGrid] = spec.grid
    bins = (int(args.bins),) * d if args.bins is not None else (base.bins if base is not None else None)
    omega_max = (float(args.omega_max),) * d if args.omega_max is not None else (
        base.omega_max if base is not None else None)
    if bins is None or omega_max is None:
        grid = spectral.plan_grid(spec.degrees, spec.directions, tail_budget, bins=bins, omega_max=omega_max)
        return grid, omega_max is None
    origin = base.origin if base is not None else (0.0,) * d
    padding = base.padding if base is not None else 1
    return FrequencyGrid(bins, omega_max, origin, padding), False


@evaluation_router.command("sample")
def cmd_sample(args, stdout):
    """Сэмплы ℬ_z на сетке через обратное ДПФ символа"""
    spec = load_problem_spec(args.spec)
    if not args.tail_budget > 0:
        raise SpecValidationError(f"--tail-budget must be positive, got {args.tail_budget}")
    grid, planned = _grid(args, spec, args.tail_budget)
    logger.info(f"{DOMAIN_DISPLAY['time']}: sampling on {grid.bins} nodes, omega_max={grid.omega_max}, padding={grid.padding}")
    # подобранная сетка уже укладывается в бюджет
    budget = None if planned else args.tail_budget
    field = spectral.boxspline_sample(spec.degrees, spec.directions, grid, tail_budget=budget)

    if args.format == 'csv':
        write_text(field_to_csv(field), args.out, stdout)
    elif args.out:
        write_field(field, args.out)
    else:
        stdout.flush()
        stdout.buffer.write(field_to_bytes(field))
    logger.info(f"✅ Sampled field {field.extents} ready")
    return 0


@evaluation_router.command("spectrum")
def cmd_spectrum(args, stdout):
    """Символ ℬ̂_z(ω|M) на центрированной сетке: CSV w0..w{d-1},re,im"""
    spec = load_problem_spec(args.spec)
    grid, _ = _grid(args, spec, TAIL_BUDGET)
    M = spec.directions
    logger.info(f"{DOMAIN_DISPLAY['frequency']}: {grid.bins} bins, omega_max={grid.omega_max}")
    field = spectral.symbol_on_grid(
        lambda omega: multivariate.boxspline_symbol(spec.degrees, M, omega),
        grid.bins,
        grid.omega_max,
    )
    coordinates = field.coordinates().reshape(-1, M.d)
    text = values_to_csv(coordinates, field.values.reshape(-1), 'spectrum', [f"w{j}" for j in range(M.d)])
    write_text(text, args.out, stdout)
    logger.info(f"✅ Spectrum with {coordinates.shape[0]} values written")
    return 0
