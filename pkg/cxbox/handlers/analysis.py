"""
Analysis handlers module
Команды mask, verify, decay
"""
import json
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from cxbox.config import SUITE_DISPLAY
from cxbox.errors import SpecValidationError
from cxbox.handlers import analysis_router
from cxbox.logging_config import get_logger
from cxbox.reports import build_report, generate_excel_report, report_to_json
from cxbox.services import refinement, spectral, verification
from cxbox.storage import load_problem_spec, mask_from_json, mask_to_json, write_text

logger = get_logger(__name__)


def parse_tolerances(items: Optional[List[str]]) -> Dict[str, float]:
    """['pou=1e-5', ...] -> {'pou': 1e-5}"""
    overrides = {}
    for item in items or []:
        name, sep, value = item.partition('=')
        if not sep:
            raise SpecValidationError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise SpecValidationError(f"--tol {name}: {value!r} is not a number")
    return overrides


@analysis_router.command("mask")
def cmd_mask(args, stdout):
    """Маска масштабного соотношения в JSON"""
    spec = load_problem_spec(args.spec)
    eps = args.eps if args.eps is not None else spec.eps
    mask = refinement.compute_mask(spec.degrees, spec.directions, eps)
    logger.info(
        f"📊 Mask normalization {mask.normalization:.12g}, "
        f"closed-form constant {mask.closed_form_constant:.12g}, DC sum {mask.dc_sum():.12g}"
    )
    write_text(mask_to_json(mask) + "\n", args.out, stdout)
    return 0


@analysis_router.command("verify")
def cmd_verify(args, stdout):
    """Наборы проверок; код 1, если хотя бы одна не пройдена"""
    spec = load_problem_spec(args.spec)
    eps = args.eps if args.eps is not None else spec.eps
    overrides = parse_tolerances(args.tol)
    try:
        tolerances = verification.effective_tolerances(overrides, eps)
    except ValueError as e:
        raise SpecValidationError(str(e))

    mask = None
    if args.mask:
        try:
            text = Path(args.mask).read_text(encoding='utf-8')
        except OSError as e:
            raise SpecValidationError(f"cannot read mask file {args.mask}: {e}")
        mask = mask_from_json(text, spec.degrees, spec.directions, eps)
        logger.info(f"🔧 Using mask from {args.mask}: {len(mask)} coefficients")

    logger.info(f"🔍 Suite: {SUITE_DISPLAY.get(args.suite, args.suite)}, seed={args.seed}")
    results = verification.run_verification(
        spec.degrees, spec.directions, suite=args.suite, tolerances=overrides,
        seed=args.seed, eps=eps, mask=mask,
    )
    context = {
        'degrees': spec.degrees.to_json(),
        'directions': spec.directions.to_json(),
        'suite': args.suite,
        'seed': args.seed,
        'eps': eps,
    }
    report = build_report(results, tolerances, context)
    write_text(report_to_json(report), args.out, stdout)

    if args.xlsx:
        workbook = generate_excel_report(report)
        Path(args.xlsx).write_bytes(workbook.getvalue())
        logger.info(f"✅ Excel report written to {args.xlsx}")

    if not report['passed']:
        logger.error("❌ Verification failed")
        return 1
    logger.info("✅ All checks passed")
    return 0


@analysis_router.command("decay")
def cmd_decay(args, stdout):
    """Оценка скорости убывания символа и показатели гладкости"""
    spec = load_problem_spec(args.spec)
    rays = args.rays if args.rays is not None else spec.rays
    rng = np.random.default_rng(args.seed)
    report = spectral.estimate_decay(spec.degrees, spec.directions, ray_count=rays,
                                     omega_range=spec.omega_range, rng=rng)
    sobolev_sup, holder = spectral.smoothness_exponents(spec.degrees, spec.directions)
    data = report.to_json()
    data['sobolev_sup'] = sobolev_sup
    data['holder'] = None if holder is None else {'l': holder[0], 'gamma': holder[1]}
    write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", args.out, stdout)
    logger.info(f"✅ Decay report: alpha_est={report.alpha_est:.4f}")
    return 0
