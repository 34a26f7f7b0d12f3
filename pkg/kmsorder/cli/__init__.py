# Copyright (c) 2026 The kmsorder authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import logging
import math
from typing import (
    List,
    Optional,
    Tuple,
    Union,
)

import click
import numpy as np

from .main import main
from .utils import (
    CommandRun,
    load_run_config,
    output_directory,
    run_ordered,
    sweep_cells,
    sweep_header,
)
from ..config_reader import (
    RunConfig,
    evolution_spec_from_config,
    field_from_config,
    initial_state_from_config,
    model_from_config,
    protocol_from_config,
    sweep_points,
)
from ..correlations import (
    detailed_balance_check,
    kms_time_domain_check,
)
from ..errors import (
    ConvergenceError,
    InsufficientPointsError,
)
from ..geometry import (
    GeometryReport,
    entropy_positivity_report,
    geometry_report,
)
from ..oracle import (
    MIN_SCALING_POINTS,
    ScalingFailure,
    ScalingRow,
    fit_scaling,
    scaling_rows,
)
from ..perturbative import (
    ThreeWayResult,
    asymmetry_three_way,
)
from ..report import (
    dumps,
    write_csv,
    write_json,
    write_svg,
)

__all__ = (
    'main',
)

PACKAGE : str = __package__.split('.')[0]

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

ASYMMETRY_COLUMNS = (
    'c_time', 'c_freq', 'c_dyson',
    'd_time', 'd_freq', 'd_dyson',
    'max_pairwise_residual', 'quadrature_error', 'passed',
)
SCALING_COLUMNS = ('lambda', 'exact_norm', 'perturbative_norm', 'difference_norm', 'error')
GEOMETRY_COLUMNS = ('s', 'D', 'g_bkm', 'g_bures', 'ratio', 'residual_bkm', 'residual_bures', 'residual_entropy')
KMS_COLUMNS = ('kind', 'point', 'deviation', 'tolerance', 'passed', 'error')


@main.command()
@click.pass_context
def asymmetry(ctx):
    """
    Compares the ordering asymmetry from the time-domain, frequency-domain and Dyson evaluations at every sweep point.
    """
    cfg = load_run_config(ctx)
    out = output_directory(ctx, cfg)
    run = CommandRun('asymmetry', cfg, out)

    agreement = cfg.tolerances['agreement']
    quadrature = cfg.tolerances['quadrature']

    def evaluate(point: Tuple[Optional[float], RunConfig]) -> ThreeWayResult:
        value, point_cfg = point
        if value is not None:
            log.info("%s = %g", cfg.sweep['axis'], value)
        return asymmetry_three_way(
            protocol_from_config(point_cfg),
            model_from_config(point_cfg),
            initial_state_from_config(point_cfg),
            tolerance=quadrature,
        )

    points = sweep_points(cfg)
    results = run_ordered(evaluate, points, cfg.workers)

    rows = []
    breaches = 0
    for (value, _), result in zip(points, results):
        passed = result.agrees(agreement)
        if not passed:
            breaches += 1
            log.warning("methods disagree by %.3e (tolerance %.1e, quadrature error %.3e)",
                        result.max_pairwise_residual, agreement * result.scale, result.quadrature_error)
        rows.append((
            *sweep_cells(cfg, value),
            *(r.coefficient for r in result.results),
            *(r.anticommutator_coefficient for r in result.results),
            result.max_pairwise_residual,
            result.quadrature_error,
            passed,
        ))

    run.add(write_csv(out / 'asymmetry.csv', (*sweep_header(cfg), *ASYMMETRY_COLUMNS), rows))
    run.finish(breaches)


def _scaling_cells(row: Union[ScalingRow, ScalingFailure]):
    if isinstance(row, ScalingFailure):
        return (row.coupling, None, None, None, row.error.format_message())
    return (*row, None)


@main.command()
@click.pass_context
def oracle(ctx):
    """
    Runs the truncated-Fock oracle over the coupling grid and fits the power law of its distance to second order.
    """
    cfg = load_run_config(ctx)
    out = output_directory(ctx, cfg)
    run = CommandRun('oracle', cfg, out)

    spec = evolution_spec_from_config(cfg)
    if len(spec.couplings) < MIN_SCALING_POINTS:
        raise InsufficientPointsError(len(spec.couplings), MIN_SCALING_POINTS)
    field = field_from_config(cfg)
    run.extra['oracle_modes'] = [{'frequency': float(omega), 'weight': float(g)} for omega, g in field.modes]
    protocol = protocol_from_config(cfg)
    rho = initial_state_from_config(cfg)

    rows = scaling_rows(field, protocol, spec, rho, workers=cfg.workers)
    run.add(write_csv(out / 'scaling.csv', SCALING_COLUMNS, (_scaling_cells(row) for row in rows)))

    failures = [row for row in rows if isinstance(row, ScalingFailure)]
    if failures:
        run.extra['failed_couplings'] = [row.coupling for row in failures]
        run.finish()
        raise failures[0].error

    fit = fit_scaling(rows)
    document = {
        'slope': fit.slope,
        'intercept': fit.intercept,
        'r2': fit.r_squared,
        'n_max': field.n_max,
    }
    breaches = int(fit.slope < cfg.tolerances['slope']) + int(fit.r_squared < cfg.tolerances['r_squared'])

    n_max_check = cfg.oracle['n_max_check']
    if n_max_check is not None:
        log.info("rerunning with n_max=%d", n_max_check)
        refined_rows = scaling_rows(field.with_n_max(n_max_check), protocol, spec, rho, workers=cfg.workers)
        refined_failures = [row for row in refined_rows if isinstance(row, ScalingFailure)]
        if refined_failures:
            write_json(out / 'scaling_fit.json', document)
            run.add(out / 'scaling_fit.json')
            run.finish()
            raise refined_failures[0].error
        refined = fit_scaling(refined_rows)
        shift = abs(refined.slope - fit.slope)
        document.update({
            'n_max_check': n_max_check,
            'slope_check': refined.slope,
            'slope_shift': shift,
        })
        if shift >= cfg.tolerances['slope_shift']:
            log.warning("slope moved by %.3g when raising n_max to %d", shift, n_max_check)
            breaches += 1

    if fit.slope < cfg.tolerances['slope']:
        log.warning("fitted slope %.3f is below %.3g", fit.slope, cfg.tolerances['slope'])
    log.info("remainder scales as λ^%.3f (R² = %.5f)", fit.slope, fit.r_squared)
    run.add(write_json(out / 'scaling_fit.json', document))

    if cfg.output['plot']:
        usable = [row for row in rows if isinstance(row, ScalingRow) and row.difference_norm > 0 and row.exact_norm > 0]
        log_lambda = [math.log10(row.coupling) for row in usable]
        run.add(write_svg(
            out / 'scaling.svg', log_lambda,
            {
                'log10 exact': [math.log10(row.exact_norm) for row in usable],
                'log10 perturbative': [math.log10(row.perturbative_norm) if row.perturbative_norm > 0 else math.nan for row in usable],
                'log10 difference': [math.log10(row.difference_norm) for row in usable],
            },
            title='trace norms of the ordering asymmetry',
            x_label='log10 λ',
        ))
    run.finish(breaches)


@main.command()
@click.pass_context
def geometry(ctx):
    """
    Tabulates relative entropy, both information metrics and their ratio along the rotation family.
    """
    cfg = load_run_config(ctx)
    out = output_directory(ctx, cfg)
    run = CommandRun('geometry', cfg, out)

    theta = cfg.geometry['theta']
    s_values = cfg.geometry['s_values']
    reports: List[GeometryReport] = run_ordered(lambda s: geometry_report(s, theta=theta), s_values, cfg.workers)

    metric_tolerance = cfg.tolerances['metric']
    entropy_tolerance = cfg.tolerances['entropy']
    breaches = 0
    for report in reports:
        count = report.breaches(metric_tolerance, entropy_tolerance)
        if count:
            log.warning("s=%g: residuals bkm %.3e, bures %.3e, entropy %.3e",
                        report.s, report.residual_bkm, report.residual_bures, report.residual_entropy)
        breaches += count

    positivity = entropy_positivity_report(s_values)
    run.extra['entropy_increasing'] = positivity.increasing
    run.extra['entropy_zeros'] = list(positivity.zeros)

    run.add(write_csv(out / 'geometry.csv', GEOMETRY_COLUMNS, reports))
    if cfg.output['plot']:
        run.add(write_svg(
            out / 'geometry.svg', [r.s for r in reports],
            {
                'D': [r.relative_entropy for r in reports],
                'g_BKM': [r.bkm for r in reports],
                'g_Bures': [r.bures for r in reports],
                'ratio': [r.ratio for r in reports],
            },
            title='relative entropy and information metrics on the rotation family',
            x_label='s',
        ))
    run.finish(breaches)


@main.command('kms-check')
@click.pass_context
def kms_check(ctx):
    """
    Checks detailed balance on a frequency grid and the KMS shift of the Wightman function at every configured time.
    """
    cfg = load_run_config(ctx)
    out = output_directory(ctx, cfg)
    run = CommandRun('kms-check', cfg, out)

    model = model_from_config(cfg)
    kms_tolerance = cfg.tolerances['kms_discrete' if model.is_discrete else 'kms_continuum']
    balance_tolerance = cfg.tolerances['detailed_balance']

    rows = []
    balance = detailed_balance_check(model, cfg.kms['frequencies'])
    for omega, error in zip(balance.frequencies, balance.relative_errors):
        rows.append(('frequency', float(omega), float(error), balance_tolerance, bool(error <= balance_tolerance), None))

    def check(t: float):
        try:
            report = kms_time_domain_check(model, [t], kms_tolerance)
        except ConvergenceError as exc:
            log.error("KMS check at t=%g: %s", t, exc.format_message())
            return ('time', t, None, kms_tolerance, False, exc.format_message())
        return ('time', t, report.max_deviation, kms_tolerance, report.passed, None)

    rows.extend(run_ordered(check, cfg.kms['times'], cfg.workers))

    breaches = sum(1 for row in rows if not row[4])
    deviations = np.array([row[2] for row in rows if row[0] == 'time' and row[2] is not None])
    run.extra['max_time_deviation'] = float(deviations.max()) if deviations.size else None
    run.extra['max_detailed_balance_error'] = balance.max_relative_error
    log.info("detailed balance: max relative error %.3e; KMS shift: max deviation %s",
             balance.max_relative_error, f"{deviations.max():.3e}" if deviations.size else "n/a")

    run.add(write_csv(out / 'kms.csv', KMS_COLUMNS, rows))
    run.finish(breaches)


@main.command()
@click.pass_context
def show_config(ctx):
    """
    Diagnostic helper command to display the configuration after applying defaults.
    """

    click.echo(dumps(load_run_config(ctx).as_dict()))
