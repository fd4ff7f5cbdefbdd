"""
cli.py

Command-line entry point. Every command reads its inputs, runs one pipeline
and writes CSV/JSON data files into the output directory, together with a
report.json recording the effective configuration.

Exit codes: 0 success, 2 io, 3 validation, 4 solvability, 5 numerical.
Errors are written to stderr as one JSON object.
"""
import functools
import json
import os
import sys

import click
from attrs import asdict, field, frozen, validators

from . import _global as g
from ._base import *
from ._exceptions import *
from ._forward import asymptotic_remainders, spectral_data
from ._inverse import (GENERAL, SELF_ADJOINT, solve_inverse_problem,
                       validate_data)
from ._io import *
from ._kernels import (build_kernels, c_rows, delta_representation,
                       kernel_row_norms, kernel_rows)
from ._stability import perturbation_experiment

logger = g.get_logger(__name__)

COMMANDS = ('forward', 'inverse', 'roundtrip', 'kernels', 'stability',
            'validate')


def _nonnegative(instance, attribute, value):
    if value is not None and value < 0:
        raise DataError(f"{attribute.name} must be nonnegative.")


def _enough_cells(instance, attribute, value):
    if value < 8:
        raise DataError("The grid needs at least 8 cells.")


def _tolerances(**overrides) -> dict:
    # Defaults read at call time so that environment overrides apply.
    tolerances = {
        'root_tol': g.ROOT_TOL,
        'scan_step': g.SCAN_STEP,
        'picard_tol': g.PICARD_TOL,
        'picard_max_iter': g.PICARD_MAX_ITER,
        'pivot_tol': g.PIVOT_TOL,
        'cross_check_tol': g.CROSS_CHECK_TOL,
        'reconstruction_tol': g.RECONSTRUCTION_TOL,
    }
    tolerances.update(overrides)
    return tolerances


@frozen
class RunConfig:
    """
    The effective settings of one command, recorded in its report.

    :ivar command: The command name.
    :ivar inputs: Input file paths.
    :ivar N: Largest data index.
    :ivar grid_m: Cells of the x-grid.
    :ivar out: Output directory.
    :ivar seed: Random seed (stability only).
    :ivar tolerances: The numerical tolerances in force.
    """

    command: str = field(validator=validators.in_(COMMANDS))
    inputs: dict = field(factory=dict)
    N: int = field(default=None, validator=_nonnegative)
    grid_m: int = field(default=g.GRID_M, validator=_enough_cells)
    out: str = '.'
    seed: int = None
    tolerances: dict = field(factory=_tolerances)

    def path(self, name: str) -> str:
        return os.path.join(self.out, name)

    def prepare(self):
        os.makedirs(self.out, exist_ok=True)
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def _fail(kind: str, exit_code: int, msg: str, **extra):
    payload = {'error': kind, 'message': msg}
    payload.update(extra)
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(exit_code)


def handled(command):
    """Map package errors and unreadable files to the exit-code contract."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SolvabilityError as err:
            _fail(err.kind, err.exit_code, str(err), x=err.x)
        except ValidationError as err:
            _fail(err.kind, err.exit_code, str(err), failed=list(err.failed))
        except Error as err:
            _fail(err.kind, err.exit_code, str(err))
        except OSError as err:
            _fail('io', 2, str(err))

    return wrapper


def _remainder_rows(rem):
    for n, (r, a) in enumerate(zip(rem.rho_remainders, rem.alpha_remainders)):
        yield n, r, a


@click.group()
@click.option('--log-level', default=None,
              help="Override SPECTRALMAP_LOG_LEVEL.")
def cli(log_level):
    """Forward and inverse spectral computations for Sturm-Liouville
    operators with singular potentials."""
    if log_level:
        g.get_logger('spectralmap').setLevel(log_level.upper())


@cli.command()
@click.option('--sigma', 'sigma_path', required=True,
              type=click.Path(dir_okay=False), help="Sigma CSV (x,sigma).")
@click.option('--H', 'H', type=float, default=0.0, show_default=True)
@click.option('--N', 'N', type=int, default=g.N_DEFAULT, show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default='.')
@handled
def forward(sigma_path, H, N, out):
    """Eigenvalues and weight numbers n = 0..N of (sigma, H)."""
    sigma = read_sigma(sigma_path)
    config = RunConfig('forward', {'sigma': sigma_path, 'H': H}, N,
                       sigma.grid.m, out).prepare()
    seq = spectral_data(sigma, H, N + 1)
    rem = asymptotic_remainders(seq)
    write_sequence(seq, config.path('spectral_data.json'))
    write_rows(config.path('remainders.csv'),
               ['n', 'rho_remainder', 'alpha_remainder'], _remainder_rows(rem))
    write_json({
        'config': config.as_dict(),
        'rho_norm': rem.rho_norm,
        'alpha_norm': rem.alpha_norm,
        'rho_tail_fraction': rem.rho_tail_fraction,
        'alpha_tail_fraction': rem.alpha_tail_fraction,
        'interlacing_from': rem.interlacing_from,
    }, config.path('report.json'))


def _validated(data_path, force, mode=SELF_ADJOINT):
    report = validate_data(read_sequence_arrays(data_path), mode)
    if not report.ok:
        strictraise(not force,
                    lambda msg: ValidationError(msg, report.failed()),
                    "Data fail " + "; ".join(report.messages))
    return report


@cli.command()
@click.option('--data', 'data_path', required=True,
              type=click.Path(dir_okay=False), help="Spectral data JSON.")
@click.option('--N', 'N', type=int, default=None,
              help="Truncation index, defaults to the last one in the file.")
@click.option('--grid', 'grid_m', type=int, default=g.GRID_M,
              show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default='.')
@click.option('--force', is_flag=True, help="Proceed on failed validation.")
@handled
def inverse(data_path, N, grid_m, out, force):
    """Reconstruct sigma and H from spectral data."""
    config = RunConfig('inverse', {'data': data_path}, N, grid_m, out)
    report = _validated(data_path, force)
    config.prepare()
    seq = read_sequence(data_path)
    result = solve_inverse_problem(seq, N, RealGrid.uniform(grid_m))
    write_sigma(result.sigma, config.path('sigma.csv'))
    write_rows(config.path('condition.csv'), ['x', 'cond'],
               zip(result.sigma.grid.points, result.diagnostics['cond']))
    write_json({
        'config': config.as_dict(),
        'H': result.H,
        'cond_max': result.diagnostics['cond_max'],
        'checks': {
            'validation': report.as_dict(),
            'crosscheck_sigma_l2': result.diagnostics['crosscheck_sigma_l2'],
            'crosscheck_H': result.diagnostics['crosscheck_H'],
            'tail_bound': result.diagnostics['tail_bound'],
        },
    }, config.path('report.json'))


@cli.command()
@click.option('--sigma', 'sigma_path', required=True,
              type=click.Path(dir_okay=False))
@click.option('--H', 'H', type=float, default=0.0, show_default=True)
@click.option('--N', 'N', type=int, default=g.N_DEFAULT, show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default='.')
@handled
def roundtrip(sigma_path, H, N, out):
    """Forward then inverse, with errors for N // 2 and N."""
    sigma = read_sigma(sigma_path)
    config = RunConfig('roundtrip', {'sigma': sigma_path, 'H': H}, N,
                       sigma.grid.m, out).prepare()
    seq = spectral_data(sigma, H, N + 1)
    table = []
    for n in sorted({N // 2, N}):
        result = solve_inverse_problem(seq, n, sigma.grid)
        table.append((n, sigma_l2_distance(result.sigma, sigma),
                      abs(result.H - H)))
    write_sigma(sigma, config.path('sigma_true.csv'))
    write_sigma(result.sigma, config.path('sigma_rec.csv'))
    write_rows(config.path('errors.csv'), ['N', 'sigma_l2_error', 'H_error'],
               table)
    write_json({
        'config': config.as_dict(),
        'H': H,
        'H_rec': result.H,
        'sigma_l2_error': table[-1][1],
        'H_error': table[-1][2],
        'cond_max': result.diagnostics['cond_max'],
    }, config.path('report.json'))


@cli.command()
@click.option('--sigma', 'sigma_path', required=True,
              type=click.Path(dir_okay=False))
@click.option('--H', 'H', type=float, default=0.0, show_default=True)
@click.option('--tol', type=float, default=g.PICARD_TOL, show_default=True)
@click.option('--max-iter', type=int, default=g.PICARD_MAX_ITER,
              show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default='.')
@handled
def kernels(sigma_path, H, tol, max_iter, out):
    """Transformation kernels K, N, C and the pair (P, D)."""
    sigma = read_sigma(sigma_path)
    config = RunConfig('kernels', {'sigma': sigma_path, 'H': H}, None,
                       sigma.grid.m, out,
                       tolerances=_tolerances(picard_tol=tol,
                                              picard_max_iter=max_iter))
    config.prepare()
    triple = build_kernels(sigma, tol, max_iter)
    pd = delta_representation(triple, sigma, H)
    k_norms, n_norms = kernel_row_norms(triple)
    write_rows(config.path('kernels.csv'), ['x', 't', 'K', 'N'],
               kernel_rows(triple))
    write_rows(config.path('c.csv'), ['x', 'C'], c_rows(triple))
    write_rows(config.path('pd.csv'), ['t', 'P'],
               zip(pd.grid.points, pd.P))
    write_json({
        'config': config.as_dict(),
        'iterations': triple.iterations,
        'residual': triple.residual,
        'D': pd.D,
        'max_row_norm_K': float(k_norms.max()),
        'max_row_norm_N': float(n_norms.max()),
    }, config.path('report.json'))


@cli.command()
@click.option('--sigma', 'sigma_path', required=True,
              type=click.Path(dir_okay=False))
@click.option('--H', 'H', type=float, default=0.0, show_default=True)
@click.option('--delta', 'deltas', type=float, multiple=True,
              default=(1e-2, 1e-3, 1e-4), show_default=True)
@click.option('--trials', type=int, default=20, show_default=True)
@click.option('--count', type=int, default=30, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default='.')
@handled
def stability(sigma_path, H, deltas, trials, count, seed, out):
    """Root perturbation experiment on the (P, D) pair of (sigma, H)."""
    sigma = read_sigma(sigma_path)
    config = RunConfig('stability', {'sigma': sigma_path, 'H': H}, count - 1,
                       sigma.grid.m, out, seed).prepare()
    pd = delta_representation(build_kernels(sigma), sigma, H)
    experiments = [perturbation_experiment(pd, trials, d, count, seed)
                   for d in deltas]
    write_rows(config.path('stability.csv'),
               ['trial', 'delta', 'lhs', 'rhs', 'ratio'],
               (row for e in experiments for row in e.rows()))
    write_json({'seed': seed, 'trials': trials, 'delta': list(deltas),
                'count': count}, config.path('experiment.json'))
    write_json({
        'config': config.as_dict(),
        'max_ratio': {repr(e.delta): e.max_ratio for e in experiments},
    }, config.path('report.json'))


@cli.command()
@click.option('--data', 'data_path', required=True,
              type=click.Path(dir_okay=False))
@click.option('--mode', type=click.Choice([SELF_ADJOINT, GENERAL]),
              default=SELF_ADJOINT, show_default=True)
@click.option('--out', type=click.Path(file_okay=False), default=None)
@handled
def validate(data_path, mode, out):
    """Check spectral data; exit 3 if a condition fails."""
    report = validate_data(read_sequence_arrays(data_path), mode)
    payload = report.as_dict()
    if out is not None:
        config = RunConfig('validate', {'data': data_path}, out=out).prepare()
        write_json({'config': config.as_dict(), **payload},
                   config.path('report.json'))
    click.echo(json.dumps(payload, sort_keys=True, default=float))
    if not report.ok:
        raise ValidationError("Data fail " + "; ".join(report.messages),
                              report.failed())


if __name__ == '__main__':
    cli()
