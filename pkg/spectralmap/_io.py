"""
_io.py

Readers and writers for the data files: spectral sequences as JSON, sigma as
CSV with header "x,sigma" (one row per cell midpoint), kernel and report
files. Complex numbers are written as [re, im].
"""
import csv
import json

import numpy as np

from . import _global as g
from ._base import *
from ._exceptions import *

logger = g.get_logger(__name__)


def _to_json(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return [_to_json(x) for x in v.tolist()]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _to_json(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_to_json(x) for x in v]
    return v


def _from_json(v):
    if isinstance(v, list):
        if len(v) != 2:
            raise DataError(f"Expected [re, im], got {v}.")
        return complex(v[0], v[1])
    if v is None:
        return None
    return float(v)


def write_json(obj, path) -> None:
    """Write :param obj: as indented JSON, converting numpy and complex
    values.
    """
    with open(path, 'w') as f:
        json.dump(_to_json(obj), f, indent=2, sort_keys=True)
        f.write('\n')


def write_sequence(seq: SpectralSequence, path) -> None:
    write_json(seq.as_dict(), path)


def read_sequence(path) -> SpectralSequence:
    """Read a spectral sequence written by :func:`write_sequence`.

    :raises OSError: If the file cannot be read.
    :raises DataError: If the content is malformed.
    """
    with open(path) as f:
        try:
            rows = json.load(f)
        except json.JSONDecodeError as err:
            raise DataError(f"{path}: not valid JSON ({err}).")
    if not isinstance(rows, list) or not rows:
        raise DataError(f"{path}: expected a non-empty JSON array.")
    try:
        rows = sorted(rows, key=lambda r: int(r['n']))
        if [int(r['n']) for r in rows] != list(range(len(rows))):
            raise DataError(f"{path}: indices n must run 0..N.")
        lams = [_from_json(r['lambda']) for r in rows]
        alphas = [_from_json(r.get('alpha')) for r in rows]
        sources = [r.get('source', MEASURED) for r in rows]
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"{path}: malformed entry ({err}).")
    if all(a is None for a in alphas):
        alphas = None
    elif any(a is None for a in alphas):
        raise DataError(f"{path}: some entries lack alpha.")
    return SpectralSequence.from_arrays(lams, alphas, sources)


def read_sequence_arrays(path):
    """Read (lambdas, alphas) from a sequence file without any checks, so
    that data a SpectralSequence refuses can still be validated.
    """
    with open(path) as f:
        try:
            rows = json.load(f)
        except json.JSONDecodeError as err:
            raise DataError(f"{path}: not valid JSON ({err}).")
    try:
        rows = sorted(rows, key=lambda r: int(r['n']))
        lams = np.array([_from_json(r['lambda']) for r in rows])
        alphas = np.array([_from_json(r['alpha']) for r in rows])
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"{path}: malformed entry ({err}).")
    return lams, alphas


def write_sigma(sigma: PotentialSigma, path) -> None:
    """Write sigma as "x,sigma" rows at the cell midpoints."""
    if not sigma.is_real:
        raise DataError("Only real sigma can be written as CSV.")
    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(['x', 'sigma'])
        for x, s in zip(sigma.grid.midpoints, sigma.values):
            w.writerow([repr(float(x)), repr(float(s))])


def read_sigma(path) -> PotentialSigma:
    """Read a sigma CSV; the grid is rebuilt from the number of rows.

    :raises OSError: If the file cannot be read.
    :raises DataError: If the header or the midpoints are wrong.
    """
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    if not rows or [c.strip() for c in rows[0]] != ['x', 'sigma']:
        raise DataError(f"{path}: header must be 'x,sigma'.")
    try:
        body = np.array([[float(c) for c in r] for r in rows[1:] if r])
    except ValueError as err:
        raise DataError(f"{path}: {err}.")
    if body.ndim != 2 or body.shape[1] != 2:
        raise DataError(f"{path}: expected two columns.")
    grid = RealGrid.uniform(body.shape[0])
    if np.max(np.abs(body[:, 0] - grid.midpoints)) > 1e-9:
        raise ShapeError(f"{path}: x must be the midpoints of a uniform grid.")
    return PotentialSigma(grid, body[:, 1])


def write_rows(path, header, rows) -> None:
    """Write a CSV with :param header: and the tuples :param rows:."""
    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
