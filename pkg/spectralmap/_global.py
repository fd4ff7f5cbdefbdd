"""
_global.py

Holds the package-wide defaults and the logger factory. Every default can be
overridden from the environment, or from a .env file in the working
directory.
"""
import logging
import os

from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


# Number of cells of the default x-grid on [0, pi].
GRID_M = _env_int('SPECTRALMAP_GRID_M', 200)

# Number of data terms (n = 0..N) used by the command-line pipelines.
N_DEFAULT = _env_int('SPECTRALMAP_N', 40)

# Final bisection bracket width in rho.
ROOT_TOL = _env_float('SPECTRALMAP_ROOT_TOL', 1e-11)

# Maximum width of a scan bracket in rho.
SCAN_STEP = _env_float('SPECTRALMAP_SCAN_STEP', 0.05)

# Two zeros closer than this in rho are treated as a multiple zero.
MULTIPLICITY_TOL = 1e-6

# Maximal relative disagreement between the two weight-number formulas.
CROSS_CHECK_TOL = 1e-4

# Weyl values are refused this close (relative) to an eigenvalue.
POLE_TOL = 1e-8

PICARD_TOL = _env_float('SPECTRALMAP_PICARD_TOL', 1e-8)
PICARD_MAX_ITER = _env_int('SPECTRALMAP_PICARD_MAX_ITER', 25)

# Growth of the Picard residual, relative to the first one, that counts as
# divergence.
PICARD_DIVERGENCE = 1e3

# Smallest admissible ratio min|U_ii| / max|U_ii| of the LU factor of the
# main system.
PIVOT_TOL = _env_float('SPECTRALMAP_PIVOT_TOL', 1e-12)

# L2 tolerance between the two reconstruction paths for sigma.
RECONSTRUCTION_TOL = 1e-2

# Largest |Im rho| * pi for which the cell propagator is evaluated.
EXP_LIMIT = 700.0

# Matching radius in rho for perturbed zeros.
MATCH_RADIUS = 0.1

LOG_LEVEL = os.environ.get('SPECTRALMAP_LOG_LEVEL', 'WARNING')

_configured = False


def get_logger(name: str) -> logging.Logger:
    """Return the logger called :param name:, configuring the package's root
    handler the first time it is called.

    :param name: Usually the ``__name__`` of the calling module.
    :type name: str
    :return: The logger.
    :rtype: logging.Logger
    """
    global _configured

    if not _configured:
        root = logging.getLogger('spectralmap')
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(
            '%(asctime)s %(name)s %(levelname)s: %(message)s'
        ))
        root.addHandler(handler)
        root.setLevel(LOG_LEVEL.upper())
        root.propagate = False
        _configured = True

    return logging.getLogger(name)
