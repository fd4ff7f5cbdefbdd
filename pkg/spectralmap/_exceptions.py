"""
_exceptions.py

Contains declarations of custom exceptions.

Every exception carries a machine-readable ``kind`` and the process
``exit_code`` the command-line interface uses for it.
"""

class Error(Exception):
    """Base class for exceptions in this module."""
    kind = "error"
    exit_code = 1


################################################################################
# Data errors: the input itself is malformed or inconsistent.
################################################################################

class DataError(Error):
    """Base class for malformed or inconsistent input data."""
    kind = "data"
    exit_code = 3


class ShapeError(DataError):
    """
    Exception raised when sample arrays and grids do not have matching
    lengths, or when two objects that must share a grid do not.
    """
    kind = "shape"


class ValidationError(DataError):
    """
    Exception raised when spectral data fail one of the solvability
    conditions and the caller asked for strict checking.
    """
    kind = "validation"

    def __init__(self, msg, failed=()):
        super().__init__(msg)
        self.failed = tuple(failed)


class DataCollisionError(DataError):
    """
    Exception raised when a measured eigenvalue coincides with a model
    eigenvalue of a different index.
    """
    kind = "collision"


################################################################################
# Numerical errors: the computation could not meet its contract.
################################################################################

class NumericalError(Error):
    """Base class for failures of a numerical procedure."""
    kind = "numerical"
    exit_code = 5


class RangeError(NumericalError):
    """
    Exception raised when the cell propagator would overflow, i.e. when
    |Im rho| * pi exceeds the exponent range of a double.
    """
    kind = "range"


class SearchWindowError(NumericalError):
    """
    Exception raised when the eigenvalue scan finds fewer zeros than
    requested, or when a zero may lie below the negative search window.
    """
    kind = "search-window"


class MultiplicityError(NumericalError):
    """
    Exception raised when two zeros of the characteristic function are
    closer than the multiplicity tolerance.
    """
    kind = "multiplicity"


class CrossCheckError(NumericalError):
    """
    Exception raised when the two weight-number formulas disagree (bad root
    or grid too coarse).
    """
    kind = "cross-check"


class PoleProximityError(NumericalError):
    """
    Exception raised when the Weyl function is requested too close to one of
    its poles.
    """
    kind = "pole-proximity"


class DivergenceError(NumericalError):
    """
    Exception raised when the Picard iterates for the transformation kernels
    grow instead of decaying.
    """
    kind = "divergence"


class IterationBudgetError(NumericalError):
    """
    Exception raised when the Picard iteration does not reach its tolerance
    within the allowed number of steps.
    """
    kind = "iteration-budget"


class ReconstructionInconsistencyError(NumericalError):
    """
    Exception raised when the two reconstruction paths for sigma disagree.
    """
    kind = "reconstruction-inconsistency"


class MatchingError(NumericalError):
    """
    Exception raised when a perturbed zero cannot be matched to a unique base
    zero within the matching radius.
    """
    kind = "matching"


################################################################################
# Solvability of the main equation.
################################################################################

class SolvabilityError(Error):
    """
    Exception raised when the truncated main equation is singular at some
    point x.

    :ivar x: The grid point at which the system could not be solved.
    """
    kind = "solvability"
    exit_code = 4

    def __init__(self, msg, x=None):
        super().__init__(msg)
        self.x = x
