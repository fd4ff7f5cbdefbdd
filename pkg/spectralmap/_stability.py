"""
_stability.py

Numerical experiments on the stability of the spectrum: how far the zeros of

    Delta(lambda) = -rho sin(rho pi) + rho int_0^pi P(t) sin(rho t) dt + D

move when (P, D) is perturbed, and how far the spectral data move when
(sigma, H) is perturbed.
"""
import numpy as np
from attrs import field, frozen

from . import _global as g
from ._base import *
from ._base import _readonly
from ._exceptions import *
from ._forward import _scan_zeros, spectral_data
from ._kernels import PDRepresentation

logger = g.get_logger(__name__)

# Zeros closer than this to rho = 0 are compared in lambda, where the
# characteristic function has a simple zero.
ORIGIN_RADIUS = 1e-3

# Degree of the random trigonometric perturbations of P.
PERTURBATION_DEGREE = 8


def char_from_pd(pd: PDRepresentation, lam):
    """Return Delta(lam) from (P, D), elementwise in :param lam:.

    The integral is exact for the piecewise-linear interpolant of P.
    """
    rho = np.asarray(principal_rho(lam), dtype=complex)
    _, s = trig_moments(pd.P, pd.grid.h, rho)
    val = -rho * np.sin(rho * np.pi) + rho * s + pd.D
    if np.isrealobj(lam) and np.isrealobj(pd.P):
        val = np.real(val)
    return val[()] if np.ndim(val) == 0 else val


def char_derivative_from_pd(pd: PDRepresentation, lam):
    """Return d/dlambda Delta(lam) from (P, D).

    Uses d/dlambda = (1 / 2 rho) d/drho away from the origin and the limit
    -pi + int_0^pi t P(t) dt at lambda = 0.
    """
    rho = np.asarray(principal_rho(lam), dtype=complex)
    t = pd.grid.points
    _, s = trig_moments(pd.P, pd.grid.h, rho)
    tc, _ = trig_moments(t * pd.P, pd.grid.h, rho)
    small = np.abs(rho) < 1e-6
    safe = np.where(small, 1.0, rho)
    drho = -np.sin(safe * np.pi) - np.pi * safe * np.cos(safe * np.pi) \
        + s + safe * tc
    limit = -np.pi + integrate_grid(t * pd.P, pd.grid)
    val = np.where(small, limit, drho / (2 * safe))
    if np.isrealobj(lam) and np.isrealobj(pd.P):
        val = np.real(val)
    return val[()] if np.ndim(val) == 0 else val


def zeros_from_pd(pd: PDRepresentation, count: int, step: float = None,
                  tol: float = None) -> np.ndarray:
    """Return rho_n, n < :param count:, for the zeros rho_n^2 of Delta.

    The search runs over lambda = z |z| exactly like the eigenvalue search,
    with the negative window Lambda_0 = (1 + ||P|| + |D|)^2.

    :raises SearchWindowError: If a zero is missing or may lie below the
        window.
    :rtype: numpy.ndarray
    """
    if step is None:
        step = g.SCAN_STEP
    if tol is None:
        tol = g.ROOT_TOL
    if np.iscomplexobj(pd.P) or np.iscomplexobj(pd.D):
        raise DataError("Zeros are searched for real P and D only.")
    lam0 = (1.0 + pd.l2_norm() + abs(pd.D)) ** 2
    if char_from_pd(pd, -lam0) <= 0:
        raise SearchWindowError(
            f"Delta(-{lam0:.4g}) <= 0: a zero may lie below the search window."
        )

    def f(z):
        return char_from_pd(pd, z * np.abs(z))

    roots = _scan_zeros(f, -np.sqrt(lam0), count - 1 + 0.75, count, step, tol,
                        'zeros of (P, D)')
    return principal_rho(roots * np.abs(roots))


def _distances(base_rhos, rhos):
    # |rho_n - rho~_n|, or |lambda_n - lambda~_n| for a zero at the origin.
    at_origin = np.abs(base_rhos) < ORIGIN_RADIUS
    return np.where(at_origin, np.abs(rhos ** 2 - base_rhos ** 2),
                    np.abs(rhos - base_rhos))


def _match(base_rhos, rhos, radius):
    # One perturbed zero inside each base neighbourhood, and no zero in two.
    dist = np.abs(base_rhos[:, None] - rhos[None, :])
    inside = dist < radius
    per_base = inside.sum(axis=1)
    per_zero = inside.sum(axis=0)
    if np.any(per_base != 1) or np.any(per_zero > 1):
        n = int(np.nonzero(per_base != 1)[0][0]) if np.any(per_base != 1) \
            else int(np.nonzero(inside[:, per_zero > 1])[0][0])
        raise MatchingError(
            f"Zero {n} (rho = {base_rhos[n]}) has {per_base[n]} perturbed "
            f"zeros within {radius}; reduce the perturbation."
        )
    return rhos[np.argmax(inside, axis=1)]


def predicted_shifts(base: PDRepresentation, dP, dD, rhos) -> np.ndarray:
    """First-order displacement of the zeros :param rhos: of :param base:
    under P -> P + dP, D -> D + dD.

    The change of Delta is rho int dP sin(rho t) dt + dD; it is divided by
    d/drho Delta(rho^2), or by d/dlambda Delta at a zero at the origin.
    """
    rhos = np.asarray(rhos, dtype=complex)
    _, s = trig_moments(np.asarray(dP), base.grid.h, rhos)
    change = rhos * s + dD
    dlam = char_derivative_from_pd(base, rhos ** 2)
    at_origin = np.abs(rhos) < ORIGIN_RADIUS
    safe = np.where(at_origin, 1.0, rhos)
    return np.abs(np.where(at_origin, change / dlam,
                           change / (2 * safe * dlam)))


@frozen
class PerturbationReport:
    """
    One trial of the root perturbation experiment.

    :ivar lhs: (sum |rho_n - rho~_n|^2)^(1/2).
    :ivar rhs: ||P - P~|| + |D - D~|.
    :ivar ratio: lhs / rhs (0 when both vanish).
    :ivar N: Number of zeros compared.
    :ivar predicted: The first-order estimate of lhs.
    """

    lhs: float
    rhs: float
    ratio: float
    N: int
    predicted: float = None


@frozen(eq=False)
class PerturbationExperiment:
    """
    :ivar delta: Perturbation size.
    :ivar seed: Base seed; trial k uses seed + k.
    :ivar reports: One report per trial.
    """

    delta: float
    seed: int
    reports: tuple = field(converter=tuple)

    @property
    def max_ratio(self) -> float:
        return max(r.ratio for r in self.reports)

    def rows(self):
        """Yield (trial, delta, lhs, rhs, ratio)."""
        for k, r in enumerate(self.reports):
            yield k, self.delta, r.lhs, r.rhs, r.ratio


def random_perturbation(grid: RealGrid, delta: float, rng):
    """Return (dP, dD): a trigonometric polynomial of degree at most 8 with
    L2 norm :param delta: and a constant uniform in [-delta, delta].
    """
    t = grid.points
    k = np.arange(PERTURBATION_DEGREE + 1)[:, None]
    a = rng.standard_normal(PERTURBATION_DEGREE + 1)
    b = rng.standard_normal(PERTURBATION_DEGREE + 1)
    dP = a @ np.cos(k * t) + b @ np.sin(k * t)
    norm = np.sqrt(integrate_grid(dP ** 2, grid))
    dP = delta * dP / norm
    dD = delta * rng.uniform(-1.0, 1.0)
    return dP, dD


def perturbation_experiment(base: PDRepresentation, trials: int,
                            delta: float, count: int, seed: int = 0,
                            radius: float = None) -> PerturbationExperiment:
    """Compare the zeros of :param base: with those of :param trials: random
    perturbations of size :param delta:.

    :param base: The unperturbed (P, D).
    :param trials: Number of random perturbations.
    :param delta: Bound on ||P - P~|| and |D - D~|.
    :param count: Number of zeros compared.
    :param seed: Trial k draws from numpy.random.default_rng(seed + k).
    :param radius: Matching radius in rho, defaults to 0.1.
    :raises DataError: If trials or count is below 1, or delta is negative.
    :raises MultiplicityError: If two base zeros are closer than 1e-3.
    :raises MatchingError: If a perturbed zero cannot be matched.
    :rtype: PerturbationExperiment
    """
    if trials < 1 or count < 1:
        raise DataError("trials and count must be at least 1.")
    if delta < 0:
        raise DataError(f"delta must be nonnegative, got {delta:g}.")
    if radius is None:
        radius = g.MATCH_RADIUS
    base_rhos = zeros_from_pd(base, count)
    gaps = np.abs(np.diff(base_rhos))
    if gaps.size and gaps.min() < 1e-3:
        raise MultiplicityError("Base zeros are not well separated.")

    reports = []
    for trial in range(trials):
        rng = np.random.default_rng(seed + trial)
        dP, dD = random_perturbation(base.grid, delta, rng)
        perturbed = PDRepresentation(base.grid, base.P + dP, base.D + dD)
        rhos = _match(base_rhos, zeros_from_pd(perturbed, count), radius)
        lhs = l2_remainder_norm(_distances(base_rhos, rhos))
        rhs = float(np.sqrt(integrate_grid(dP ** 2, base.grid)) + abs(dD))
        if rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs == 0 else np.inf
        predicted = l2_remainder_norm(predicted_shifts(base, dP, dD,
                                                       base_rhos))
        reports.append(PerturbationReport(lhs, rhs, ratio, count, predicted))
        logger.debug(f"Trial {trial}: lhs {lhs:.3e}, rhs {rhs:.3e}.")
    experiment = PerturbationExperiment(delta, seed, reports)
    logger.info(f"delta = {delta:g}: max ratio {experiment.max_ratio:.4g} "
                f"over {trials} trials.")
    return experiment


################################################################################
# Stability under coefficient perturbations.
################################################################################

@frozen(eq=False)
class CoefficientStabilityReport:
    """
    :ivar sizes: Perturbation sizes s.
    :ivar distances: d(s) for every size.
    """

    sizes: np.ndarray = field(converter=_readonly)
    distances: np.ndarray = field(converter=_readonly)

    @property
    def lipschitz(self) -> np.ndarray:
        """d(s) / s, 0 where s = 0."""
        s = self.sizes
        return np.where(s > 0, self.distances / np.where(s > 0, s, 1.0), 0.0)

    def rows(self):
        for s, d, r in zip(self.sizes, self.distances, self.lipschitz):
            yield s, d, r


def bump(grid: RealGrid) -> PotentialSigma:
    """The perturbation shape sin^2(x), scaled to unit L2 norm."""
    shape = PotentialSigma.from_function(grid, lambda x: np.sin(x) ** 2)
    return PotentialSigma(grid, shape.values / shape.l2_norm())


def coefficient_stability_experiment(sigma: PotentialSigma, H,
                                     perturbation_sizes, count: int,
                                     **kwargs) -> CoefficientStabilityReport:
    """For each size s, perturb sigma by s times a unit bump and H by s, and
    report d(s) = (sum_n (|rho_n^s - rho_n| + |alpha_n^s - alpha_n|)^2)^(1/2)
    over the first :param count: spectral data.

    :rtype: CoefficientStabilityReport
    """
    base = spectral_data(sigma, H, count, **kwargs)
    shape = bump(sigma.grid)
    distances = []
    for s in perturbation_sizes:
        if s == 0:
            distances.append(0.0)
            continue
        moved = PotentialSigma(sigma.grid, sigma.values + s * shape.values,
                               sigma.shift)
        data = spectral_data(moved, H + s, count, **kwargs)
        terms = np.abs(data.rhos - base.rhos) \
            + np.abs(data.alphas - base.alphas)
        distances.append(l2_remainder_norm(terms))
        logger.debug(f"s = {s:g}: d = {distances[-1]:.4e}.")
    return CoefficientStabilityReport(np.asarray(perturbation_sizes, float),
                                      distances)
