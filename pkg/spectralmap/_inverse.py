"""
_inverse.py

Reconstruction of (sigma, H) from spectral data by the method of spectral
mappings. The measured data {lambda_n, alpha_n}, n <= N, are paired with the
data of the model problem sigma = 0, H = 0 and, for every x, a dense linear
system (the truncated main equation) is solved for the values phi_ni(x).
Beyond N the data are taken equal to the model, so all tail terms vanish.
"""
import warnings

import numpy as np
from attrs import field, frozen
from scipy import linalg

from . import _global as g
from ._base import *
from ._base import _readonly
from ._exceptions import *
from ._forward import tail_fraction

logger = g.get_logger(__name__)

SELF_ADJOINT = 'self-adjoint'
GENERAL = 'general'


def model_spectral_data(N: int) -> SpectralSequence:
    """Return the spectral data of sigma = 0, H = 0, n = 0..N:
    lambda_n = n^2, alpha_0 = 1/pi, alpha_n = 2/pi.

    :rtype: SpectralSequence
    """
    if N < 0:
        raise DataError("N must be nonnegative.")
    n = np.arange(N + 1)
    return SpectralSequence.from_arrays(
        (n ** 2).astype(float), _model_alphas(N), [MODEL_TAIL] * (N + 1)
    )


def _model_alphas(N):
    return np.where(np.arange(N + 1) == 0, 1.0 / np.pi, 2.0 / np.pi)


################################################################################
# Two-sheet data.
################################################################################

@frozen(eq=False)
class TwoSheetData:
    """
    Measured data (sheet 0) next to the model data (sheet 1), n = 0..N.

    :ivar lam0: Measured eigenvalues.
    :ivar alpha0: Measured weight numbers.
    :ivar lam1: Model eigenvalues n^2.
    :ivar alpha1: Model weight numbers.
    :ivar rho0: Roots of lam0, arg in [-pi/2, pi/2).
    :ivar rho1: Roots of lam1.
    """

    lam0: np.ndarray = field(converter=_readonly)
    alpha0: np.ndarray = field(converter=_readonly)
    lam1: np.ndarray = field(converter=_readonly)
    alpha1: np.ndarray = field(converter=_readonly)
    rho0: np.ndarray = field(converter=_readonly)
    rho1: np.ndarray = field(converter=_readonly)

    @property
    def N(self) -> int:
        return self.lam0.size - 1

    @property
    def eps(self) -> np.ndarray:
        """|rho_n0 - rho_n1|."""
        return np.abs(self.rho0 - self.rho1)

    @property
    def xi(self) -> np.ndarray:
        return self.eps + np.abs(self.alpha0 - self.alpha1)

    @property
    def chi(self) -> np.ndarray:
        eps = self.eps
        return np.where(eps > 0, 1.0 / np.where(eps > 0, eps, 1.0), 0.0)

    @property
    def collapsed(self) -> np.ndarray:
        """Indices n with rho_n0 = rho_n1, whose two equations coincide."""
        return self.rho0 == self.rho1

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.lam0) or np.iscomplexobj(self.alpha0))


def complete_data(measured: SpectralSequence, N: int = None) -> TwoSheetData:
    """Pair the measured data n = 0..N with the model data.

    :param measured: Data with weight numbers and at least N + 1 entries.
    :type measured: SpectralSequence
    :param N: Truncation index, defaults to the last index of
        :param measured:.
    :type N: int, optional
    :raises DataCollisionError: If lambda_n0 = lambda_k1 for some n != k.
    :raises DataError: If an entry has no weight number.
    :rtype: TwoSheetData
    """
    if not measured.has_alphas:
        raise DataError("Pairing needs the weight numbers of every entry.")
    if N is None:
        N = measured.N
    data = measured.truncated(N)
    lam0 = data.lambdas
    alpha0 = data.alphas
    n = np.arange(N + 1)
    lam1 = (n ** 2).astype(float)

    close = np.abs(lam0[:, None] - lam1[None, :]) \
        <= 1e-10 * np.maximum(1.0, lam1[None, :])
    np.fill_diagonal(close, False)
    if np.any(close):
        a, b = np.argwhere(close)[0]
        raise DataCollisionError(
            f"lambda_{a} = {lam0[a]} coincides with the model eigenvalue "
            f"{lam1[b]} of index {b}."
        )
    return TwoSheetData(lam0, alpha0, lam1, _model_alphas(N),
                        principal_rho(lam0), n.astype(float))


################################################################################
# The main equation.
################################################################################

def _half_sinc(a, x):
    # sin(a x) / (2 a), with its Taylor expansion near a = 0.
    small = np.abs(a) < 1e-6
    safe = np.where(small, 1.0, a)
    return np.where(small, x / 2 - a * a * x ** 3 / 12,
                    np.sin(safe * x) / (2 * safe))


def dtilde(x, lam, mu):
    """Return int_0^x cos(rho t) cos(theta t) dt for rho^2 = lam,
    theta^2 = mu, elementwise.
    """
    real = np.isrealobj(lam) and np.isrealobj(mu)
    rho = np.asarray(principal_rho(lam), dtype=complex)
    theta = np.asarray(principal_rho(mu), dtype=complex)
    val = _half_sinc(rho - theta, x) + _half_sinc(rho + theta, x)
    if real:
        val = val.real
    return val[()] if np.ndim(val) == 0 else val


def _rtilde_blocks(x, data: TwoSheetData):
    # R~_{ni,kj} = (-1)^j alpha_kj D~(x, lambda_ni, lambda_kj), as four
    # (N+1) x (N+1) blocks indexed [n, k].
    l0, l1 = data.lam0, data.lam1
    if not data.is_real:
        l0 = l0.astype(complex)
    a0 = data.alpha0[None, :] * dtilde(x, l0[:, None], l0[None, :])
    b0 = -data.alpha1[None, :] * dtilde(x, l0[:, None], l1[None, :])
    a1 = data.alpha0[None, :] * dtilde(x, l1[:, None], l0[None, :])
    b1 = -data.alpha1[None, :] * dtilde(x, l1[:, None], l1[None, :])
    return a0, b0, a1, b1


def _cos(rho, x, real):
    val = np.cos(rho * x)
    return val.real if real else val


@frozen(eq=False)
class MainEquationSystem:
    """
    The linear system for one x.

    :ivar x: The point.
    :ivar matrix: The system matrix.
    :ivar rhs: The right-hand side.
    :ivar cond_estimate: 2-norm condition number of the matrix.
    :ivar lu: LU factorization from scipy.linalg.lu_factor.
    """

    x: float
    matrix: np.ndarray = field(converter=_readonly)
    rhs: np.ndarray = field(converter=_readonly)
    cond_estimate: float
    lu: tuple = field(repr=False)

    def solve(self) -> np.ndarray:
        return linalg.lu_solve(self.lu, self.rhs)


def _factor(matrix, rhs, x, pivot_tol):
    if not np.all(np.isfinite(matrix)):
        raise SolvabilityError(f"Main system at x = {x} is not finite.", x=x)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', linalg.LinAlgWarning)
        lu = linalg.lu_factor(matrix)
    piv = np.abs(np.diag(lu[0]))
    if piv.max() == 0 or piv.min() / piv.max() < pivot_tol:
        raise SolvabilityError(
            f"Main system is singular at x = {x} (pivot ratio "
            f"{piv.min() / max(piv.max(), 1e-300):.3e}).", x=x
        )
    cond = float(np.linalg.cond(matrix))
    return MainEquationSystem(x, matrix, rhs, cond, lu)


def build_main_system(x: float, data: TwoSheetData,
                      pivot_tol: float = None) -> MainEquationSystem:
    """Assemble the main equation at :param x: in the coordinates
    u_n = phi_n0 and d_n = chi_n (phi_n0 - phi_n1).

    Unknowns are ordered (u_0..u_N, d_0..d_N). Pairs with rho_n0 = rho_n1
    get the row d_n = 0.

    :param x: A point of [0, pi].
    :type x: float
    :param data: The paired data.
    :type data: TwoSheetData
    :raises SolvabilityError: If the matrix is singular to within
        :param pivot_tol:.
    :rtype: MainEquationSystem
    """
    if pivot_tol is None:
        pivot_tol = g.PIVOT_TOL
    real = data.is_real
    a0, b0, a1, b1 = _rtilde_blocks(x, data)
    eps = data.eps
    chi = data.chi[:, None]
    eye = np.eye(data.N + 1)

    top = np.hstack((eye + a0 + b0, -b0 * eps[None, :]))
    bottom = np.hstack((chi * (a0 + b0 - a1 - b1),
                        eye - chi * (b0 - b1) * eps[None, :]))
    matrix = np.vstack((top, bottom))

    r0, r1 = data.rho0, data.rho1
    diff = -2 * np.sin((r0 + r1) * x / 2) * np.sin((r0 - r1) * x / 2)
    if real:
        diff = diff.real
    rhs = np.concatenate((_cos(r0, x, real), data.chi * diff))

    collapsed = np.nonzero(data.collapsed)[0] + data.N + 1
    matrix[collapsed, :] = 0.0
    matrix[collapsed, collapsed] = 1.0
    rhs[collapsed] = 0.0
    return _factor(matrix, rhs, x, pivot_tol)


def build_raw_system(x: float, data: TwoSheetData,
                     pivot_tol: float = None) -> MainEquationSystem:
    """Assemble I + R~(x) acting on (phi_00..phi_N0, phi_01..phi_N1)
    without any weighting.

    For a pair with rho_n0 = rho_n1 the rows n0 and n1 differ only by
    e_n0 - e_n1, so phi_n0 = phi_n1 holds here only up to rounding, while
    the weighted system imposes it exactly.

    :raises SolvabilityError: If the matrix is singular.
    """
    if pivot_tol is None:
        pivot_tol = g.PIVOT_TOL
    real = data.is_real
    a0, b0, a1, b1 = _rtilde_blocks(x, data)
    matrix = np.eye(2 * (data.N + 1)) + np.block([[a0, b0], [a1, b1]])
    rhs = np.concatenate((_cos(data.rho0, x, real), _cos(data.rho1, x, real)))
    return _factor(matrix, rhs, x, pivot_tol)


def operator_norm(system: MainEquationSystem) -> float:
    """Sup row sum of the R~ part of a system matrix."""
    eye = np.eye(system.matrix.shape[0])
    return float(np.max(np.sum(np.abs(system.matrix - eye), axis=1)))


@frozen(eq=False)
class PhiTable:
    """
    Solutions phi_ni(x) of the main equation on a grid.

    :ivar grid: The grid.
    :ivar phi0: phi_n0(x_j), indexed [n, j].
    :ivar phi1: phi_n1(x_j), indexed [n, j].
    :ivar cond: Condition number of the system at every node.
    """

    grid: RealGrid
    phi0: np.ndarray = field(converter=_readonly)
    phi1: np.ndarray = field(converter=_readonly)
    cond: np.ndarray = field(converter=_readonly)


def solve_main_equation(grid: RealGrid, data: TwoSheetData,
                        pivot_tol: float = None) -> PhiTable:
    """Solve the main equation at every node of :param grid:.

    :raises SolvabilityError: At the first node where the system is
        singular; the error carries that x.
    :rtype: PhiTable
    """
    size = data.N + 1
    dtype = float if data.is_real else complex
    phi0 = np.empty((size, len(grid)), dtype=dtype)
    phi1 = np.empty_like(phi0)
    cond = np.empty(len(grid))
    eps = data.eps
    for j, x in enumerate(grid.points):
        system = build_main_system(x, data, pivot_tol)
        z = system.solve()
        u, d = z[:size], z[size:]
        phi0[:, j] = u
        phi1[:, j] = u - eps * d
        cond[j] = system.cond_estimate
        logger.debug(f"x = {x:.4f}: cond {system.cond_estimate:.3e}.")
    if cond.max() > 1e6:
        logger.warning(f"Main system condition number reaches "
                       f"{cond.max():.3e}.")
    return PhiTable(grid, phi0, phi1, cond)


################################################################################
# Reconstruction.
################################################################################

@frozen(eq=False)
class ReconstructionResult:
    """
    :ivar sigma: The reconstructed potential.
    :ivar H: The reconstructed boundary constant.
    :ivar phi_table: The solutions of the main equation.
    :ivar diagnostics: Condition numbers, tail bound and the cross-check of
        the two reconstruction paths.
    """

    sigma: PotentialSigma
    H: complex
    phi_table: PhiTable
    diagnostics: dict


def _epsilon0(phi_table, data):
    # sum_n alpha_n0 phi_n0 phi~_n0 - alpha_n1 phi_n1 phi~_n1 at every node.
    x = phi_table.grid.points[None, :]
    real = data.is_real
    c0 = _cos(data.rho0[:, None], x, real)
    c1 = _cos(data.rho1[:, None], x, real)
    return np.sum(data.alpha0[:, None] * phi_table.phi0 * c0
                  - data.alpha1[:, None] * phi_table.phi1 * c1, axis=0)


def reconstruct(phi_table: PhiTable, data: TwoSheetData,
                grid: RealGrid = None) -> ReconstructionResult:
    """Return sigma and H from the solutions of the main equation.

    sigma(x) = -2 sum_n (alpha_n0 phi_n0 phi~_n0 - alpha_n1 phi_n1 phi~_n1
    - (alpha_n0 - alpha_n1)/2) at the nodes, averaged over each cell, and
    H = -sum_n (... at pi - (alpha_n0 - alpha_n1)).

    The same values are rebuilt from q = -2 d/dx eps0, h = -eps0(0),
    g = eps0(pi) as sigma = h + int q, H = g + sigma(pi).

    :raises ReconstructionInconsistencyError: If the two paths differ by more
        than 1e-2 in L2.
    :rtype: ReconstructionResult
    """
    if grid is None:
        grid = phi_table.grid
    if not grid.same_as(phi_table.grid):
        raise ShapeError("The phi table was solved on another grid.")
    eps0 = _epsilon0(phi_table, data)
    alpha_gap = np.sum(data.alpha0 - data.alpha1)

    nodes = -2.0 * eps0 + alpha_gap
    H = -eps0[-1] + alpha_gap
    sigma = PotentialSigma(grid, 0.5 * (nodes[1:] + nodes[:-1]))

    # q at the nodes, second order, integrated back by the trapezoid rule.
    q = -2.0 * np.gradient(eps0, grid.h, edge_order=2)
    h_n = -eps0[0]
    alt_nodes = h_n + cumulative_grid(q, grid)
    H_alt = eps0[-1] + alt_nodes[-1]
    sigma_alt = PotentialSigma(grid, 0.5 * (alt_nodes[1:] + alt_nodes[:-1]))
    gap = sigma_l2_distance(sigma, sigma_alt)
    H_gap = abs(H - H_alt)
    logger.debug(f"Reconstruction paths differ by {gap:.3e} (sigma) and "
                 f"{H_gap:.3e} (H).")
    if gap > g.RECONSTRUCTION_TOL or H_gap > g.RECONSTRUCTION_TOL:
        raise ReconstructionInconsistencyError(
            f"Reconstruction paths disagree: sigma by {gap:.3e} in L2, H by "
            f"{H_gap:.3e}."
        )

    if data.is_real:
        H = float(np.real(H))
    diagnostics = {
        'cond': phi_table.cond,
        'cond_max': float(phi_table.cond.max()),
        'tail_bound': 0.0,
        'crosscheck_sigma_l2': float(gap),
        'crosscheck_H': float(H_gap),
        'q': q,
    }
    return ReconstructionResult(sigma, H, phi_table, diagnostics)


def solve_inverse_problem(measured: SpectralSequence, N: int = None,
                          grid: RealGrid = None) -> ReconstructionResult:
    """Pair, solve and reconstruct in one call."""
    if grid is None:
        grid = RealGrid.uniform()
    data = complete_data(measured, N)
    logger.info(f"Solving the main equation with N = {data.N} on "
                f"{grid.m} cells.")
    table = solve_main_equation(grid, data)
    return reconstruct(table, data, grid)


################################################################################
# Validation.
################################################################################

@frozen(eq=False)
class ValidationReport:
    """
    Outcome of the checks on a data set.

    :ivar mode: 'self-adjoint' or 'general'.
    :ivar passed: Condition name ('i', 'ii', 'iii') to bool.
    :ivar messages: Reasons for each failure.
    :ivar rho_norm: l2 norm of rho_n - n.
    :ivar alpha_norm: l2 norm of alpha_n - 2/pi.
    :ivar rho_tail_fraction: Tail share of the rho remainder norm.
    :ivar alpha_tail_fraction: Tail share of the alpha remainder norm.
    :ivar cond_max: Largest condition number on the probe grid (general
        mode), or None.
    """

    mode: str
    passed: dict
    messages: list
    rho_norm: float
    alpha_norm: float
    rho_tail_fraction: float
    alpha_tail_fraction: float
    cond_max: float = None

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def failed(self) -> list:
        return [k for k, v in self.passed.items() if not v]

    def as_dict(self) -> dict:
        return {
            'mode': self.mode,
            'passed': {k: bool(v) for k, v in self.passed.items()},
            'ok': self.ok,
            'messages': list(self.messages),
            'rho_norm': float(self.rho_norm),
            'alpha_norm': float(self.alpha_norm),
            'rho_tail_fraction': float(self.rho_tail_fraction),
            'alpha_tail_fraction': float(self.alpha_tail_fraction),
            'cond_max': self.cond_max,
        }


def validate_data(measured, mode: str = SELF_ADJOINT,
                  tail_limit: float = 0.25, probe_m: int = 16,
                  strict: bool = False) -> ValidationReport:
    """Check data against the conditions for being spectral data.

    (i) lambda_n real and alpha_n > 0 (self-adjoint) or alpha_n != 0
    (general), with pairwise distinct lambda_n; (ii) the remainders of
    rho_n = n + kappa_n and alpha_n = 2/pi + kappa_n level off, i.e. the last
    half of the indices adds at most :param tail_limit: of the l2 norm; (iii)
    in general mode only, the truncated main equation is solvable on a probe
    grid of :param probe_m: cells.

    :param measured: A SpectralSequence, or a pair (lambdas, alphas) of
        arrays, which may hold values a SpectralSequence refuses.
    :param strict: Raise a ValidationError instead of only reporting.
    :rtype: ValidationReport
    """
    if mode not in (SELF_ADJOINT, GENERAL):
        raise ValueError(f"Unknown mode '{mode}'.")
    if isinstance(measured, SpectralSequence):
        lams, alphas = measured.lambdas, measured.alphas
    else:
        lams, alphas = (np.asarray(a) for a in measured)
        if lams.shape != alphas.shape:
            raise ShapeError("lambdas and alphas differ in length.")

    passed = {}
    messages = []
    reasons = []
    if mode == SELF_ADJOINT:
        if np.any(np.imag(lams) != 0) or np.any(np.imag(alphas) != 0):
            reasons.append("data are not real")
        elif np.any(np.real(alphas) <= 0):
            bad = np.nonzero(np.real(alphas) <= 0)[0]
            reasons.append(f"alpha_n <= 0 for n = {bad.tolist()}")
    elif np.any(alphas == 0):
        bad = np.nonzero(alphas == 0)[0]
        reasons.append(f"alpha_n = 0 for n = {bad.tolist()}")
    if np.unique(lams).size != lams.size:
        reasons.append("eigenvalues are not pairwise distinct")
    passed['i'] = not reasons
    messages += [f"condition (i): {r}" for r in reasons]

    n = np.arange(lams.size)
    rho_r = principal_rho(lams) - n
    alpha_r = alphas - 2.0 / np.pi
    rho_tail = tail_fraction(rho_r)
    alpha_tail = tail_fraction(alpha_r)
    passed['ii'] = bool(rho_tail <= tail_limit and alpha_tail <= tail_limit)
    if not passed['ii']:
        messages.append(
            f"condition (ii): remainders do not level off (tail shares "
            f"{rho_tail:.3f} and {alpha_tail:.3f}, limit {tail_limit})"
        )

    cond_max = None
    if mode == GENERAL:
        try:
            seq = SpectralSequence.from_arrays(lams, alphas)
            table = solve_main_equation(RealGrid.uniform(probe_m),
                                        complete_data(seq))
            cond_max = float(table.cond.max())
            passed['iii'] = True
        except (SolvabilityError, DataError) as err:
            passed['iii'] = False
            messages.append(f"condition (iii): {err}")

    report = ValidationReport(
        mode, passed, messages, l2_remainder_norm(rho_r),
        l2_remainder_norm(alpha_r), rho_tail, alpha_tail, cond_max
    )
    if not report.ok:
        strictraise(strict, lambda msg: ValidationError(msg, report.failed()),
                    "; ".join(messages))
    return report
