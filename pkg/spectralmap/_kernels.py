"""
_kernels.py

Transformation-operator kernels. The solution phi and its quasi-derivative
are written as

    phi(x, lambda)     = cos(rho x) + int_0^x K(x, t) cos(rho t) dt,
    phi^[1](x, lambda) = -rho sin(rho x) + rho int_0^x N(x, t) sin(rho t) dt
                         + C(x),

and the triple (K, N, C) is obtained by Picard iteration of a Volterra system
on the triangle 0 <= t <= x <= pi. Kernels are stored as (m + 1) x (m + 1)
arrays indexed [x, t]; entries above the diagonal are zero.
"""
import numpy as np
from attrs import field, frozen
from scipy import integrate

from . import _global as g
from ._base import *
from ._base import _readonly
from ._exceptions import *

logger = g.get_logger(__name__)


@frozen(eq=False)
class KernelTriple:
    """
    Samples of the kernels on the triangle of grid nodes.

    :ivar grid: The grid.
    :ivar K: K[i, j] = K(x_i, t_j), zero for j > i.
    :ivar Nk: Nk[i, j] = N(x_i, t_j), zero for j > i.
    :ivar C: C(x_i).
    :ivar iterations: Number of Picard steps summed.
    :ivar residual: Largest sup norm of the last term.
    """

    grid: RealGrid
    K: np.ndarray = field(converter=_readonly)
    Nk: np.ndarray = field(converter=_readonly)
    C: np.ndarray = field(converter=_readonly)
    iterations: int = 0
    residual: float = 0.0

    def __attrs_post_init__(self):
        n = len(self.grid)
        if self.K.shape != (n, n) or self.Nk.shape != (n, n) \
                or self.C.shape != (n,):
            raise ShapeError("Kernel arrays do not match the grid.")
        if not (np.all(np.isfinite(self.K)) and np.all(np.isfinite(self.Nk))
                and np.all(np.isfinite(self.C))):
            raise DivergenceError("Kernel samples are not finite.")

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.K)), np.max(np.abs(self.Nk)),
                         np.max(np.abs(self.C))))


@frozen(eq=False)
class PDRepresentation:
    """
    The pair (P, D) with

        Delta(lambda) = -rho sin(rho pi) + rho int_0^pi P(t) sin(rho t) dt + D.

    :ivar grid: The grid P is sampled on.
    :ivar P: P at the grid nodes.
    :ivar D: The constant D.
    """

    grid: RealGrid
    P: np.ndarray = field(converter=_readonly)
    D: float = 0.0

    @P.validator
    def _check(self, attribute, value):
        if value.shape != (len(self.grid),):
            raise ShapeError("P must have one sample per grid node.")
        if not np.all(np.isfinite(value)):
            raise DataError("P must be finite.")

    def l2_norm(self) -> float:
        return float(np.sqrt(integrate_grid(np.abs(self.P) ** 2, self.grid)))


def _check_sigma(sigma):
    if not sigma.is_real:
        raise DataError("Kernels are built for real sigma only.")
    if sigma.shift != 0:
        raise DataError("Kernels assume the boundary condition phi^[1](0) = 0.")


def _lower(grid):
    i = np.arange(len(grid))
    return i[:, None] >= i[None, :]


def initial_kernels(sigma: PotentialSigma) -> KernelTriple:
    """Return the free terms (K0, N0, C0) of the Volterra system.

    Values of sigma at (x +- t)/2 come from linear interpolation through the
    cell midpoints; integrals of sigma^2 are exact for the cell values.

    :param sigma: A real potential with zero shift.
    :type sigma: PotentialSigma
    :rtype: KernelTriple
    """
    _check_sigma(sigma)
    grid = sigma.grid
    x = grid.points[:, None]
    t = grid.points[None, :]
    lower = _lower(grid)
    t = np.where(lower, t, 0.0)
    plus = sigma.interp((x + t) / 2)
    minus = sigma.interp((x - t) / 2)
    s_x = sigma.square_integral(x)
    s_plus = sigma.square_integral((x + t) / 2)
    s_minus = sigma.square_integral((x - t) / 2)

    K0 = 0.5 * plus + 0.5 * minus - 0.5 * s_x \
        - 0.5 * (s_minus - (s_x - s_plus))
    N0 = 0.5 * plus - 0.5 * minus + 0.5 * s_x \
        + 0.5 * (s_minus + s_x - s_plus)
    C0 = -sigma.square_integral(grid.points)
    return KernelTriple(grid, np.where(lower, K0, 0.0),
                        np.where(lower, N0, 0.0), C0,
                        residual=float(max(np.max(np.abs(K0[lower])),
                                           np.max(np.abs(N0[lower])),
                                           np.max(np.abs(C0)))))


################################################################################
# Line integrals over the triangle.
################################################################################

def _along_subdiagonals(F, w, h):
    # out[i, j] = int_{x-t}^{x} F(s, s - x + t) w(s) ds, trapezoid along the
    # subdiagonal i - j = d.
    n = F.shape[0]
    out = np.zeros_like(F)
    for d in range(n):
        k = np.arange(n - d)
        vals = F[d + k, k] * w[d + k]
        out[d + k, k] = integrate.cumulative_trapezoid(vals, dx=h, initial=0)
    return out


def _along_antidiagonals(F, w, w_cell, h):
    # out[i, j] = int_{(x+t)/2}^{x} F(s, x + t - s) w(s) ds, trapezoid along
    # the antidiagonal i + j = e starting at the diagonal.
    n = F.shape[0]
    out = np.zeros_like(F)
    for e in range(2 * n - 1):
        k0 = (e + 1) // 2
        k = np.arange(k0, min(e, n - 1) + 1)
        if k.size == 0:
            continue
        vals = F[k, e - k] * w[k]
        cum = integrate.cumulative_trapezoid(vals, dx=h, initial=0)
        if e % 2:
            # The path starts at the middle of cell k0 - 1.
            start = 0.5 * (F[k0 - 1, k0 - 1] + F[k0, k0]) * w_cell[k0 - 1]
            cum = cum + 0.25 * h * (start + vals[0])
        out[k, e - k] = cum
    return out


def _line_integrals(F, w, w_cell, h):
    # The three segment integrals of the system for the kernel F with weight
    # w, evaluated at every node (x, t) of the triangle.
    t1 = _along_subdiagonals(F, w, h)
    t3 = _along_antidiagonals(F, w, w_cell, h)
    i = np.arange(F.shape[0])
    d = np.clip(i[:, None] - i[None, :], 0, None)
    t2 = t3[d, 0]
    return t1, t2, t3


def picard_step(current: KernelTriple, sigma: PotentialSigma,
                reference: float = None) -> KernelTriple:
    """Apply the integral operators of the Volterra system to
    :param current: and return the next term of the series.

    :param current: The previous term (K_n, N_n, C_n).
    :type current: KernelTriple
    :param sigma: The potential, on the same grid.
    :type sigma: PotentialSigma
    :param reference: Residual of the first term; when given, a residual
        more than 1e3 times larger raises an error.
    :type reference: float, optional
    :raises DivergenceError: If the residual grows beyond the limit.
    :rtype: KernelTriple
    """
    _check_sigma(sigma)
    grid = current.grid
    if not grid.same_as(sigma.grid):
        raise ShapeError("Kernels and sigma live on different grids.")
    h = grid.h
    lower = _lower(grid)
    w1 = sigma.node_values()
    w1_cell = sigma.values
    w2_cell = sigma.values ** 2
    w2 = np.interp(grid.points, grid.midpoints, w2_cell)

    t1k, t2k, t3k = _line_integrals(current.K, w1, w1_cell, h)
    t1n, t2n, t3n = _line_integrals(current.Nk, w1, w1_cell, h)
    g1, g2, g3 = _line_integrals(current.K, w2, w2_cell, h)

    # int_t^x dxi of the sigma^2 terms, from row-wise running integrals.
    cum_minus = integrate.cumulative_trapezoid(
        np.where(lower, g1 + g2 - g3, 0.0), dx=h, axis=1, initial=0)
    cum_plus = integrate.cumulative_trapezoid(
        np.where(lower, g1 + g2 + g3, 0.0), dx=h, axis=1, initial=0)
    diag_minus = np.diag(cum_minus)[:, None]
    diag_plus = np.diag(cum_plus)[:, None]
    outer_minus = diag_minus - cum_minus
    outer_plus = diag_plus - cum_plus

    c_cum = cumulative_grid(current.C * w1, grid)
    i = np.arange(len(grid))
    c_shift = c_cum[np.clip(i[:, None] - i[None, :], 0, None)]

    K = 0.5 * (t1k + t2k + t3k) - 0.5 * outer_minus \
        + 0.5 * t1n - 0.5 * t2n - 0.5 * t3n - c_shift
    Nk = -0.5 * t1k - 0.5 * t2k + 0.5 * t3k + 0.5 * outer_plus \
        - 0.5 * t1n + 0.5 * t2n - 0.5 * t3n + c_shift
    C = -0.5 * np.diag(cum_plus) - c_cum

    K = np.where(lower, K, 0.0)
    Nk = np.where(lower, Nk, 0.0)
    residual = float(max(np.max(np.abs(K)), np.max(np.abs(Nk)),
                         np.max(np.abs(C))))
    if reference is not None and reference > 0 \
            and residual > g.PICARD_DIVERGENCE * reference:
        raise DivergenceError(
            f"Picard residual {residual:.3e} exceeds "
            f"{g.PICARD_DIVERGENCE:g} x the initial {reference:.3e}; refine "
            "the grid."
        )
    return KernelTriple(grid, K, Nk, C, current.iterations + 1, residual)


def build_kernels(sigma: PotentialSigma, tol: float = None,
                  max_iter: int = None) -> KernelTriple:
    """Sum the Picard series for (K, N, C) until the last term's sup norm
    drops below :param tol:.

    :param sigma: A real potential with zero shift.
    :type sigma: PotentialSigma
    :param tol: Stopping tolerance, defaults to SPECTRALMAP_PICARD_TOL.
    :type tol: float, optional
    :param max_iter: Iteration budget, defaults to
        SPECTRALMAP_PICARD_MAX_ITER.
    :type max_iter: int, optional
    :raises DataError: If tol or max_iter is not positive.
    :raises IterationBudgetError: If the budget runs out.
    :raises DivergenceError: If the iterates grow.
    :rtype: KernelTriple
    """
    if tol is None:
        tol = g.PICARD_TOL
    if max_iter is None:
        max_iter = g.PICARD_MAX_ITER
    if tol <= 0:
        raise DataError(f"tol must be positive, got {tol:g}.")
    if max_iter < 1:
        raise DataError(f"max_iter must be at least 1, got {max_iter}.")

    term = initial_kernels(sigma)
    reference = term.residual
    K, Nk, C = term.K.copy(), term.Nk.copy(), term.C.copy()
    for it in range(1, max_iter + 1):
        term = picard_step(term, sigma, reference)
        K += term.K
        Nk += term.Nk
        C += term.C
        logger.debug(f"Picard step {it}: residual {term.residual:.3e}.")
        if term.residual < tol:
            logger.info(f"Kernels converged in {it} iterations.")
            return KernelTriple(sigma.grid, K, Nk, C, it, term.residual)
    raise IterationBudgetError(
        f"Picard iteration did not reach {tol:g} in {max_iter} steps "
        f"(residual {term.residual:.3e})."
    )


################################################################################
# Using the kernels.
################################################################################

def _real_if(val, lam):
    return val.real if np.isrealobj(lam) else val


def rep_phi(kernels: KernelTriple, lam, x: float):
    """Return (phi(x, lam), phi^[1](x, lam)) from the kernel representation.

    :param x: A grid node.
    :raises ShapeError: If x is not a grid node.
    :rtype: tuple
    """
    grid = kernels.grid
    i = grid.index_of(x)
    x = grid.points[i]
    rho = complex(principal_rho(lam))
    kc, _ = trig_moments(kernels.K[i, :i + 1], grid.h, rho)
    _, ns = trig_moments(kernels.Nk[i, :i + 1], grid.h, rho)
    phi = np.cos(rho * x) + kc
    phi1 = -rho * np.sin(rho * x) + rho * ns + kernels.C[i]
    return _real_if(phi, lam), _real_if(phi1, lam)


def delta_representation(kernels: KernelTriple, sigma: PotentialSigma,
                         H) -> PDRepresentation:
    """Return (P, D) with P(t) = N(pi, t) - H (1 + int_t^pi K(pi, s) ds) and
    D = C(pi) + H (1 + int_0^pi K(pi, s) ds).
    """
    if not kernels.grid.same_as(sigma.grid):
        raise ShapeError("Kernels and sigma live on different grids.")
    k_last = kernels.K[-1]
    cum = cumulative_grid(k_last, kernels.grid)
    tail = cum[-1] - cum
    P = kernels.Nk[-1] - H * (1.0 + tail)
    D = kernels.C[-1] + H * (1.0 + cum[-1])
    return PDRepresentation(kernels.grid, P, D)


def kernel_row_norms(kernels: KernelTriple):
    """Return (||K(x_i, .)||, ||N(x_i, .)||) in L2(0, x_i) for every node."""
    h = kernels.grid.h
    k2 = integrate.cumulative_trapezoid(kernels.K ** 2, dx=h, axis=1,
                                        initial=0)
    n2 = integrate.cumulative_trapezoid(kernels.Nk ** 2, dx=h, axis=1,
                                        initial=0)
    return np.sqrt(np.diag(k2)), np.sqrt(np.diag(n2))


def kernel_rows(kernels: KernelTriple):
    """Yield (x, t, K, N) for every node of the triangle."""
    pts = kernels.grid.points
    for i in range(len(pts)):
        for j in range(i + 1):
            yield pts[i], pts[j], kernels.K[i, j], kernels.Nk[i, j]


def c_rows(kernels: KernelTriple):
    """Yield (x, C) for every node."""
    for x, c in zip(kernels.grid.points, kernels.C):
        yield x, c
