"""
_forward.py

The direct problem: solutions of the quasi-derivative system, the
characteristic function, eigenvalues, weight numbers and the Weyl function of
the problem (sigma, H).

On a cell where sigma = s is constant the system

    u' = s u + v,    v' = -(lambda + s^2) u - s v

has the matrix A with trace 0 and determinant lambda, so A^2 = -lambda I and
exp(A t) = cos(rho t) I + sin(rho t)/rho A. Every solution below is built
from these exact cell propagators.
"""
import numpy as np
from attrs import field, frozen

from . import _global as g
from ._base import *
from ._base import _readonly
from ._exceptions import *

logger = g.get_logger(__name__)

FORWARD = 'forward'
BACKWARD = 'backward'


@frozen(eq=False)
class SolutionTrace:
    """
    A solution (y, y^[1]) sampled at the grid nodes for one value of lambda.

    :ivar grid: The grid.
    :ivar lam: The spectral parameter.
    :ivar y: y at the nodes.
    :ivar y1: The quasi-derivative y' - sigma y at the nodes.
    """

    grid: RealGrid
    lam: complex
    y: np.ndarray = field(converter=_readonly)
    y1: np.ndarray = field(converter=_readonly)

    def __attrs_post_init__(self):
        if self.y.shape != (len(self.grid),) or self.y1.shape != self.y.shape:
            raise ShapeError("Trace length does not match the grid.")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.y1))):
            raise RangeError(f"Non-finite solution for lambda = {self.lam}.")


@frozen
class CharacteristicSample:
    """
    :ivar lam: The spectral parameter.
    :ivar value: Delta(lam).
    :ivar dvalue: d/dlambda Delta(lam), by central difference.
    """

    lam: complex
    value: complex
    dvalue: complex


################################################################################
# Cell propagators.
################################################################################

def _check_range(lams):
    im = np.abs(np.imag(principal_rho(np.asarray(lams))))
    if np.any(im * np.pi > g.EXP_LIMIT):
        raise RangeError(
            f"|Im rho| * pi exceeds {g.EXP_LIMIT}; lambda is too far from the "
            "positive half-axis."
        )


def cell_coefficients(lams, h):
    """Return (cos(rho h), sin(rho h)/rho) for rho^2 = lams.

    Real lambdas give real values (hyperbolic functions for lambda < 0). A
    Taylor series in lambda h^2 replaces the closed forms near lambda = 0.

    :param lams: Spectral parameter(s).
    :param h: Step length, scalar or broadcastable against :param lams:.
    """
    lams = np.asarray(lams)
    h = np.asarray(h, dtype=float)
    x = lams * h * h
    if np.iscomplexobj(lams):
        rho = np.sqrt(lams.astype(complex))
        safe = np.where(rho == 0, 1.0, rho)
        c = np.cos(rho * h)
        s1 = np.sin(rho * h) / safe
    else:
        kap = np.sqrt(np.abs(lams))
        safe = np.where(kap == 0, 1.0, kap)
        pos = lams >= 0
        with np.errstate(over='ignore'):
            c = np.where(pos, np.cos(kap * h), np.cosh(kap * h))
            s1 = np.where(pos, np.sin(kap * h), np.sinh(kap * h)) / safe
    small = np.abs(x) < 1e-3
    if np.any(small):
        c_ser = 1 - x / 2 + x ** 2 / 24 - x ** 3 / 720
        s_ser = h * (1 - x / 6 + x ** 2 / 120 - x ** 3 / 5040)
        c = np.where(small, c_ser, c)
        s1 = np.where(small, s_ser, s1)
    return c, s1


def _step(u, v, s, lams, c, s1):
    return (c * u + s1 * (s * u + v),
            c * v + s1 * (-(lams + s * s) * u - s * v))


def _propagate(sigma: PotentialSigma, lams, y0, y10, direction=FORWARD,
               keep=True):
    # Vectorized over lams; returns node arrays of shape (len(lams), m + 1)
    # when keep is set, otherwise the values at the far end.
    lams = np.atleast_1d(np.asarray(lams))
    _check_range(lams)
    m = sigma.grid.m
    c, s1 = cell_coefficients(lams, sigma.grid.h)
    dtype = np.result_type(lams, sigma.values, y0, y10, float)
    u = np.full(lams.shape, y0, dtype=dtype)
    v = np.full(lams.shape, y10, dtype=dtype)
    if keep:
        us = np.empty((lams.size, m + 1), dtype=dtype)
        vs = np.empty_like(us)
    if direction == FORWARD:
        cells = range(m)
        sign = 1.0
        start = 0
    elif direction == BACKWARD:
        cells = range(m - 1, -1, -1)
        sign = -1.0
        start = m
    else:
        raise ValueError(f"Unknown direction '{direction}'.")
    if keep:
        us[:, start], vs[:, start] = u, v
    for k in cells:
        u, v = _step(u, v, sigma.values[k], lams, c, sign * s1)
        if keep:
            node = k + 1 if direction == FORWARD else k
            us[:, node], vs[:, node] = u, v
    if keep:
        return us, vs
    return u, v


def integrate_quasi_system(sigma: PotentialSigma, lam, init_y, init_y1,
                           direction: str = FORWARD) -> SolutionTrace:
    """Solve the quasi-derivative system with data given at x = 0 (forward)
    or at x = pi (backward).

    :param sigma: The potential.
    :type sigma: PotentialSigma
    :param lam: The spectral parameter.
    :param init_y: y at the starting end.
    :param init_y1: y^[1] at the starting end.
    :param direction: 'forward' or 'backward', defaults to 'forward'.
    :type direction: str, optional
    :raises RangeError: If the propagator would overflow.
    :rtype: SolutionTrace
    """
    us, vs = _propagate(sigma, lam, init_y, init_y1, direction)
    return SolutionTrace(sigma.grid, lam, us[0], vs[0])


def transfer_matrix(sigma: PotentialSigma, lam, a: float, b: float):
    """Return the 2x2 matrix taking (y, y^[1]) at :param a: to its value at
    :param b: (a <= b, both anywhere in [0, pi]).
    """
    _check_range(lam)
    pts = sigma.grid.points
    out = np.eye(2, dtype=np.result_type(lam, sigma.values, float))
    for k in range(sigma.grid.m):
        length = min(b, pts[k + 1]) - max(a, pts[k])
        if length <= 0:
            continue
        s = sigma.values[k]
        c, s1 = cell_coefficients(lam, length)
        step = np.array([[c + s1 * s, s1],
                         [-s1 * (lam + s * s), c - s1 * s]])
        out = step @ out
    return out


def solution_at(sigma: PotentialSigma, lam, init, x: float,
                direction: str = FORWARD):
    """Evaluate a solution at an arbitrary point :param x:.

    :param init: (y, y^[1]) at 0 (forward) or at pi (backward).
    :type init: tuple
    :return: (y(x), y^[1](x)).
    :rtype: tuple
    """
    init = np.asarray(init)
    if direction == FORWARD:
        y = transfer_matrix(sigma, lam, 0.0, x) @ init
    else:
        (p, q), (r, s) = transfer_matrix(sigma, lam, x, np.pi)
        y = np.array([[s, -q], [-r, p]]) @ init
    return y[0], y[1]


################################################################################
# The characteristic function and the spectrum.
################################################################################

def _phi_init(sigma):
    return 1.0, sigma.shift


def _delta(sigma, H, lams):
    u, v = _propagate(sigma, lams, *_phi_init(sigma), keep=False)
    return v + H * u


def _dstep(lam):
    return 1e-6 * np.maximum(1.0, np.abs(lam))


def _ddelta(sigma, H, lams):
    lams = np.atleast_1d(np.asarray(lams))
    eps = _dstep(lams)
    return (_delta(sigma, H, lams + eps) - _delta(sigma, H, lams - eps)) \
        / (2 * eps)


def characteristic(sigma: PotentialSigma, H, lam) -> CharacteristicSample:
    """Return Delta(lam) = phi^[1](pi, lam) + H phi(pi, lam) and its
    derivative in lambda.

    :raises RangeError: If the propagator would overflow.
    :rtype: CharacteristicSample
    """
    value = _delta(sigma, H, lam)[0]
    dvalue = _ddelta(sigma, H, lam)[0]
    return CharacteristicSample(lam, value, dvalue)


def _bisect(f, lo, hi, flo, tol):
    # Vectorized bisection over brackets with f(lo) * f(hi) < 0.
    lo = lo.copy()
    hi = hi.copy()
    flo = flo.copy()
    for _ in range(200):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        exact = fmid == 0
        left = (np.sign(fmid) == np.sign(flo)) & ~exact
        lo = np.where(left | exact, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _scan_zeros(f, z_lo, z_hi, count, step, tol, what):
    # Zeros of f(z) in [z_lo, z_hi]: bracket scan, then bisection.
    n_pts = int(np.ceil((z_hi - z_lo) / step)) + 1
    zs = np.linspace(z_lo, z_hi, n_pts)
    fs = f(zs)
    exact = zs[fs == 0]
    idx = np.nonzero(fs[:-1] * fs[1:] < 0)[0]
    logger.debug(f"{what}: {idx.size} brackets and {exact.size} node zeros "
                 f"on [{z_lo:.3f}, {z_hi:.3f}].")
    refined = _bisect(f, zs[idx], zs[idx + 1], fs[idx], tol) \
        if idx.size else np.empty(0)
    roots = np.sort(np.concatenate((exact, refined)))
    if roots.size < count:
        raise SearchWindowError(
            f"{what}: found {roots.size} zeros, {count} requested."
        )
    roots = roots[:count]
    gaps = np.diff(roots)
    if gaps.size and np.min(gaps) < g.MULTIPLICITY_TOL:
        k = int(np.argmin(gaps))
        raise MultiplicityError(
            f"{what}: zeros {roots[k]} and {roots[k + 1]} are closer than "
            f"{g.MULTIPLICITY_TOL}."
        )
    return roots


def negative_window(sigma: PotentialSigma, H) -> float:
    """Return Lambda_0: eigenvalues are searched in [-Lambda_0, infinity)."""
    return (1.0 + sigma.l2_norm() + abs(H) + abs(sigma.shift)) ** 2


def eigenvalues(sigma: PotentialSigma, H, count: int, step: float = None,
                tol: float = None) -> SpectralSequence:
    """Return the first :param count: eigenvalues of the self-adjoint problem.

    The scan variable z maps to lambda = z |z|, so z = rho for lambda >= 0 and
    z = -|rho| for negative eigenvalues; zeros are bracketed in z with width at
    most :param step: and bisected to width :param tol:.

    :param sigma: A real potential.
    :param H: A real boundary constant.
    :param count: Number of eigenvalues, at least 1.
    :raises SearchWindowError: If fewer than :param count: zeros are found or
        a zero may lie below the window.
    :raises MultiplicityError: If two zeros nearly coincide.
    :rtype: SpectralSequence
    """
    if step is None:
        step = g.SCAN_STEP
    if tol is None:
        tol = g.ROOT_TOL
    if count < 1:
        raise DataError("At least one eigenvalue must be requested.")
    if not sigma.is_real or np.iscomplexobj(H) or np.iscomplexobj(sigma.shift):
        raise DataError("The eigenvalue search needs real sigma and H.")

    lam0 = negative_window(sigma, H)
    if _delta(sigma, H, -lam0)[0] <= 0:
        raise SearchWindowError(
            f"Delta(-{lam0:.4g}) <= 0: an eigenvalue may lie below the "
            "search window."
        )

    def f(z):
        return _delta(sigma, H, z * np.abs(z))

    z_hi = count - 1 + 0.75
    roots = _scan_zeros(f, -np.sqrt(lam0), z_hi, count, step, tol,
                        'eigenvalues')
    lams = roots * np.abs(roots)
    logger.info(f"Found {count} eigenvalues, lambda_0 = {lams[0]:.6g}.")
    return SpectralSequence.from_arrays(lams)


def _phi_square_integral(sigma, lam, us, vs):
    # Exact int_0^pi phi^2 for the piecewise-constant sigma: on a cell,
    # phi = a cos(rho t) + b sin(rho t)/rho with a = u_k, b = s u_k + v_k.
    h = sigma.grid.h
    c, s1 = cell_coefficients(lam, h)
    x = lam * h * h
    if abs(x) < 1e-3:
        i_ss = h ** 3 / 3 - lam * h ** 5 / 15 + 2 * lam ** 2 * h ** 7 / 315 \
            - lam ** 3 * h ** 9 / 2835
    else:
        i_ss = (h - c * s1) / (2 * lam)
    i_cc = h / 2 + c * s1 / 2
    i_cs = s1 * s1 / 2
    a = us[:-1]
    b = sigma.values * us[:-1] + vs[:-1]
    return np.sum(a * a * i_cc + 2 * a * b * i_cs + b * b * i_ss)


def weight_numbers(sigma: PotentialSigma, lambdas: SpectralSequence, H=None,
                   full_output: bool = False):
    """Return the weight numbers alpha_n = (int_0^pi phi^2(x, lambda_n) dx)^-1.

    Each alpha_n is cross-checked against the residue formula
    -Psi(0, lambda_n) / Delta'(lambda_n).

    :param sigma: The potential.
    :param lambdas: Zeros of Delta.
    :param H: The boundary constant at pi. When omitted it is recovered from
        Delta(lambda_0) = 0.
    :param full_output: Also return the residue values and the largest
        relative discrepancy.
    :raises CrossCheckError: If the two formulas disagree by more than 1e-4.
    :rtype: SpectralSequence, or (SpectralSequence, ndarray, float)
    """
    lams = lambdas.lambdas
    us, vs = _propagate(sigma, lams, *_phi_init(sigma))
    if H is None:
        H = -vs[0, -1] / us[0, -1]
    alphas = np.array([1.0 / _phi_square_integral(sigma, lams[n], us[n], vs[n])
                       for n in range(lams.size)])

    psi0, _ = _propagate(sigma, lams, 1.0, -H, BACKWARD, keep=False)
    alpha_res = -psi0 / _ddelta(sigma, H, lams)
    discrepancy = np.abs(alphas - alpha_res) / np.abs(alphas)
    worst = float(np.max(discrepancy))
    logger.debug(f"Weight numbers: largest relative discrepancy {worst:.3e}.")
    if worst > g.CROSS_CHECK_TOL:
        n = int(np.argmax(discrepancy))
        raise CrossCheckError(
            f"alpha_{n}: integral formula {alphas[n]} and residue formula "
            f"{alpha_res[n]} disagree (relative {worst:.3e})."
        )
    if not np.iscomplexobj(lams):
        alphas = alphas.real
    out = lambdas.with_alphas(alphas)
    if full_output:
        return out, alpha_res, worst
    return out


def spectral_data(sigma: PotentialSigma, H, count: int, **kwargs):
    """Eigenvalues and weight numbers of (sigma, H), n = 0..count-1."""
    return weight_numbers(sigma, eigenvalues(sigma, H, count, **kwargs), H)


################################################################################
# The Weyl function.
################################################################################

def _psi0_delta(sigma, H, lam):
    psi0, _ = _propagate(sigma, lam, 1.0, -H, BACKWARD, keep=False)
    return psi0[0], _delta(sigma, H, lam)[0]


def weyl_value(sigma: PotentialSigma, H, lam):
    """Return M(lam) = -Psi(0, lam) / Delta(lam).

    :raises PoleProximityError: If lam is within a relative 1e-8 of an
        eigenvalue, judged from the Newton step |Delta / Delta'|.
    """
    psi0, delta = _psi0_delta(sigma, H, lam)
    ddelta = _ddelta(sigma, H, lam)[0]
    if abs(delta) <= g.POLE_TOL * max(1.0, abs(lam)) * abs(ddelta):
        raise PoleProximityError(
            f"lambda = {lam} is too close to an eigenvalue."
        )
    return -psi0 / delta


def weyl_solution(sigma: PotentialSigma, H, lam) -> SolutionTrace:
    """Return the Weyl solution Phi = S + M phi, with Phi^[1](0) - h Phi(0) = 1
    and Phi^[1](pi) + H Phi(pi) = 0.
    """
    M = weyl_value(sigma, H, lam)
    phi_u, phi_v = _propagate(sigma, lam, *_phi_init(sigma))
    s_u, s_v = _propagate(sigma, lam, 0.0, 1.0)
    return SolutionTrace(sigma.grid, lam, s_u[0] + M * phi_u[0],
                         s_v[0] + M * phi_v[0])


def model_weyl(lam):
    """M of the problem sigma = 0, H = 0: cos(rho pi) / (rho sin(rho pi))."""
    rho = principal_rho(complex(lam))
    if rho == 0:
        raise PoleProximityError("lambda = 0 is a pole of the model M.")
    val = np.cos(rho * np.pi) / (rho * np.sin(rho * np.pi))
    return val.real if np.isrealobj(lam) else val


def weyl_series(data: SpectralSequence, lam, tail: bool = True):
    """Partial pole series sum_n alpha_n / (lam - lambda_n) of M.

    With :param tail: the model terms n > N are added in closed form,
    M~(lam) - sum_{n <= N} alpha~_n / (lam - n^2).
    """
    lams = data.lambdas
    total = np.sum(data.alphas / (lam - lams))
    if tail:
        n = np.arange(len(data))
        model_alpha = np.where(n == 0, 1.0 / np.pi, 2.0 / np.pi)
        total += model_weyl(lam) - np.sum(model_alpha / (lam - n ** 2))
    return total


def wronskian_check(sigma: PotentialSigma, H, lam, x: float):
    """Return phi Phi^[1] - phi^[1] Phi at :param x:, which must equal 1."""
    M = weyl_value(sigma, H, lam)
    phi, phi1 = solution_at(sigma, lam, _phi_init(sigma), x)
    s, s1 = solution_at(sigma, lam, (0.0, 1.0), x)
    big_phi, big_phi1 = s + M * phi, s1 + M * phi1
    return phi * big_phi1 - phi1 * big_phi


################################################################################
# Asymptotics.
################################################################################

@frozen(eq=False)
class RemainderReport:
    """
    Remainders of rho_n = n + kappa_n and alpha_n = 2/pi + kappa_n.

    :ivar rho_remainders: rho_n - n.
    :ivar alpha_remainders: alpha_n - 2/pi.
    :ivar rho_norm: l2 norm of the rho remainders.
    :ivar alpha_norm: l2 norm of the alpha remainders.
    :ivar rho_tail_fraction: Share of the norm contributed by the last half
        of the indices, (||r|| - ||r_first half||) / ||r||.
    :ivar alpha_tail_fraction: The same for the alpha remainders.
    :ivar interlacing_from: Smallest n0 with rho_n in (n - 1/2, n + 1/2) for
        every n >= n0, or None.
    """

    rho_remainders: np.ndarray = field(converter=_readonly)
    alpha_remainders: np.ndarray = field(converter=_readonly)
    rho_norm: float
    alpha_norm: float
    rho_tail_fraction: float
    alpha_tail_fraction: float
    interlacing_from: int = None

    def plateaued(self, limit: float = 0.25) -> bool:
        return self.rho_tail_fraction <= limit \
            and self.alpha_tail_fraction <= limit


def tail_fraction(seq) -> float:
    """(||seq|| - ||first half of seq||) / ||seq||, or 0 for a zero sequence."""
    full = l2_remainder_norm(seq)
    if full == 0:
        return 0.0
    half = l2_remainder_norm(np.asarray(seq)[:(len(seq) + 1) // 2])
    return (full - half) / full


def asymptotic_remainders(data: SpectralSequence) -> RemainderReport:
    """Return the remainders of the eigenvalue and weight asymptotics."""
    n = np.arange(len(data))
    rho_r = data.rhos - n
    alpha_r = data.alphas - 2.0 / np.pi
    inside = np.abs(rho_r) < 0.5
    outside = np.nonzero(~inside)[0]
    n0 = 0 if outside.size == 0 else int(outside[-1]) + 1
    return RemainderReport(
        rho_r, alpha_r,
        l2_remainder_norm(rho_r), l2_remainder_norm(alpha_r),
        tail_fraction(rho_r), tail_fraction(alpha_r),
        n0 if n0 < len(data) else None
    )
