"""
_base.py

Base classes and shared numerics: the x-grid, the potential sigma, the spectral
data records, and the quadratures every other module builds on.
"""
import numpy as np
from attrs import field, frozen
from scipy import integrate

from . import _global as g
from ._exceptions import *

logger = g.get_logger(__name__)

MEASURED = 'measured'
MODEL_TAIL = 'model-tail'
SOURCES = (MEASURED, MODEL_TAIL)


def strictraise(strict, err, msg):
    """Raise :param err: with :param msg: when :param strict: is set, otherwise
    log the message as a warning and carry on.
    """
    if strict:
        raise err(msg)
    else:
        logger.warning(msg)


def _readonly(a):
    arr = np.array(a)
    if arr.dtype.kind not in 'fc':
        arr = arr.astype(float)
    arr.flags.writeable = False
    return arr


def _readonly_int(a):
    arr = np.array(a, dtype=int)
    arr.flags.writeable = False
    return arr


def principal_rho(lam):
    """Return rho with rho**2 = lam and arg rho in [-pi/2, pi/2).

    Real nonnegative lam gives a real rho; negative lam gives -i sqrt(-lam).
    Works elementwise on arrays.

    :param lam: Spectral parameter(s).
    :type lam: scalar or numpy.ndarray
    :rtype: scalar or numpy.ndarray
    """
    lam_arr = np.asarray(lam)
    if not np.iscomplexobj(lam_arr) and np.all(lam_arr >= 0):
        rho = np.sqrt(lam_arr.astype(float))
    else:
        rho = np.sqrt(lam_arr.astype(complex))
        # numpy returns arg in (-pi/2, pi/2]; move the upper edge down.
        rho = np.where((rho.real == 0) & (rho.imag > 0), -rho, rho)
    if np.ndim(lam) == 0:
        return rho[()]
    return rho


################################################################################
# Grids and potentials.
################################################################################

@frozen(eq=False)
class RealGrid:
    """
    A uniform grid on [0, pi].

    :ivar points: The grid nodes, ``points[0] = 0`` and ``points[-1] = pi``.
    """

    points: np.ndarray = field(converter=_readonly)

    @points.validator
    def _check(self, attribute, value):
        if value.ndim != 1 or value.size < 9:
            raise ShapeError("A grid needs at least 8 cells.")
        if value[0] != 0.0 or abs(value[-1] - np.pi) > 1e-12 * np.pi:
            raise ShapeError("A grid must run from 0 to pi.")
        steps = np.diff(value)
        h = np.pi / steps.size
        if np.max(np.abs(steps - h)) > 1e-12 * h:
            raise ShapeError("Grid spacing is not uniform.")

    @classmethod
    def uniform(cls, m: int = None):
        """Return the grid of :param m: equal cells on [0, pi].

        :param m: Number of cells, defaults to SPECTRALMAP_GRID_M.
        :type m: int, optional
        :rtype: RealGrid
        """
        if m is None:
            m = g.GRID_M
        pts = np.linspace(0.0, np.pi, m + 1)
        pts[-1] = np.pi
        return cls(pts)

    @property
    def m(self) -> int:
        return self.points.size - 1

    @property
    def h(self) -> float:
        return np.pi / self.m

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.points[1:] + self.points[:-1])

    def __len__(self):
        return self.points.size

    def same_as(self, other) -> bool:
        return self.m == other.m

    def index_of(self, x: float) -> int:
        """Return the index of the node at :param x:, raising a ShapeError if
        :param x: is not (to rounding) a grid node.
        """
        k = int(round(x / self.h))
        if k < 0 or k > self.m or abs(self.points[k] - x) > 1e-9:
            raise ShapeError(f"x = {x} is not a node of the grid.")
        return k


@frozen(eq=False)
class PotentialSigma:
    """
    The antiderivative sigma of a singular potential q = sigma', constant on
    each cell of a grid.

    :ivar grid: The grid the cells belong to.
    :ivar values: One value per cell.
    :ivar shift: A constant absorbed into the boundary condition at 0.
    """

    grid: RealGrid
    values: np.ndarray = field(converter=_readonly)
    shift: float = 0.0

    @values.validator
    def _check(self, attribute, value):
        if value.ndim != 1 or value.size != self.grid.m:
            raise ShapeError(
                f"Expected {self.grid.m} cell values, got {value.size}."
            )
        if not np.all(np.isfinite(value)):
            raise DataError("Sigma values must be finite.")

    @classmethod
    def from_function(cls, grid: RealGrid, func, shift: float = 0.0):
        """Build sigma from the cell averages of :param func:, computed with a
        four-point Gauss-Legendre rule on each cell.

        :param grid: The grid.
        :type grid: RealGrid
        :param func: A vectorized function of x.
        :type func: callable
        :rtype: PotentialSigma
        """
        nodes, weights = np.polynomial.legendre.leggauss(4)
        left = grid.points[:-1, None]
        xs = left + 0.5 * grid.h * (nodes[None, :] + 1.0)
        vals = np.asarray(func(xs)) * np.ones_like(xs)
        return cls(grid, 0.5 * vals @ weights, shift)

    @classmethod
    def constant(cls, grid: RealGrid, c: float):
        return cls(grid, np.full(grid.m, c, dtype=float))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def cell_of(self, x):
        """Index of the cell containing :param x: (the last cell for pi)."""
        k = np.floor(np.asarray(x) / self.grid.h).astype(int)
        return np.clip(k, 0, self.grid.m - 1)

    def interp(self, x):
        """Linear interpolation of the cell values through the midpoints."""
        return np.interp(x, self.grid.midpoints, self.values)

    def node_values(self) -> np.ndarray:
        return self.interp(self.grid.points)

    def square_integral(self, y):
        """Return int_0^y sigma(s)^2 ds, exact for the piecewise-constant
        sigma, elementwise in :param y:.
        """
        sq = self.values ** 2
        cum = np.concatenate(([0.0], np.cumsum(sq) * self.grid.h))
        y = np.asarray(y, dtype=float)
        k = self.cell_of(y)
        return cum[k] + (y - self.grid.points[k]) * sq[k]


################################################################################
# Spectral data.
################################################################################

@frozen(eq=False)
class SpectralDatum:
    """
    A single eigenvalue with its weight number.

    :ivar lam: The eigenvalue lambda_n.
    :ivar alpha: The weight number alpha_n, or None when only the eigenvalue is
        known.
    :ivar rho: The root of lam with arg in [-pi/2, pi/2).
    :ivar source: 'measured' or 'model-tail'.
    """

    lam: complex
    alpha: complex = None
    rho: complex = field()
    source: str = MEASURED

    @rho.default
    def _rho_default(self):
        return principal_rho(self.lam)

    def __attrs_post_init__(self):
        if abs(self.rho ** 2 - self.lam) > 1e-12 * max(1.0, abs(self.lam)):
            raise DataError(f"rho^2 != lambda for lambda = {self.lam}.")
        if self.alpha is not None and self.alpha == 0:
            raise ValidationError(
                f"Weight number of lambda = {self.lam} is zero.",
                failed=('i',)
            )
        if self.source not in SOURCES:
            raise DataError(f"Unknown source '{self.source}'.")

    def as_dict(self, n: int) -> dict:
        return {'n': n, 'lambda': self.lam, 'alpha': self.alpha,
                'source': self.source}


@frozen(eq=False)
class SpectralSequence:
    """
    Spectral data {(lambda_n, alpha_n)}, n = 0..N.

    Real data are kept sorted by lambda. When ``all_simple`` is set, the
    eigenvalues must be pairwise distinct.

    :ivar data: The records, indexed by n.
    :ivar all_simple: Whether distinctness is enforced.
    """

    data: tuple = field(converter=tuple)
    all_simple: bool = True

    @data.validator
    def _check(self, attribute, value):
        lams = np.array([d.lam for d in value])
        if lams.size == 0:
            raise DataError("A spectral sequence needs at least one entry.")
        if not np.iscomplexobj(lams) and np.any(np.diff(lams) < 0):
            raise DataError("Real eigenvalues must be nondecreasing.")
        if self.all_simple and _has_duplicates(lams):
            raise ValidationError("Eigenvalues are not pairwise distinct.",
                                  failed=('i',))

    @classmethod
    def from_arrays(cls, lambdas, alphas=None, sources=None,
                    all_simple: bool = True):
        """Build a sequence from parallel arrays.

        :param lambdas: The eigenvalues.
        :param alphas: The weight numbers, or None.
        :param sources: Source flag per entry, defaults to all 'measured'.
        :rtype: SpectralSequence
        """
        n = len(lambdas)
        if alphas is not None and len(alphas) != n:
            raise ShapeError("lambdas and alphas differ in length.")
        if sources is None:
            sources = [MEASURED] * n
        data = []
        for k in range(n):
            a = None if alphas is None else _scalar(alphas[k])
            data.append(SpectralDatum(_scalar(lambdas[k]), a,
                                      source=sources[k]))
        return cls(data, all_simple)

    def __len__(self):
        return len(self.data)

    def __getitem__(self, n):
        return self.data[n]

    @property
    def N(self) -> int:
        return len(self.data) - 1

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([d.lam for d in self.data])

    @property
    def alphas(self) -> np.ndarray:
        if not self.has_alphas:
            raise DataError("Sequence carries no weight numbers.")
        return np.array([d.alpha for d in self.data])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([d.rho for d in self.data])

    @property
    def has_alphas(self) -> bool:
        return all(d.alpha is not None for d in self.data)

    def with_alphas(self, alphas):
        return SpectralSequence.from_arrays(
            self.lambdas, alphas, [d.source for d in self.data],
            self.all_simple
        )

    def truncated(self, N: int):
        """Return the entries n = 0..N."""
        if N + 1 > len(self.data):
            raise ShapeError(f"Sequence has only {len(self.data)} entries.")
        return SpectralSequence(self.data[:N + 1], self.all_simple)

    def as_dict(self) -> list:
        return [d.as_dict(n) for n, d in enumerate(self.data)]


def _scalar(v):
    v = complex(v) if np.iscomplexobj(v) else float(v)
    if isinstance(v, complex) and v.imag == 0:
        return v.real
    return v


def _has_duplicates(lams) -> bool:
    order = np.argsort(lams.real, kind='stable') if np.iscomplexobj(lams) \
        else np.argsort(lams, kind='stable')
    s = lams[order]
    return bool(np.any(s[1:] == s[:-1]))


################################################################################
# Quadrature and norms.
################################################################################

def integrate_grid(samples, grid: RealGrid):
    """Composite trapezoid integral over [0, pi] of values at the grid nodes.

    :param samples: One sample per node.
    :type samples: array_like
    :param grid: The grid.
    :type grid: RealGrid
    :return: The integral.
    :rtype: scalar
    """
    samples = np.asarray(samples)
    if samples.shape[-1] != len(grid):
        raise ShapeError(
            f"{samples.shape[-1]} samples for a grid of {len(grid)} nodes."
        )
    return integrate.trapezoid(samples, dx=grid.h, axis=-1)


def cumulative_grid(samples, grid: RealGrid) -> np.ndarray:
    """Running trapezoid integral int_0^{x_k}, one value per node."""
    samples = np.asarray(samples)
    if samples.shape[-1] != len(grid):
        raise ShapeError(
            f"{samples.shape[-1]} samples for a grid of {len(grid)} nodes."
        )
    return integrate.cumulative_trapezoid(samples, dx=grid.h, axis=-1,
                                          initial=0)


def l2_remainder_norm(seq) -> float:
    """Return the l2 norm (sum |seq_n|^2)^(1/2) of a finite sequence."""
    seq = np.asarray(seq)
    if seq.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(seq) ** 2)))


def sigma_l2_distance(a: PotentialSigma, b: PotentialSigma) -> float:
    """L2(0, pi) distance of two piecewise-constant potentials on one grid.

    :raises ShapeError: If the grids differ.
    """
    if not a.grid.same_as(b.grid):
        raise ShapeError("Potentials live on different grids.")
    return float(np.sqrt(a.grid.h * np.sum(np.abs(a.values - b.values) ** 2)))


def _e1(z):
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    out = np.expm1(zs) / zs
    series = 1 + z / 2 + z ** 2 / 6 + z ** 3 / 24 + z ** 4 / 120
    return np.where(small, series, out)


def _e2(z):
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    out = (np.exp(zs) * (zs - 1) + 1) / zs ** 2
    series = 0.5 + z / 3 + z ** 2 / 8 + z ** 3 / 30 + z ** 4 / 144
    return np.where(small, series, out)


def _exp_moment(f, h, rho):
    # int_0^{kh} f(t) exp(i rho t) dt for the piecewise-linear interpolant of
    # f; rows follow rho, the result is complex.
    f = np.asarray(f)
    rho = np.atleast_1d(np.asarray(rho, dtype=complex))[:, None]
    k = np.arange(f.size - 1)[None, :]
    z = 1j * rho * h
    cell = np.exp(z * k) * (f[None, :-1] * _e1(z) + np.diff(f)[None, :] * _e2(z))
    return h * np.sum(cell, axis=1)


def trig_moments(f, h: float, rho):
    """Return (int f(t) cos(rho t) dt, int f(t) sin(rho t) dt) over
    [0, (len(f) - 1) h], exact for the piecewise-linear interpolant of the
    samples :param f:.

    :param f: Samples at t = 0, h, 2h, ...
    :type f: array_like
    :param h: Node spacing.
    :type h: float
    :param rho: One value or an array of frequencies.
    :return: Two arrays (or scalars) following the shape of :param rho:.
    """
    f = np.asarray(f)
    if f.size < 2:
        z = np.zeros(np.shape(rho))
        return (z[()], z[()]) if np.ndim(rho) == 0 else (z, z)
    plus = _exp_moment(f, h, rho)
    minus = _exp_moment(f, h, -np.asarray(rho, dtype=complex))
    c = 0.5 * (plus + minus)
    s = (plus - minus) / 2j
    if not np.iscomplexobj(f) and not np.iscomplexobj(rho):
        c, s = c.real, s.real
    if np.ndim(rho) == 0:
        return c[0], s[0]
    return c, s
