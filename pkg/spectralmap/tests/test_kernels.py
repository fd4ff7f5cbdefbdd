import numpy as np
import pytest

import spectralmap as sm


@pytest.fixture(scope="module")
def sigma04(grid):
    return sm.PotentialSigma.constant(grid, 0.4)


@pytest.fixture(scope="module")
def kernels04(sigma04):
    return sm.build_kernels(sigma04)


def _triangle(grid):
    i = np.arange(len(grid))
    return i[:, None] >= i[None, :]


def test_initial_kernels_zero(sigma_zero):
    term = sm.initial_kernels(sigma_zero)
    assert term.sup_norm() == 0.0
    assert term.residual == 0.0


def test_initial_kernels_constant(grid):
    c = 0.4
    term = sm.initial_kernels(sm.PotentialSigma.constant(grid, c))
    lower = _triangle(grid)
    x = np.broadcast_to(grid.points[:, None], lower.shape)
    assert np.max(np.abs(term.K[lower] - (c - c * c * x[lower] / 2))) <= 1e-10
    assert np.max(np.abs(term.C + c * c * grid.points)) <= 1e-10
    assert np.all(term.K[~lower] == 0)
    assert np.all(term.Nk[~lower] == 0)


def test_picard_step_zero_inputs(grid, sigma04, sigma_zero):
    zero = sm.KernelTriple(grid, np.zeros((201, 201)), np.zeros((201, 201)),
                           np.zeros(201))
    nxt = sm.picard_step(zero, sigma04)
    assert nxt.sup_norm() == 0.0
    assert nxt.iterations == 1

    rng = np.random.default_rng(3)
    lower = _triangle(grid)
    noise = sm.KernelTriple(grid, np.where(lower, rng.random((201, 201)), 0),
                            np.where(lower, rng.random((201, 201)), 0),
                            rng.random(201))
    assert sm.picard_step(noise, sigma_zero).sup_norm() == 0.0


def test_picard_residuals_decay(sigma04):
    term = sm.initial_kernels(sigma04)
    residuals = [term.residual]
    for _ in range(8):
        term = sm.picard_step(term, sigma04)
        residuals.append(term.residual)
    for n in range(3, 8):
        assert residuals[n + 1] <= 0.8 * residuals[n]


def test_build_kernels_zero(sigma_zero):
    triple = sm.build_kernels(sigma_zero)
    assert triple.iterations == 1
    assert triple.sup_norm() == 0.0


def test_build_kernels_constant(grid, kernels04):
    # For constant c the kernels are K = c, N = c^2 (x - t), C = -c^2 x.
    c = 0.4
    assert 1 <= kernels04.iterations <= 25
    assert kernels04.residual < 1e-8
    lower = _triangle(grid)
    x = np.broadcast_to(grid.points[:, None], lower.shape)
    t = np.broadcast_to(grid.points[None, :], lower.shape)
    assert np.max(np.abs(kernels04.K[lower] - c)) <= 5e-3
    assert np.max(np.abs(kernels04.Nk[lower]
                         - c * c * (x[lower] - t[lower]))) <= 5e-3
    assert np.max(np.abs(kernels04.C + c * c * grid.points)) <= 5e-3


def test_build_kernels_budget(sigma04):
    with pytest.raises(sm.IterationBudgetError):
        sm.build_kernels(sigma04, tol=1e-8, max_iter=2)
    with pytest.raises(sm.DataError):
        sm.build_kernels(sigma04, tol=0.0)
    with pytest.raises(sm.DataError):
        sm.build_kernels(sigma04, max_iter=0)


def test_build_kernels_divergence(monkeypatch, sigma04):
    monkeypatch.setattr(sm.g, 'PICARD_DIVERGENCE', 1e-6)
    with pytest.raises(sm.DivergenceError):
        sm.build_kernels(sigma04)


def test_build_kernels_large_sigma_fails():
    grid = sm.RealGrid.uniform(32)
    with pytest.raises(sm.NumericalError):
        sm.build_kernels(sm.PotentialSigma.constant(grid, 10.0))


def test_kernels_refuse_shift_and_complex(grid):
    with pytest.raises(sm.DataError):
        sm.initial_kernels(sm.PotentialSigma(grid, np.zeros(grid.m), 0.5))
    with pytest.raises(sm.DataError):
        sm.initial_kernels(sm.PotentialSigma(grid, np.full(grid.m, 1j)))


def test_rep_phi_model(sigma_zero):
    triple = sm.build_kernels(sigma_zero)
    for lam in (-1.0, 2.0, 9.0):
        rho = sm.principal_rho(lam)
        phi, phi1 = sm.rep_phi(triple, lam, np.pi)
        assert abs(phi - np.real(np.cos(rho * np.pi))) <= 1e-12
        assert abs(phi1 - np.real(-rho * np.sin(rho * np.pi))) <= 1e-12
    with pytest.raises(sm.ShapeError):
        sm.rep_phi(triple, 1.0, 0.1)


def test_rep_phi_matches_forward(sigma04, kernels04):
    for lam in (1.0, 4.0, 10.0):
        trace = sm.integrate_quasi_system(sigma04, lam, 1.0, 0.0)
        for k in (100, 200):
            phi, phi1 = sm.rep_phi(kernels04, lam, sigma04.grid.points[k])
            assert abs(phi - trace.y[k]) <= 5e-3
            assert abs(phi1 - trace.y1[k]) <= 5e-3


def test_rep_phi_remainder_does_not_grow(kernels04):
    # phi - cos(rho x) = c sin(rho x) / rho for constant c.
    xs = np.pi * np.array([0.25, 0.5, 0.75, 1.0])

    def remainder(rho):
        return max(abs(sm.rep_phi(kernels04, rho ** 2, x)[0]
                       - np.cos(rho * x)) for x in xs)

    assert remainder(12.0) <= remainder(5.0)


@pytest.mark.slow
def test_rep_phi_refinement():
    errors = []
    for m in (50, 200):
        grid = sm.RealGrid.uniform(m)
        sigma = sm.PotentialSigma.from_function(grid,
                                                lambda x: 0.3 * np.sin(x))
        triple = sm.build_kernels(sigma, tol=1e-11)
        trace = sm.integrate_quasi_system(sigma, 4.0, 1.0, 0.0)
        phi, _ = sm.rep_phi(triple, 4.0, np.pi)
        errors.append(abs(phi - trace.y[-1]))
    assert errors[1] <= errors[0] / 1.5


def test_delta_representation_closed_forms(sigma_zero):
    triple = sm.build_kernels(sigma_zero)
    pd = sm.delta_representation(triple, sigma_zero, 0.0)
    assert np.all(pd.P == 0) and pd.D == 0
    pd = sm.delta_representation(triple, sigma_zero, 1.0)
    assert np.allclose(pd.P, -1.0) and pd.D == pytest.approx(1.0)


def test_delta_representation_matches_characteristic(sigma04, kernels04):
    H = 0.2
    pd = sm.delta_representation(kernels04, sigma04, H)
    for lam in (0.5, 2.0, 7.0):
        exact = sm.characteristic(sigma04, H, lam).value
        assert abs(sm.char_from_pd(pd, lam) - exact) <= 5e-3
    for lam in np.linspace(-1.5, 30.0, 10):
        exact = sm.characteristic(sigma04, H, lam).value
        scale = max(1.0, abs(sm.principal_rho(lam)))
        assert abs(sm.char_from_pd(pd, lam) - exact) <= 5e-3 * scale


def test_kernel_exports(coarse_grid):
    sigma = sm.PotentialSigma.constant(coarse_grid, 0.3)
    triple = sm.build_kernels(sigma)
    rows = list(sm.kernel_rows(triple))
    assert len(rows) == 17 * 18 // 2
    assert len(list(sm.c_rows(triple))) == 17
    k_norms, n_norms = sm.kernel_row_norms(triple)
    assert k_norms[0] == 0.0 and n_norms[0] == 0.0
    # ||K(x, .)|| = 0.3 sqrt(x) for K close to 0.3.
    assert abs(k_norms[-1] - 0.3 * np.sqrt(np.pi)) <= 5e-2
