import numpy as np
import pytest
from scipy import optimize

import spectralmap as sm
from spectralmap import _stability


def test_char_from_pd_closed_forms(grid, model_pd):
    assert sm.char_from_pd(model_pd, 2.25) == pytest.approx(1.5, abs=1e-10)
    pd = sm.PDRepresentation(grid, -np.ones(len(grid)), 1.0)
    assert sm.char_from_pd(pd, 1.0) == pytest.approx(-1.0, abs=1e-8)
    lams = np.array([-2.0, 0.0, 3.7])
    rho = sm.principal_rho(lams)
    expected = np.real(-rho * np.sin(rho * np.pi) + np.cos(rho * np.pi))
    assert np.allclose(sm.char_from_pd(pd, lams), expected, atol=1e-8)


def test_char_derivative_from_pd(grid, model_pd):
    # d/dlambda of -rho sin(rho pi) is -pi at 0 and pi/2 at 1.
    assert sm.char_derivative_from_pd(model_pd, 0.0) \
        == pytest.approx(-np.pi, abs=1e-10)
    assert sm.char_derivative_from_pd(model_pd, 1.0) \
        == pytest.approx(np.pi / 2, abs=1e-10)


def test_char_from_pd_matches_forward(grid):
    sigma = sm.PotentialSigma.constant(grid, 0.4)
    pd = sm.delta_representation(sm.build_kernels(sigma), sigma, 0.2)
    for lam in (0.5, 2.0, 7.0):
        exact = sm.characteristic(sigma, 0.2, lam).value
        assert abs(sm.char_from_pd(pd, lam) - exact) <= 5e-3


def test_zeros_model(model_pd):
    rhos = sm.zeros_from_pd(model_pd, 10)
    assert np.max(np.abs(rhos - np.arange(10))) <= 1e-9


def test_zeros_match_dense_scan(grid):
    pd = sm.PDRepresentation(grid, -np.ones(len(grid)), 1.0)
    rhos = sm.zeros_from_pd(pd, 8)

    def f(r):
        return -r * np.sin(r * np.pi) + np.cos(r * np.pi)

    oracle = [optimize.brentq(f, n + 1e-9, n + 0.5 - 1e-9, xtol=1e-14)
              for n in range(8)]
    assert np.max(np.abs(rhos - oracle)) <= 1e-9


def test_zeros_move_linearly(grid, model_pd):
    eps = 1e-3
    moved = sm.PDRepresentation(grid, np.full(len(grid), eps), 0.0)
    base = sm.zeros_from_pd(model_pd, 12)
    rhos = sm.zeros_from_pd(moved, 12)
    shifts = np.abs(rhos - base)[1:]
    assert np.all(shifts <= 10 * eps)
    predicted = sm.predicted_shifts(model_pd, moved.P, 0.0, base)[1:]
    assert np.max(np.abs(shifts - predicted)) <= 1e-5


def test_zeros_refuse_complex(grid):
    pd = sm.PDRepresentation(grid, np.full(len(grid), 1j), 0.0)
    with pytest.raises(sm.DataError):
        sm.zeros_from_pd(pd, 3)


def test_zeros_below_window(monkeypatch, model_pd):
    char = _stability.char_from_pd
    # A shifted Delta is negative at the bottom of the window.
    monkeypatch.setattr(_stability, 'char_from_pd',
                        lambda pd, lam: char(pd, lam) - 1e6)
    with pytest.raises(sm.SearchWindowError):
        sm.zeros_from_pd(model_pd, 3)


def test_random_perturbation_norms(grid):
    rng = np.random.default_rng(7)
    dP, dD = sm.random_perturbation(grid, 1e-3, rng)
    assert np.sqrt(sm.integrate_grid(dP ** 2, grid)) == pytest.approx(1e-3)
    assert abs(dD) <= 1e-3


def test_experiment_without_perturbation(model_pd):
    exp = sm.perturbation_experiment(model_pd, 3, 0.0, 10)
    for r in exp.reports:
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.ratio == 0.0
    assert exp.max_ratio == 0.0


def test_experiment_reproducible(model_pd):
    a = sm.perturbation_experiment(model_pd, 3, 1e-3, 10, seed=5)
    b = sm.perturbation_experiment(model_pd, 3, 1e-3, 10, seed=5)
    assert [r.lhs for r in a.reports] == [r.lhs for r in b.reports]
    rows = list(a.rows())
    assert len(rows) == 3 and rows[0][1] == 1e-3


@pytest.mark.slow
def test_experiment_ratio_stable(model_pd):
    first = sm.perturbation_experiment(model_pd, 20, 1e-3, 30)
    second = sm.perturbation_experiment(model_pd, 20, 5e-4, 30)
    assert np.isfinite(first.max_ratio)
    assert abs(second.max_ratio - first.max_ratio) <= 0.3 * first.max_ratio
    for r in first.reports:
        assert r.lhs <= first.max_ratio * r.rhs * (1 + 1e-12)


@pytest.mark.slow
def test_bound_conformance(model_pd):
    ratios = [sm.perturbation_experiment(model_pd, 20, d, 30).max_ratio
              for d in (1e-2, 1e-3, 1e-4)]
    mid = np.median(ratios)
    assert all(abs(r - mid) <= 0.5 * mid for r in ratios)


def test_predicted_shifts_first_order(model_pd):
    exp = sm.perturbation_experiment(model_pd, 5, 1e-4, 20)
    for r in exp.reports:
        assert abs(r.predicted - r.lhs) <= 0.1 * r.lhs


def test_experiment_arguments(model_pd):
    with pytest.raises(sm.DataError):
        sm.perturbation_experiment(model_pd, 0, 1e-3, 10)
    with pytest.raises(sm.DataError):
        sm.perturbation_experiment(model_pd, 2, -1e-3, 10)


def test_matching_error(model_pd):
    with pytest.raises(sm.MatchingError):
        sm.perturbation_experiment(model_pd, 1, 1e-3, 10, radius=1e-12)


def test_coefficient_stability_zero(sigma_const):
    report = sm.coefficient_stability_experiment(sigma_const, 0.0, [0.0], 5)
    assert report.distances[0] == 0.0
    assert report.lipschitz[0] == 0.0


@pytest.mark.slow
def test_coefficient_stability_sweep(sigma_const):
    sizes = [0.2, 0.1, 0.05, 0.025]
    report = sm.coefficient_stability_experiment(sigma_const, 0.0, sizes, 20)
    d = report.distances
    assert np.all(np.diff(d) < 0)
    assert d[-1] / d[0] <= 0.3
    lip = report.lipschitz
    assert lip.max() <= 3 * lip.min()
    assert len(list(report.rows())) == 4


def test_bump_is_normalized(grid):
    assert sm.bump(grid).l2_norm() == pytest.approx(1.0, abs=1e-12)
