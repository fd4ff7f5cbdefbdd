import logging

import numpy as np
import pytest

import spectralmap as sm


def test_uniform_grid(grid):
    assert grid.m == 200
    assert len(grid) == 201
    assert grid.points[0] == 0.0
    assert grid.points[-1] == np.pi
    assert np.allclose(np.diff(grid.points), np.pi / 200)
    assert grid.index_of(np.pi / 2) == 100


def test_grid_refuses_bad_points():
    with pytest.raises(sm.ShapeError):
        sm.RealGrid.uniform(4)
    pts = np.linspace(0.0, np.pi, 21) ** 1.01
    with pytest.raises(sm.ShapeError):
        sm.RealGrid(pts)
    with pytest.raises(sm.ShapeError):
        sm.RealGrid.uniform(16).index_of(0.1)


def test_principal_rho():
    assert sm.principal_rho(4.0) == 2.0
    assert sm.principal_rho(-1.0) == -1j
    rho = sm.principal_rho(np.array([-4.0, 0.0, 9.0]))
    assert np.allclose(rho ** 2, [-4.0, 0.0, 9.0])
    assert np.all(np.angle(rho) < np.pi / 2)
    assert np.all(np.angle(rho) >= -np.pi / 2)


def test_integrate_grid_exact_cases():
    g201 = sm.RealGrid.uniform(200)
    t = g201.points
    assert abs(sm.integrate_grid(np.ones_like(t), g201) - np.pi) < 1e-12
    assert abs(sm.integrate_grid(t, g201) - np.pi ** 2 / 2) < 1e-12
    g401 = sm.RealGrid.uniform(400)
    t = g401.points
    val = sm.integrate_grid(np.cos(4 * t) ** 2, g401)
    assert abs(val - np.pi / 2) < 1e-6


def test_integrate_grid_linear_and_second_order():
    g = sm.RealGrid.uniform(100)
    a = np.sin(g.points)
    b = g.points ** 2
    lhs = sm.integrate_grid(2 * a - 3 * b, g)
    rhs = 2 * sm.integrate_grid(a, g) - 3 * sm.integrate_grid(b, g)
    assert abs(lhs - rhs) < 1e-12

    errors = []
    for m in (100, 200):
        g = sm.RealGrid.uniform(m)
        errors.append(abs(sm.integrate_grid(np.cos(g.points / 2), g) - 2.0))
    assert np.log2(errors[0] / errors[1]) >= 1.9


def test_integrate_grid_shape_mismatch(grid):
    with pytest.raises(sm.ShapeError):
        sm.integrate_grid(np.ones(10), grid)
    with pytest.raises(sm.ShapeError):
        sm.cumulative_grid(np.ones(10), grid)


def test_cumulative_grid_matches_total(grid):
    vals = np.exp(np.sin(grid.points))
    cum = sm.cumulative_grid(vals, grid)
    assert cum[0] == 0.0
    assert abs(cum[-1] - sm.integrate_grid(vals, grid)) < 1e-12


def test_l2_remainder_norm():
    assert sm.l2_remainder_norm([0.0, 0.0, 0.0]) == 0.0
    assert sm.l2_remainder_norm([3.0, 4.0]) == pytest.approx(5.0, abs=1e-12)
    n = np.arange(1, 1001)
    assert abs(sm.l2_remainder_norm(1.0 / n) - np.sqrt(np.pi ** 2 / 6)) < 1e-3
    assert sm.l2_remainder_norm([]) == 0.0


def test_sigma_l2_distance(grid):
    zero = sm.PotentialSigma.constant(grid, 0.0)
    one = sm.PotentialSigma.constant(grid, 1.0)
    assert sm.sigma_l2_distance(one, one) == 0.0
    assert sm.sigma_l2_distance(one, zero) == pytest.approx(np.sqrt(np.pi),
                                                            abs=1e-12)
    fine = sm.RealGrid.uniform(1000)
    x = sm.PotentialSigma.from_function(fine, lambda x: x)
    expected = np.pi ** 1.5 / np.sqrt(3)
    assert abs(sm.sigma_l2_distance(x, sm.PotentialSigma.constant(fine, 0.0))
               - expected) < 1e-3
    with pytest.raises(sm.ShapeError):
        sm.sigma_l2_distance(one, sm.PotentialSigma.constant(fine, 1.0))


def test_potential_sigma(grid):
    sigma = sm.PotentialSigma.from_function(grid, lambda x: x)
    assert np.allclose(sigma.values, grid.midpoints, atol=1e-12)
    assert sigma.is_real
    assert sigma.cell_of(np.pi) == grid.m - 1
    c = sm.PotentialSigma.constant(grid, 0.7)
    y = np.array([0.0, 1.0, np.pi])
    assert np.allclose(c.square_integral(y), 0.49 * y, atol=1e-12)
    with pytest.raises(sm.ShapeError):
        sm.PotentialSigma(grid, np.zeros(7))
    with pytest.raises(sm.DataError):
        sm.PotentialSigma(grid, np.full(grid.m, np.nan))


def test_spectral_datum():
    d = sm.SpectralDatum(-1.0, 0.5)
    assert d.rho == -1j
    assert d.source == sm.MEASURED
    with pytest.raises(sm.ValidationError) as info:
        sm.SpectralDatum(1.0, 0.0)
    assert info.value.failed == ('i',)
    with pytest.raises(sm.DataError):
        sm.SpectralDatum(4.0, rho=3.0)
    with pytest.raises(sm.DataError):
        sm.SpectralDatum(4.0, source='guessed')


def test_spectral_sequence():
    seq = sm.SpectralSequence.from_arrays([0.0, 1.0, 4.0],
                                          [1 / np.pi, 2 / np.pi, 2 / np.pi])
    assert seq.N == 2
    assert np.allclose(seq.rhos, [0.0, 1.0, 2.0])
    assert seq.truncated(1).N == 1
    assert seq.as_dict()[2]['lambda'] == 4.0
    with pytest.raises(sm.ShapeError):
        seq.truncated(5)
    with pytest.raises(sm.ValidationError):
        sm.SpectralSequence.from_arrays([0.0, 1.0, 1.0])
    with pytest.raises(sm.DataError):
        sm.SpectralSequence.from_arrays([1.0, 0.0])
    bare = sm.SpectralSequence.from_arrays([0.0, 1.0])
    assert not bare.has_alphas
    with pytest.raises(sm.DataError):
        bare.alphas


def test_trig_moments_exact_for_linear():
    g = sm.RealGrid.uniform(50)
    t = g.points
    rho = np.array([0.0, 0.7, 3.0, 11.5])
    c, s = sm.trig_moments(np.ones_like(t), g.h, rho)
    safe = np.where(rho == 0, 1.0, rho)
    expected_c = np.where(rho == 0, np.pi, np.sin(rho * np.pi) / safe)
    expected_s = np.where(rho == 0, 0.0, (1 - np.cos(rho * np.pi)) / safe)
    assert np.allclose(c, expected_c, atol=1e-12)
    assert np.allclose(s, expected_s, atol=1e-12)

    r = 2.3
    _, s = sm.trig_moments(t, g.h, r)
    expected = (np.sin(r * np.pi) - r * np.pi * np.cos(r * np.pi)) / r ** 2
    assert abs(s - expected) < 1e-12


def test_strictraise(caplog):
    with pytest.raises(sm.DataError):
        sm.strictraise(True, sm.DataError, "bad data")
    with caplog.at_level(logging.WARNING, logger='spectralmap'):
        logging.getLogger('spectralmap').propagate = True
        try:
            sm.strictraise(False, sm.DataError, "bad data")
        finally:
            logging.getLogger('spectralmap').propagate = False
    assert "bad data" in caplog.text


def test_exit_codes():
    assert sm.DataError.exit_code == 3
    assert sm.ValidationError.exit_code == 3
    assert sm.SolvabilityError.exit_code == 4
    assert sm.RangeError.exit_code == 5
    assert issubclass(sm.MatchingError, sm.NumericalError)
    assert sm.SolvabilityError("singular", x=1.5).x == 1.5
