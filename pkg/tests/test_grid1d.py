import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsshift.grid1d import (DressedLevelIndex, GridConfigurationError, GridEigenproblem,
                            QuadratureError, dressed_level_energy, grid_dressed_gap,
                            level_energy, rotated_eigenfunction_pair, solve_effective_oscillator,
                            solve_level, wkb_dressed_energy)
from bsshift.model import ModelParams

# independent oracles: (2 dE / pi) E(-8 g^2 eps / n) and algebraic-weight quadrature
WKB_ORACLE = [
    (0.3, 60, 14.284505476090471),
    (1.0, 100, 30.927448159139324),
    (0.5, 60.5, 18.5006857344688),
]


@pytest.mark.parametrize("g,n,expected", WKB_ORACLE)
def test_wkb_against_elliptic_integral(g, n, expected):
    assert wkb_dressed_energy(g, n, 11.0) == pytest.approx(expected, rel=1e-12)


def test_wkb_zero_coupling_exact():
    assert wkb_dressed_energy(0.0, 60, 11.0) == 11.0
    assert wkb_dressed_energy(1e-30, 60, 11.0) == pytest.approx(11.0, rel=1e-12)


def test_wkb_small_g_expansion():
    # dE (1 + 2 g^2 eps / n) to leading order
    g, n = 1e-3, 60
    assert wkb_dressed_energy(g, n, 11.0) == pytest.approx(11.0 * (1 + 2 * g * g * 121 / 60),
                                                           rel=1e-10)


def test_wkb_quadrature_failure_reported():
    with pytest.raises(QuadratureError) as info:
        wkb_dressed_energy(1.0, 60, 11.0, rtol=1e-18)
    assert info.value.achieved >= 0


def test_wkb_rejects_bad_input():
    with pytest.raises(ValueError):
        wkb_dressed_energy(-0.1, 60, 11.0)


@settings(max_examples=40, deadline=None)
@given(g1=st.floats(0, 2), g2=st.floats(0, 2))
def test_wkb_monotone(g1, g2):
    lo, hi = sorted((g1, g2))
    assert wkb_dressed_energy(lo, 60, 11.0) <= wkb_dressed_energy(hi, 60, 11.0) * (1 + 1e-14)


def test_dressed_ladder():
    p = ModelParams(11.0, n_ref=60.0)
    assert dressed_level_energy(DressedLevelIndex(10, 0.5), 0.0, p) == 15.5
    assert dressed_level_energy(DressedLevelIndex(10, -0.5), 0.0, p) == 4.5


def test_level_index_validation():
    with pytest.raises(GridConfigurationError):
        DressedLevelIndex(-1, 0.5)
    with pytest.raises(GridConfigurationError):
        DressedLevelIndex(3, 1.0)


def test_uncoupled_oscillator_levels():
    p = ModelParams(11.0, n_ref=60.0)
    grid = GridEigenproblem.for_levels(p, 70)
    levels = solve_effective_oscillator(p, 0.5, 71, grid)
    e = np.array([x[0] for x in levels])
    np.testing.assert_allclose(e, np.arange(71) + 5.5, atol=1e-6)


def test_eigenfunction_shape():
    p = ModelParams(11.0, n_ref=60.0).with_g(0.5)
    grid = GridEigenproblem.for_levels(p, 80)
    levels = solve_effective_oscillator(p, -0.5, 6, grid, start=55)
    for j, (_, u) in enumerate(levels):
        n = 55 + j
        assert u.node_count() == n
        assert u.norm == pytest.approx(1.0, abs=1e-6)
        assert u.edge_amplitude() < 1e-8
        # definite parity
        assert np.allclose(u.values[::-1], (-1) ** n * u.values, atol=1e-10)
    assert abs(levels[0][1].inner(levels[1][1])) < 1e-10
    assert abs(levels[0][1].inner(levels[2][1])) < 1e-10


def test_richardson_and_box_convergence():
    p = ModelParams(11.0, n_ref=60.0).with_g(0.6)
    idx = DressedLevelIndex(60, 0.5)
    grid = GridEigenproblem.for_levels(p, 61)
    e = level_energy(p, idx, grid)
    assert abs(level_energy(p, idx, grid.refined()) - e) < 1e-7
    assert abs(level_energy(p, idx, grid.widened()) - e) < 1e-9
    # second-order method without extrapolation is visibly worse
    assert abs(level_energy(p, idx, grid, richardson=False) - e) > 10 * abs(
        level_energy(p, idx, grid.refined()) - e)


def test_solve_level_matches_energy_only():
    p = ModelParams(11.0, n_ref=60.0).with_g(0.3)
    idx = DressedLevelIndex(40, -0.5)
    grid = GridEigenproblem.for_levels(p, 40)
    assert solve_level(p, idx, grid)[0] == pytest.approx(level_energy(p, idx, grid), abs=1e-12)


@pytest.mark.parametrize("g", [0.1, 0.3, 0.6, 1.0])
def test_wkb_against_grid(g):
    p = ModelParams(11.0, n_ref=100.0).with_g(g)
    grid_gap = grid_dressed_gap(p, 100)
    assert wkb_dressed_energy(g, 100, 11.0) == pytest.approx(grid_gap, rel=1e-3)


def test_grid_too_small_rejected():
    p = ModelParams(11.0, n_ref=60.0).with_g(0.5)
    with pytest.raises(GridConfigurationError):
        GridEigenproblem(p, 60, half_width=5.0, spacing=0.05)
    grid = GridEigenproblem.for_levels(p, 10)
    with pytest.raises(GridConfigurationError):
        solve_level(p, DressedLevelIndex(20, 0.5), grid)


def test_grid_parameter_mismatch():
    p = ModelParams(11.0, n_ref=60.0)
    grid = GridEigenproblem.for_levels(p, 10)
    with pytest.raises(GridConfigurationError):
        solve_level(p.with_g(0.1), DressedLevelIndex(1, 0.5), grid)


def test_pair_spin_rule():
    p = ModelParams(11.0, n_ref=60.0).with_g(0.2)
    u1, u2 = rotated_eigenfunction_pair(p, DressedLevelIndex(54, 0.5), DressedLevelIndex(67, -0.5))
    np.testing.assert_array_equal(u1.y, u2.y)
    with pytest.raises(GridConfigurationError):
        rotated_eigenfunction_pair(p, DressedLevelIndex(54, -0.5), DressedLevelIndex(67, 0.5))


def test_wavefunction_csv(tmp_path):
    p = ModelParams(11.0, n_ref=60.0)
    _, u = solve_level(p, DressedLevelIndex(2, 0.5), GridEigenproblem.for_levels(p, 2))
    path = tmp_path / "u.csv"
    u.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert path.read_text().splitlines()[0] == "y,u"
    np.testing.assert_array_equal(data[:, 1], u.values)
    assert math.isclose(data[0, 0], u.y[0])
