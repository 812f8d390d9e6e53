import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from replab import (Field, build_grid, dirichlet_energy, integrate,
                    solve_torsion, stationary_limit)
from replab.poisson import SolverError


def test_interval_nodal_values_exact(grid99, torsion99):
    # the exact torsion function x(1-x)/2 is quadratic, so the discrete
    # solve reproduces it to rounding
    x = grid99.axis(0)
    assert np.max(np.abs(torsion99.phi.values - x * (1 - x) / 2)) < 1e-12


def test_interval_integral_and_target(torsion99):
    assert torsion99.torsion_integral == pytest.approx(1.0 / 12.0, rel=1e-3)
    assert torsion99.target_energy == pytest.approx(12.0, rel=1e-3)
    assert torsion99.target_energy * torsion99.torsion_integral == pytest.approx(1.0, abs=1e-14)
    assert torsion99.solver_residual < 1e-11


def test_interval_positivity(torsion99):
    assert np.all(torsion99.phi.values > 0.0)


def test_interval_integral_second_order():
    # quadrature error of integral(phi) on the interval is exactly h^2/12
    errs = []
    for n in (24, 49, 99):
        ts = solve_torsion(build_grid(1, [0.0, 1.0], n))
        errs.append(abs(ts.torsion_integral - 1.0 / 12.0))
    assert errs[1] / errs[0] == pytest.approx(0.25, rel=0.05)
    assert errs[2] / errs[1] == pytest.approx(0.25, rel=0.05)


def _dense_torsion(g):
    # independent oracle: assemble the 5-point matrix and solve directly
    n1, n2 = g.n
    ex = np.ones(n1)
    ey = np.ones(n2)
    lx = sp.diags([ex[:-1], -2 * ex, ex[:-1]], [-1, 0, 1]) / g.h[0] ** 2
    ly = sp.diags([ey[:-1], -2 * ey, ey[:-1]], [-1, 0, 1]) / g.h[1] ** 2
    a = -(sp.kron(lx, sp.identity(n2)) + sp.kron(sp.identity(n1), ly)).tocsc()
    return spla.spsolve(a, np.ones(n1 * n2)).reshape(n1, n2)


def _series_integral(terms=399):
    # double sine expansion of the unit-square torsion function:
    # integral(phi) = sum over odd m,q of 64 / (pi^6 m^2 q^2 (m^2+q^2))
    m = np.arange(1, terms + 1, 2, dtype=float)
    mm, qq = np.meshgrid(m, m, indexing="ij")
    return float(np.sum(64.0 / (np.pi ** 6 * mm ** 2 * qq ** 2 * (mm ** 2 + qq ** 2))))


def test_square_matches_dense_oracle():
    g = build_grid(2, [(0.0, 1.0), (0.0, 1.0)], (49, 49))
    ts = solve_torsion(g, tol=1e-10)
    dense = _dense_torsion(g)
    assert np.max(np.abs(ts.phi.values - dense)) < 1e-10
    assert ts.torsion_integral == pytest.approx(
        integrate(Field(dense, 0.0), g), abs=1e-10)
    assert ts.solver_residual <= 1e-10
    assert np.all(ts.phi.values > 0.0)


def test_square_integral_converges_to_series_value():
    target = _series_integral()
    errs = []
    for n in (24, 49):
        g = build_grid(2, [(0.0, 1.0), (0.0, 1.0)], (n, n))
        ts = solve_torsion(g, tol=1e-11)
        errs.append(abs(ts.torsion_integral - target))
    # O(h^2): halving h quarters the defect
    assert errs[1] / errs[0] == pytest.approx(0.25, rel=0.1)


def test_square_iteration_budget_enforced():
    g = build_grid(2, [(0.0, 1.0), (0.0, 1.0)], (19, 19))
    with pytest.raises(SolverError):
        solve_torsion(g, tol=1e-12, max_iter=3)


def test_rejects_bad_tolerance(grid99):
    with pytest.raises(ValueError):
        solve_torsion(grid99, tol=0.0)


def test_stationary_limit_interval(grid99, torsion99):
    w = stationary_limit(torsion99)
    x = grid99.axis(0)
    assert w.boundary_value == 0.0
    # w = 6x(1-x) up to the quadrature bias of integral(phi)
    assert np.max(np.abs(w.values - 6 * x * (1 - x))) < 2e-4
    mid = w.values[49]  # node at x = 0.5
    assert mid == pytest.approx(1.5, abs=2e-4)
    assert integrate(w, grid99) == pytest.approx(1.0, abs=1e-12)


def test_stationary_limit_energy_equals_target(grid99, torsion99):
    # discrete identity: energy(phi) == integral(phi) via summation by
    # parts, hence energy(w) == target exactly at the discrete level
    w = stationary_limit(torsion99)
    assert dirichlet_energy(w, grid99) == pytest.approx(
        torsion99.target_energy, rel=1e-12)


def test_stationary_limit_square():
    g = build_grid(2, [(0.0, 1.0), (0.0, 1.0)], (29, 29))
    ts = solve_torsion(g, tol=1e-11)
    w = stationary_limit(ts)
    assert integrate(w, g) == pytest.approx(1.0, abs=1e-12)
    assert dirichlet_energy(w, g) == pytest.approx(ts.target_energy, rel=1e-8)
