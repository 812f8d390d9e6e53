import numpy as np
import pytest

from replab import (Field, build_grid, dirichlet_energy, h1_distance,
                    integrate, l2_distance, laplacian, phi_weighted_sup)
from replab.grid import energy_values, laplacian_values


def test_build_grid_interval():
    g = build_grid(1, [0.0, 1.0], 9)
    assert g.h == (0.1,)
    assert np.allclose(g.axis(0), np.arange(1, 10) * 0.1)


def test_build_grid_square_node_count():
    g = build_grid(2, [(0.0, 1.0), (0.0, 1.0)], (9, 9))
    assert g.num_nodes == 81
    assert g.shape == (9, 9)


def test_build_grid_wider_interval():
    g = build_grid(1, [0.0, 2.0], 19)
    assert g.h == (0.1,)


@pytest.mark.parametrize("bad", [
    dict(dim=1, bounds=[1.0, 0.0], n_per_axis=9),   # reversed extent
    dict(dim=1, bounds=[0.0, 1.0], n_per_axis=2),   # too few nodes
    dict(dim=3, bounds=[0.0, 1.0], n_per_axis=9),   # unsupported dim
])
def test_build_grid_rejects(bad):
    with pytest.raises(ValueError):
        build_grid(**bad)


def test_field_rejects_non_finite():
    with pytest.raises(ValueError):
        Field(np.array([1.0, np.nan, 2.0]))
    with pytest.raises(ValueError):
        Field(np.array([1.0]), boundary_value=np.inf)


def test_field_values_are_frozen():
    f = Field(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        f.values[0] = 7.0


def test_laplacian_of_constant_is_zero():
    g = build_grid(1, [0.0, 1.0], 31)
    f = Field(np.full(31, 3.7), boundary_value=3.7)
    assert np.all(laplacian(f, g).values == 0.0)


def test_laplacian_exact_on_quadratic(grid99):
    # the 3-point stencil has zero truncation error on quadratics
    x = grid99.axis(0)
    f = Field(x * (1 - x) / 2, 0.0)
    assert np.max(np.abs(laplacian(f, grid99).values + 1.0)) < 1e-12


def test_laplacian_second_order_on_sine():
    errs = []
    for n in (24, 49, 99):
        g = build_grid(1, [0.0, 1.0], n)
        x = g.axis(0)
        f = Field(np.sin(np.pi * x), 0.0)
        err = np.max(np.abs(laplacian(f, g).values + np.pi ** 2 * np.sin(np.pi * x)))
        errs.append(err)
    # halving h quarters the error
    assert errs[1] / errs[0] == pytest.approx(0.25, rel=0.15)
    assert errs[2] / errs[1] == pytest.approx(0.25, rel=0.15)


def test_laplacian_shape_mismatch(grid99):
    with pytest.raises(ValueError):
        laplacian(Field(np.zeros(42)), grid99)


def test_integrate_unit_constant():
    g = build_grid(1, [0.0, 1.0], 37)
    assert integrate(Field(np.ones(37), 1.0), g) == pytest.approx(1.0, abs=1e-14)


def test_integrate_constant_2d_gives_volume():
    g = build_grid(2, [(0.0, 2.0), (0.0, 3.0)], (11, 17))
    assert integrate(Field(np.full((11, 17), 2.5), 2.5), g) == pytest.approx(15.0, abs=1e-12)


def test_integrate_sine(grid99):
    # analytic integral 2/pi; Euler-Maclaurin error pi*h^2/6
    x = grid99.axis(0)
    val = integrate(Field(np.sin(np.pi * x), 0.0), grid99)
    assert val == pytest.approx(2.0 / np.pi, abs=1e-4)


def test_integrate_stationary_parabola(grid99):
    x = grid99.axis(0)
    val = integrate(Field(6 * x * (1 - x), 0.0), grid99)
    assert val == pytest.approx(1.0, abs=2e-4)


def test_integrate_second_order():
    errs = []
    for n in (24, 49, 99):
        g = build_grid(1, [0.0, 1.0], n)
        x = g.axis(0)
        errs.append(abs(integrate(Field(np.sin(np.pi * x), 0.0), g) - 2.0 / np.pi))
    assert errs[2] / errs[1] == pytest.approx(0.25, rel=0.1)


def test_dirichlet_energy_zero_field(grid99):
    assert dirichlet_energy(Field(np.zeros(99), 0.0), grid99) == 0.0


def test_dirichlet_energy_parabola(grid99):
    # int (6 - 12x)^2 dx = 12
    x = grid99.axis(0)
    val = dirichlet_energy(Field(6 * x * (1 - x), 0.0), grid99)
    assert val == pytest.approx(12.0, abs=2e-3)


def test_dirichlet_energy_sine(grid99):
    # int (pi^2/2 cos(pi x))^2 dx = pi^4 / 8
    x = grid99.axis(0)
    val = dirichlet_energy(Field((np.pi / 2) * np.sin(np.pi * x), 0.0), grid99)
    assert val == pytest.approx(np.pi ** 4 / 8, abs=3e-3)


def test_dirichlet_energy_nonnegative_and_definite(rng):
    g = build_grid(1, [0.0, 1.0], 17)
    f = Field(rng.standard_normal(17), 0.0)
    assert dirichlet_energy(f, g) > 0.0
    # constant matching its trace carries no energy
    assert dirichlet_energy(Field(np.full(17, 4.0), 4.0), g) == 0.0


def _energy_form(fv, gv, g):
    # independent bilinear form: sum over edges of (df/h)(dg/h) * cell volume
    fp = np.pad(fv, 1)
    gp = np.pad(gv, 1)
    vol = g.cell_volume
    if g.dim == 1:
        return float(np.sum(np.diff(fp) * np.diff(gp)) * vol / g.h[0] ** 2)
    out = np.sum(np.diff(fp, axis=0)[:, 1:-1] * np.diff(gp, axis=0)[:, 1:-1]) * vol / g.h[0] ** 2
    out += np.sum(np.diff(fp, axis=1)[1:-1, :] * np.diff(gp, axis=1)[1:-1, :]) * vol / g.h[1] ** 2
    return float(out)


@pytest.mark.parametrize("dim,shape", [(1, (33,)), (2, (9, 13))])
def test_summation_by_parts(dim, shape, rng):
    bounds = [(0.0, 1.0)] * dim
    g = build_grid(dim, bounds, shape)
    fv = rng.standard_normal(shape)
    gv = rng.standard_normal(shape)
    lhs = -np.sum(laplacian_values(fv, g, 0.0) * gv) * g.cell_volume
    rhs = _energy_form(fv, gv, g)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    # energy agrees with the quadratic form of the same edges
    assert energy_values(fv, g, 0.0) == pytest.approx(_energy_form(fv, fv, g), rel=1e-12)


def test_phi_weighted_sup_self_ratio(torsion99):
    assert phi_weighted_sup(torsion99.phi, torsion99.phi) == pytest.approx(1.0, abs=1e-14)


def test_phi_weighted_sup_homogeneity(torsion99):
    doubled = Field(2.0 * torsion99.phi.values, 0.0)
    assert phi_weighted_sup(doubled, torsion99.phi) == pytest.approx(2.0, abs=1e-13)


def test_phi_weighted_sup_of_normalized_torsion(torsion99):
    # phi / integral(phi) against phi gives 1/integral(phi) ~ 12
    w = Field(torsion99.phi.values * torsion99.target_energy, 0.0)
    assert phi_weighted_sup(w, torsion99.phi) == pytest.approx(12.0, rel=1e-3)


def test_phi_weighted_sup_rejects_vanishing_weight(grid99):
    f = Field(np.ones(99), 0.0)
    bad = Field(np.linspace(-0.1, 1.0, 99), 0.0)
    with pytest.raises(ValueError):
        phi_weighted_sup(f, bad)


def test_h1_distance_identical(grid99):
    x = grid99.axis(0)
    f = Field(np.sin(np.pi * x), 0.0)
    assert h1_distance(f, f, grid99) == 0.0


def test_h1_distance_of_sine_perturbation(grid99):
    # energy of delta*sin(pi x) is delta^2 pi^2 / 2
    x = grid99.axis(0)
    base = Field(6 * x * (1 - x), 0.0)
    delta = 1e-3
    bumped = Field(base.values + delta * np.sin(np.pi * x), 0.0)
    expect = delta * np.pi / np.sqrt(2.0)
    assert h1_distance(bumped, base, grid99) == pytest.approx(expect, rel=1e-3)


def test_h1_distance_symmetry(grid99, rng):
    f = Field(rng.standard_normal(99), 0.0)
    g_ = Field(rng.standard_normal(99), 0.2)
    assert h1_distance(f, g_, grid99) == h1_distance(g_, f, grid99)


def test_l2_distance_basic(grid99):
    f = Field(np.ones(99), 0.0)
    g_ = Field(np.zeros(99), 0.0)
    # interior cells cover h*n = 0.99 of the domain
    assert l2_distance(f, g_, grid99) == pytest.approx(np.sqrt(0.99), abs=1e-12)
