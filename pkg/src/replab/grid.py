"""Uniform tensor-product grids and the nodal fields living on them.

Only interior nodes are stored.  The boundary is an implicit ghost ring that
carries a single scalar trace value per field, so a field on an interval with
``n`` interior nodes is just an ``(n,)`` array plus one float.  All discrete
operators (Laplacian, quadrature, Dirichlet energy) consume the ghost value
directly; no boundary nodes ever appear in an array.

The Dirichlet energy is edge based: every edge between neighbouring nodes
(including edges from a boundary-adjacent node to its ghost) contributes
``(difference / h)^2`` times the cell volume.  With this convention the
summation-by-parts identity

    <-laplacian(f), g> * cell_volume  ==  energy_form(f, g)

holds to machine precision for fields with zero boundary value, which makes
the discrete Poisson solve and the constrained energy minimization agree
exactly on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of an interval or an axis-aligned rectangle.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    bounds : tuple of (lo, hi) pairs
        Domain extent per axis.
    n : tuple of int
        Interior node count per axis (the ghost ring is implicit).
    h : tuple of float
        Spacing per axis, ``(hi - lo) / (n + 1)``.
    """

    dim: int
    bounds: tuple[tuple[float, float], ...]
    n: tuple[int, ...]
    h: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        """Volume owned by one interior node."""
        return float(np.prod(self.h))

    @property
    def volume(self) -> float:
        """Measure of the full domain."""
        return float(np.prod([b - a for (a, b) in self.bounds]))

    @property
    def min_spacing(self) -> float:
        return min(self.h)

    @property
    def boundary_weight(self) -> float:
        """Total quadrature weight carried by the ghost ring.

        Equals ``volume - cell_volume * num_nodes``; multiplying it by the
        boundary trace value completes the trapezoidal rule.
        """
        return self.volume - self.cell_volume * self.num_nodes

    def axis(self, i: int) -> np.ndarray:
        """Interior node coordinates along axis ``i``: a + (k+1) h."""
        a, _ = self.bounds[i]
        return a + (np.arange(self.n[i]) + 1) * self.h[i]

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape`` (ij indexing)."""
        return tuple(np.meshgrid(*(self.axis(i) for i in range(self.dim)),
                                 indexing="ij"))

    def distance_to_boundary(self) -> np.ndarray:
        """Distance from each interior node to the nearest boundary face."""
        per_axis = []
        for i in range(self.dim):
            a, b = self.bounds[i]
            x = self.axis(i)
            per_axis.append(np.minimum(x - a, b - x))
        if self.dim == 1:
            return per_axis[0]
        return np.minimum.outer(per_axis[0], per_axis[1])


def build_grid(dim, bounds, n_per_axis) -> Grid:
    """Construct a uniform grid.

    Parameters
    ----------
    dim : int
        1 or 2.
    bounds : (lo, hi) or sequence of (lo, hi)
        One pair per axis; a single pair is accepted for ``dim == 1``.
    n_per_axis : int or sequence of int
        Interior nodes per axis, at least 3 on every axis.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if np.isscalar(bounds[0]):
        bounds = (tuple(bounds),)
    bounds = tuple((float(a), float(b)) for a, b in bounds)
    if np.isscalar(n_per_axis):
        n_per_axis = (int(n_per_axis),) * dim
    n = tuple(int(k) for k in n_per_axis)
    if len(bounds) != dim or len(n) != dim:
        raise ValueError(f"expected {dim} bounds pairs and node counts, "
                         f"got {len(bounds)} and {len(n)}")
    for a, b in bounds:
        if not b > a:
            raise ValueError(f"empty extent [{a}, {b}]")
    for k in n:
        if k < 3:
            raise ValueError(f"need at least 3 interior nodes per axis, got {k}")
    h = tuple((b - a) / (k + 1) for (a, b), k in zip(bounds, n))
    return Grid(dim=dim, bounds=bounds, n=n, h=h)


@dataclass(frozen=True)
class Field:
    """Nodal samples on a grid's interior plus a uniform boundary trace.

    Values are copied on construction and frozen; NaN or Inf entries are a
    hard error.
    """

    values: np.ndarray
    boundary_value: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        if not np.isfinite(self.boundary_value):
            raise ValueError("boundary value is non-finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "boundary_value", float(self.boundary_value))


def _check_shape(f: Field, g: Grid) -> None:
    if f.values.shape != g.shape:
        raise ValueError(f"field shape {f.values.shape} does not match "
                         f"grid shape {g.shape}")


def _pad(values: np.ndarray, ghost: float) -> np.ndarray:
    return np.pad(values, 1, constant_values=ghost)


def laplacian_values(values: np.ndarray, g: Grid, ghost: float) -> np.ndarray:
    """Central second-difference Laplacian as a raw array (hot-loop kernel)."""
    p = _pad(values, ghost)
    if g.dim == 1:
        return (p[:-2] - 2.0 * values + p[2:]) / (g.h[0] * g.h[0])
    out = (p[:-2, 1:-1] - 2.0 * values + p[2:, 1:-1]) / (g.h[0] * g.h[0])
    out += (p[1:-1, :-2] - 2.0 * values + p[1:-1, 2:]) / (g.h[1] * g.h[1])
    return out


def energy_values(values: np.ndarray, g: Grid, ghost: float) -> float:
    """Edge-based Dirichlet energy as a raw float (hot-loop kernel)."""
    p = _pad(values, ghost)
    vol = g.cell_volume
    if g.dim == 1:
        d = np.diff(p)
        return float(np.sum(d * d) * (vol / (g.h[0] * g.h[0])))
    dx = np.diff(p, axis=0)[:, 1:-1]
    dy = np.diff(p, axis=1)[1:-1, :]
    return float(np.sum(dx * dx) * (vol / (g.h[0] * g.h[0]))
                 + np.sum(dy * dy) * (vol / (g.h[1] * g.h[1])))


def laplacian(f: Field, g: Grid) -> Field:
    """Discrete Laplacian of ``f`` (3-point stencil in 1D, 5-point in 2D).

    Nodes adjacent to the boundary see the ghost value
    ``f.boundary_value``.  The result is a derived quantity, not a trace of
    ``f``, so it carries boundary value 0.
    """
    _check_shape(f, g)
    return Field(laplacian_values(f.values, g, f.boundary_value), 0.0)


def integrate(f: Field, g: Grid) -> float:
    """Trapezoidal quadrature: each interior node owns one cell, the ghost
    ring contributes ``boundary_value * g.boundary_weight``."""
    _check_shape(f, g)
    return float(g.cell_volume * f.values.sum()
                 + f.boundary_value * g.boundary_weight)


def dirichlet_energy(f: Field, g: Grid) -> float:
    """Edge-based squared-gradient integral, ghost edges included.

    In 1D this is exactly the Dirichlet energy of the piecewise-linear
    interpolant through the nodal and ghost values.
    """
    _check_shape(f, g)
    return energy_values(f.values, g, f.boundary_value)


def phi_weighted_sup(f: Field, phi: Field) -> float:
    """Max over interior nodes of ``|f / phi|`` for a positive weight field."""
    if f.values.shape != phi.values.shape:
        raise ValueError("field and weight shapes differ")
    if np.any(phi.values <= 0.0):
        raise ValueError("weight field must be positive at all interior nodes")
    return float(np.max(np.abs(f.values / phi.values)))


def difference(f: Field, g_ref: Field) -> Field:
    if f.values.shape != g_ref.values.shape:
        raise ValueError("field shapes differ")
    return Field(f.values - g_ref.values,
                 f.boundary_value - g_ref.boundary_value)


def h1_distance(f: Field, g_ref: Field, grid: Grid) -> float:
    """Discrete H1 seminorm distance, sqrt of the energy of the difference.

    The difference field carries the difference of the boundary traces.
    """
    d = difference(f, g_ref)
    return float(np.sqrt(dirichlet_energy(d, grid)))


def l2_distance(f: Field, g_ref: Field, grid: Grid) -> float:
    """Quadrature L2 distance between two fields on the same grid."""
    d = difference(f, g_ref)
    sq = Field(d.values * d.values, d.boundary_value ** 2)
    return float(np.sqrt(integrate(sq, grid)))
