"""Rotated-cube finite-difference grids, boundary masks and jump data.

A grid lives on a cube (or box) centred at ``x`` whose axes are the columns
of an orthogonal matrix ``R`` with ``R e_n = nu``.  Nodal fields are stored
in grid-local index order; forward differences live on the cell lattice and
are exact on affine fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, InvalidInputError

__all__ = [
    "Grid",
    "BoundaryMask",
    "PhaseFieldState",
    "rotation_matrix",
    "build_cube_grid",
    "build_box_grid",
    "apply_gradient",
    "jump_datum",
]


def rotation_matrix(nu) -> np.ndarray:
    """Orthogonal matrix with determinant 1 mapping e_n to nu.

    In 2D the closed form [[nu2, nu1], [-nu1, nu2]] is used; in 1D the
    "matrix" is [[nu]] (nu in {-1, +1}).
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
        raise InvalidInputError("nu must be a unit vector")
    n = nu.size
    if n == 1:
        return np.array([[nu[0]]])
    if n == 2:
        return np.array([[nu[1], nu[0]], [-nu[0], nu[1]]])
    raise InvalidInputError("only dimensions 1 and 2 are supported")


@dataclass(frozen=True, eq=False)
class Grid:
    """Finite-difference lattice on R_nu([-s1/2,s1/2] x ... ) + x."""

    x: tuple[float, ...]
    sides: tuple[float, ...]
    nu: tuple[float, ...]
    h: float

    @property
    def n(self) -> int:
        return len(self.x)

    @cached_property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.nu)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(round(s / self.h)) + 1 for s in self.sides)

    @cached_property
    def cell_shape(self) -> tuple[int, ...]:
        return tuple(N - 1 for N in self.shape)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cell_shape))

    @cached_property
    def local_axes(self) -> list[np.ndarray]:
        return [
            np.linspace(-s / 2.0, s / 2.0, N)
            for s, N in zip(self.sides, self.shape)
        ]

    def _to_physical(self, local_pts: np.ndarray) -> np.ndarray:
        return local_pts @ self.rotation.T + np.asarray(self.x)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Physical node coordinates, shape ``shape + (n,)``."""
        mesh = np.stack(np.meshgrid(*self.local_axes, indexing="ij"), axis=-1)
        return self._to_physical(mesh)

    @cached_property
    def cell_centers(self) -> np.ndarray:
        """Physical cell-centre coordinates, shape ``cell_shape + (n,)``."""
        mids = [ax[:-1] + self.h / 2.0 for ax in self.local_axes]
        mesh = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
        return self._to_physical(mesh)

    @cached_property
    def normal_coordinate(self) -> np.ndarray:
        """(y - x) . nu per node; equals the last local coordinate."""
        mesh = np.meshgrid(*self.local_axes, indexing="ij")
        return np.array(mesh[-1]) if self.n > 1 else np.asarray(mesh[0])

    # ---- sparse cell<->node operators (built on demand, cached) ----

    @cached_property
    def _flat_corner_indices(self) -> list[np.ndarray]:
        """Flat node index of each cell corner; entry 0 is the anchor corner."""
        idx = np.arange(self.n_nodes).reshape(self.shape)
        if self.n == 1:
            return [idx[:-1].ravel(), idx[1:].ravel()]
        return [
            idx[:-1, :-1].ravel(),
            idx[1:, :-1].ravel(),
            idx[:-1, 1:].ravel(),
            idx[1:, 1:].ravel(),
        ]

    @cached_property
    def diff_matrices(self) -> list[sp.csr_matrix]:
        """Forward-difference matrices (cells x nodes), one per local axis."""
        corners = self._flat_corner_indices
        anchor = corners[0]
        rows = np.arange(self.n_cells)
        mats = []
        for a in range(self.n):
            nb = corners[1] if (self.n == 1 or a == 0) else corners[2]
            data = np.concatenate(
                [np.full(self.n_cells, -1.0 / self.h), np.full(self.n_cells, 1.0 / self.h)]
            )
            ij = (np.concatenate([rows, rows]), np.concatenate([anchor, nb]))
            mats.append(
                sp.csr_matrix((data, ij), shape=(self.n_cells, self.n_nodes))
            )
        return mats

    @cached_property
    def corner_average_matrix(self) -> sp.csr_matrix:
        corners = self._flat_corner_indices
        k = len(corners)
        rows = np.tile(np.arange(self.n_cells), k)
        cols = np.concatenate(corners)
        data = np.full(self.n_cells * k, 1.0 / k)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_cells, self.n_nodes))

    @cached_property
    def anchor_matrix(self) -> sp.csr_matrix:
        anchor = self._flat_corner_indices[0]
        rows = np.arange(self.n_cells)
        return sp.csr_matrix(
            (np.ones(self.n_cells), (rows, anchor)),
            shape=(self.n_cells, self.n_nodes),
        )


@dataclass(frozen=True)
class BoundaryMask:
    """Dirichlet ring of the grid, with the mixed-mode lateral exemption."""

    dirichlet_nodes: np.ndarray  # bool, grid.shape
    mixed_exempt_nodes: np.ndarray  # bool, subset of dirichlet_nodes
    mode: str = "dirichlet"

    @property
    def fixed_nodes(self) -> np.ndarray:
        """Nodes carrying the datum for the active mode."""
        if self.mode == "mixed":
            return self.dirichlet_nodes & ~self.mixed_exempt_nodes
        return self.dirichlet_nodes


@dataclass
class PhaseFieldState:
    """Nodal pair (u, v): u has a trailing component axis, v is scalar."""

    u: np.ndarray  # grid.shape + (m,)
    v: np.ndarray  # grid.shape

    @property
    def m(self) -> int:
        return self.u.shape[-1]

    def copy(self) -> "PhaseFieldState":
        return PhaseFieldState(self.u.copy(), self.v.copy())


def _ring_mask(shape: tuple[int, ...], layer_cells: int) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for axis in range(len(shape)):
        sl_lo = [slice(None)] * len(shape)
        sl_hi = [slice(None)] * len(shape)
        sl_lo[axis] = slice(0, layer_cells)
        sl_hi[axis] = slice(shape[axis] - layer_cells, shape[axis])
        mask[tuple(sl_lo)] = True
        mask[tuple(sl_hi)] = True
    return mask


def build_box_grid(
    x,
    sides,
    nu,
    h: float,
    eps: float | None = None,
    mode: str = "dirichlet",
    layer_cells: int = 1,
) -> tuple[Grid, BoundaryMask]:
    """Box variant of :func:`build_cube_grid` with per-axis side lengths."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sides = np.atleast_1d(np.asarray(sides, dtype=float))
    if mode not in ("dirichlet", "mixed"):
        raise ConfigurationError(f"unknown boundary mode '{mode}'")
    if (sides <= 0).any() or h <= 0:
        raise InvalidInputError("side lengths and spacing must be positive")
    if h > sides.min() / 8.0 + 1e-12:
        raise ConfigurationError(
            f"resolution rule violated: h <= rho/8 requires h <= {sides.min() / 8.0:g}, got h = {h:g}"
        )
    if eps is not None and h > eps / 4.0 + 1e-12:
        raise ConfigurationError(
            f"resolution rule violated: h <= eps/4 requires h <= {eps / 4.0:g}, got h = {h:g}"
        )
    if mode == "mixed" and eps is None:
        raise ConfigurationError("mixed mode requires eps")
    for s in sides:
        if abs(s / h - round(s / h)) > 1e-9:
            raise ConfigurationError(
                f"spacing h = {h:g} must divide the side length {s:g}"
            )
    grid = Grid(tuple(x), tuple(float(s) for s in sides), tuple(nu_i for nu_i in np.atleast_1d(nu)), float(h))
    ring = _ring_mask(grid.shape, layer_cells)
    if eps is not None:
        exempt = ring & (np.abs(grid.normal_coordinate) <= eps + 1e-12)
    else:
        exempt = np.zeros(grid.shape, dtype=bool)
    return grid, BoundaryMask(ring, exempt, mode=mode)


def build_cube_grid(
    x,
    rho: float,
    nu,
    h: float,
    eps: float | None = None,
    mode: str = "dirichlet",
    layer_cells: int = 1,
) -> tuple[Grid, BoundaryMask]:
    """Grid and boundary mask for the rotated cube Q^nu_rho(x)."""
    n = np.atleast_1d(np.asarray(x, dtype=float)).size
    return build_box_grid(x, [rho] * n, nu, h, eps=eps, mode=mode, layer_cells=layer_cells)


def apply_gradient(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Per-cell forward-difference gradient, mapped to physical axes.

    ``field`` is nodal, either scalar (grid.shape) or with a trailing
    component axis.  The result has a trailing axis of length n (physical
    derivative directions), preceded by the component axis if present.
    """
    field = np.asarray(field, dtype=float)
    scalar = field.shape == grid.shape
    if not scalar and field.shape[:-1] != grid.shape:
        raise InvalidInputError("field shape does not match grid")
    d_local = _local_gradient(grid, field)
    # d/dy_a = sum_b R[a, b] d/ds_b
    return np.einsum("ab,...b->...a", grid.rotation, d_local)


def _local_gradient(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Forward differences along local axes; shape cell_shape + [comps] + (n,)."""
    if grid.n == 1:
        d = (field[1:] - field[:-1]) / grid.h
        return d[..., None]
    anchor = field[:-1, :-1]
    d1 = (field[1:, :-1] - anchor) / grid.h
    d2 = (field[:-1, 1:] - anchor) / grid.h
    return np.stack([d1, d2], axis=-1)


def jump_datum(grid: Grid, x, nu, eps: float, zeta) -> PhaseFieldState:
    """Regularised jump profile pair sampled at the grid nodes.

    The pair transitions across the plane (y - x) . nu = 0: u ramps from 0
    to zeta and v dips to 0 in a layer of width ~eps, with (u, v) equal to
    (zeta * chi_{t>0}, 1) for |t| >= 1 where t = (y - x) . nu / eps.  The u
    ramp is shrunk by one cell relative to the v plateau so that every cell
    whose discrete gradient of u is nonzero has v = 0 at all of its corners
    (exact discrete compatibility, needs h <= eps/4).
    """
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    if np.linalg.norm(zeta) == 0.0:
        raise InvalidInputError("jump amplitude zeta must be nonzero")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    t = ((grid.nodes - x) @ nu) / eps
    half_width = max(0.5 - grid.h / eps, 0.25)
    ramp = np.clip(t / (2.0 * half_width) + 0.5, 0.0, 1.0)
    u = ramp[..., None] * zeta
    v = np.clip(2.0 * np.abs(t) - 1.0, 0.0, 1.0)
    return PhaseFieldState(u, v)
