"""Discrete measures, quantization grids, and the quadratic distortion.

A discrete measure is a finite weighted point cloud; a quantization grid is a
finite set of pairwise-distinct centroids. The quadratic distortion of a grid
against a measure is the weighted mean squared distance from each atom to its
nearest centroid. Nearest-centroid ties always resolve to the lowest centroid
index so that every operation is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

WEIGHT_SUM_TOL = 1e-12


def as_point_array(values, name: str = "points") -> np.ndarray:
    """Coerce to a C-contiguous float64 array of shape (n, d) with finite entries."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty in both axes, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def as_point(value, name: str = "point") -> np.ndarray:
    """Coerce to a finite float64 vector of shape (d,)."""
    arr = np.ascontiguousarray(value, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """All pairwise squared Euclidean distances, shape (n, K).

    Computed by direct differencing rather than the norm-expansion identity so
    that exact ties in the inputs stay exact in the output.
    """
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability measure supported on finitely many points.

    Attributes
    ----------
    atoms : ndarray, shape (n, d)
        Support points, all finite.
    weights : ndarray, shape (n,)
        Nonnegative masses summing to 1 within ``WEIGHT_SUM_TOL``. Individual
        weights may be zero; atoms with zero weight are retained in place.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = as_point_array(self.atoms, "atoms")
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if weights.ndim != 1 or weights.shape[0] != atoms.shape[0]:
            raise ValueError(
                f"weights must have shape ({atoms.shape[0]},), got {weights.shape}"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, atoms) -> "DiscreteMeasure":
        """Equal-weight measure on the given points."""
        atoms = as_point_array(atoms, "atoms")
        n = atoms.shape[0]
        return cls(atoms, np.full(n, 1.0 / n))

    @classmethod
    def from_unnormalized(cls, atoms, masses) -> "DiscreteMeasure":
        """Measure with the given nonnegative masses rescaled to total 1."""
        masses = np.ascontiguousarray(masses, dtype=np.float64)
        total = masses.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError("masses must be nonnegative with positive finite total")
        return cls(atoms, masses / total)

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]


@dataclass(frozen=True)
class QuantizationGrid:
    """An ordered set of pairwise-distinct centroids, shape (K, d)."""

    centroids: np.ndarray

    def __post_init__(self):
        centroids = as_point_array(self.centroids, "centroids")
        # Pairwise distinctness: duplicate rows would make cell assignment ambiguous.
        if np.unique(centroids, axis=0).shape[0] != centroids.shape[0]:
            raise ValueError("centroids must be pairwise distinct")
        object.__setattr__(self, "centroids", centroids)

    @property
    def n_centroids(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class VoronoiPartition:
    """Assignment of a measure's atoms to the cells of a grid.

    Attributes
    ----------
    assignment : ndarray of int, shape (n,)
        Index of the nearest centroid for each atom, ties to the lowest index.
    cell_mass : ndarray, shape (K,)
        Total atom weight in each cell; sums to 1.
    cell_centroid : ndarray, shape (K, d)
        Weight-normalized mean of the atoms in each cell. Rows for empty cells
        (``cell_mass == 0``) are NaN and must not be read as points.
    """

    assignment: np.ndarray
    cell_mass: np.ndarray
    cell_centroid: np.ndarray


def _check_same_dim(a_dim: int, b_dim: int) -> None:
    if a_dim != b_dim:
        raise DimensionError(f"dimension mismatch: {a_dim} vs {b_dim}")


def nearest_index(point, grid: QuantizationGrid) -> int:
    """Index of the centroid nearest to ``point``; ties go to the lowest index."""
    p = as_point(point)
    _check_same_dim(p.shape[0], grid.dim)
    d2 = squared_distances(p[None, :], grid.centroids)[0]
    return int(np.argmin(d2))


def voronoi_partition(mu: DiscreteMeasure, grid: QuantizationGrid) -> VoronoiPartition:
    """Assign every atom of ``mu`` to its nearest centroid of ``grid``.

    Returns
    -------
    VoronoiPartition
        Per-atom assignments, per-cell masses, and per-cell weighted centroids
        (NaN rows for empty cells). Reductions run in ascending atom-index
        order, so results are bitwise reproducible.
    """
    _check_same_dim(mu.dim, grid.dim)
    d2 = squared_distances(mu.atoms, grid.centroids)
    assignment = np.argmin(d2, axis=1)
    k = grid.n_centroids
    cell_mass = np.bincount(assignment, weights=mu.weights, minlength=k)
    weighted = mu.atoms * mu.weights[:, None]
    sums = np.empty((k, mu.dim))
    for axis in range(mu.dim):
        sums[:, axis] = np.bincount(assignment, weights=weighted[:, axis], minlength=k)
    cell_centroid = np.full((k, mu.dim), np.nan)
    nonempty = cell_mass > 0
    cell_centroid[nonempty] = sums[nonempty] / cell_mass[nonempty, None]
    return VoronoiPartition(assignment, cell_mass, cell_centroid)


def quadratic_distortion(mu: DiscreteMeasure, grid: QuantizationGrid) -> float:
    """Weighted mean squared distance from each atom to its nearest centroid.

    Nonnegative; zero exactly when every positive-weight atom coincides with
    some centroid.
    """
    _check_same_dim(mu.dim, grid.dim)
    d2 = squared_distances(mu.atoms, grid.centroids)
    return float(np.dot(mu.weights, d2.min(axis=1)))


def distortion_gradient(mu: DiscreteMeasure, grid: QuantizationGrid) -> np.ndarray:
    """Gradient of the quadratic distortion in the centroid positions.

    Row j equals ``2 * sum_{atoms i in cell j} w_i * (x_j - a_i)``; rows of
    empty cells are zero. The gradient vanishes exactly when every nonempty
    cell's centroid sits at its cell's weighted mean.
    """
    _check_same_dim(mu.dim, grid.dim)
    part = voronoi_partition(mu, grid)
    grad = np.zeros_like(grid.centroids)
    nonempty = part.cell_mass > 0
    grad[nonempty] = (
        2.0
        * part.cell_mass[nonempty, None]
        * (grid.centroids[nonempty] - part.cell_centroid[nonempty])
    )
    return grad


def project_to_grid(mu: DiscreteMeasure, grid: QuantizationGrid) -> DiscreteMeasure:
    """Push ``mu`` forward through the nearest-centroid map.

    The result is supported on the grid's centroids, in grid order, with
    weights equal to the Voronoi cell masses. Zero-mass centroids are kept in
    place so the support always matches the grid row for row. Cell masses are
    rescaled by their total (1 up to accumulation error) so the result always
    satisfies the measure's weight-sum contract.
    """
    part = voronoi_partition(mu, grid)
    return DiscreteMeasure.from_unnormalized(grid.centroids.copy(), part.cell_mass)
