"""Tests for discrete measures, grids, partitions, and the distortion."""

import numpy as np
import pytest

from quantdistill.errors import DimensionError
from quantdistill.measures import (
    DiscreteMeasure,
    QuantizationGrid,
    distortion_gradient,
    nearest_index,
    project_to_grid,
    quadratic_distortion,
    squared_distances,
    voronoi_partition,
)


def test_squared_distances_matches_loop():
    rng = np.random.default_rng(0)
    points = rng.normal(size=(7, 3))
    centroids = rng.normal(size=(4, 3))
    d2 = squared_distances(points, centroids)
    assert d2.shape == (7, 4)
    for i in range(7):
        for j in range(4):
            expected = ((points[i] - centroids[j]) ** 2).sum()
            np.testing.assert_allclose(d2[i, j], expected, rtol=1e-14)


def test_squared_distances_exact_tie_stays_exact():
    # Dyadic coordinates: both differences are exactly 0.25, so the squared
    # distances are bitwise equal and the tie is real, not approximate.
    points = np.array([[0.5]])
    centroids = np.array([[0.25], [0.75]])
    d2 = squared_distances(points, centroids)
    assert d2[0, 0] == d2[0, 1]
    grid = QuantizationGrid(centroids)
    assert nearest_index(points[0], grid) == 0


def test_measure_validates_weights():
    atoms = np.zeros((3, 2))
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, np.array([0.7, 0.5, -0.2]))
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, np.array([0.5, np.nan, 0.5]))


def test_measure_rejects_bad_atoms():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([[np.inf]]), np.array([1.0]))
    with pytest.raises(ValueError):
        DiscreteMeasure.uniform(np.empty((0, 2)))


def test_measure_allows_zero_weights():
    mu = DiscreteMeasure(np.array([[0.0], [1.0]]), np.array([1.0, 0.0]))
    assert mu.n_atoms == 2


def test_uniform_and_from_unnormalized():
    atoms = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    uniform = DiscreteMeasure.uniform(atoms)
    np.testing.assert_allclose(uniform.weights, np.full(3, 1.0 / 3.0))
    scaled = DiscreteMeasure.from_unnormalized(atoms, np.array([2.0, 1.0, 1.0]))
    np.testing.assert_allclose(scaled.weights, np.array([0.5, 0.25, 0.25]))
    with pytest.raises(ValueError):
        DiscreteMeasure.from_unnormalized(atoms, np.zeros(3))


def test_grid_rejects_duplicate_centroids():
    with pytest.raises(ValueError):
        QuantizationGrid(np.array([[1.0, 2.0], [1.0, 2.0]]))
    grid = QuantizationGrid(np.array([[1.0, 2.0], [1.0, 2.5]]))
    assert grid.n_centroids == 2
    assert grid.dim == 2


def test_nearest_index_breaks_ties_low():
    grid = QuantizationGrid(np.array([[-1.0], [1.0]]))
    assert nearest_index(np.array([0.0]), grid) == 0
    assert nearest_index(np.array([0.5]), grid) == 1
    with pytest.raises(DimensionError):
        nearest_index(np.array([0.0, 0.0]), grid)


def test_voronoi_partition_masses_and_centroids():
    mu = DiscreteMeasure(
        np.array([[0.0], [0.2], [1.0], [1.4]]),
        np.array([0.1, 0.3, 0.4, 0.2]),
    )
    grid = QuantizationGrid(np.array([[0.0], [1.0]]))
    part = voronoi_partition(mu, grid)
    np.testing.assert_array_equal(part.assignment, [0, 0, 1, 1])
    np.testing.assert_allclose(part.cell_mass, [0.4, 0.6])
    np.testing.assert_allclose(
        part.cell_centroid[:, 0],
        [(0.1 * 0.0 + 0.3 * 0.2) / 0.4, (0.4 * 1.0 + 0.2 * 1.4) / 0.6],
    )


def test_voronoi_partition_empty_cell_is_nan():
    mu = DiscreteMeasure.uniform(np.array([[0.0], [0.1]]))
    grid = QuantizationGrid(np.array([[0.0], [50.0]]))
    part = voronoi_partition(mu, grid)
    assert part.cell_mass[1] == 0.0
    assert np.isnan(part.cell_centroid[1]).all()


def test_quadratic_distortion_hand_value():
    # Two atoms at distance 0.5 from their shared nearest centroid.
    mu = DiscreteMeasure.uniform(np.array([[0.0], [1.0]]))
    grid = QuantizationGrid(np.array([[0.5], [4.0]]))
    np.testing.assert_allclose(quadratic_distortion(mu, grid), 0.25)


def test_quadratic_distortion_matches_loop():
    rng = np.random.default_rng(1)
    atoms = rng.normal(size=(20, 2))
    weights = rng.random(20)
    weights /= weights.sum()
    mu = DiscreteMeasure(atoms, weights)
    grid = QuantizationGrid(rng.normal(size=(5, 2)))
    total = 0.0
    for i in range(20):
        best = min(((atoms[i] - c) ** 2).sum() for c in grid.centroids)
        total += weights[i] * best
    np.testing.assert_allclose(quadratic_distortion(mu, grid), total, rtol=1e-12)


def test_distortion_zero_iff_atoms_on_centroids():
    grid = QuantizationGrid(np.array([[0.0, 0.0], [1.0, 1.0]]))
    on_grid = DiscreteMeasure.uniform(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert quadratic_distortion(on_grid, grid) == 0.0
    off_grid = DiscreteMeasure.uniform(np.array([[0.0, 0.1], [1.0, 1.0]]))
    assert quadratic_distortion(off_grid, grid) > 0.0


def test_distortion_gradient_hand_value():
    mu = DiscreteMeasure.uniform(np.array([[0.0], [1.0]]))
    grid = QuantizationGrid(np.array([[0.25], [4.0]]))
    grad = distortion_gradient(mu, grid)
    # Cell 0 holds both atoms (mass 1, mean 0.5); cell 1 is empty.
    np.testing.assert_allclose(grad, [[2.0 * (0.25 - 0.5)], [0.0]])


def test_distortion_gradient_vanishes_at_cell_means():
    rng = np.random.default_rng(2)
    mu = DiscreteMeasure.uniform(rng.normal(size=(30, 2)))
    grid = QuantizationGrid(rng.normal(size=(3, 2)))
    part = voronoi_partition(mu, grid)
    assert np.all(part.cell_mass > 0)
    at_means = QuantizationGrid(part.cell_centroid)
    moved = voronoi_partition(mu, at_means)
    # One assignment refresh can move atoms; only a fixed point has zero gradient.
    if np.array_equal(moved.assignment, part.assignment):
        np.testing.assert_allclose(
            distortion_gradient(mu, at_means), 0.0, atol=1e-12
        )


def test_project_to_grid_supports_all_centroids():
    mu = DiscreteMeasure(
        np.array([[0.0], [0.2], [1.0]]), np.array([0.2, 0.3, 0.5])
    )
    grid = QuantizationGrid(np.array([[0.0], [1.0], [9.0]]))
    nu = project_to_grid(mu, grid)
    np.testing.assert_array_equal(nu.atoms, grid.centroids)
    np.testing.assert_allclose(nu.weights, [0.5, 0.5, 0.0])


def test_project_to_grid_dimension_mismatch():
    mu = DiscreteMeasure.uniform(np.zeros((2, 2)) + np.arange(2)[:, None])
    with pytest.raises(DimensionError):
        project_to_grid(mu, QuantizationGrid(np.array([[0.0]])))
