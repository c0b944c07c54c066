"""Tests for Lipschitz gap checks and the weighted classifier."""

import numpy as np
import pytest

from quantdistill.errors import DimensionError
from quantdistill.measures import DiscreteMeasure, QuantizationGrid
from quantdistill.risk import (
    LipschitzFunction,
    TinyClassifier,
    WeightedDataset,
    check_lipschitz_gap,
    classification_accuracy,
    gradient_discrepancy,
    loss_and_gradient,
    majority_labels,
    train_weighted,
    weighted_expectation,
)


def test_distance_function_values_and_constant():
    f = LipschitzFunction.distance_to([1.0, 0.0])
    assert f.lipschitz_bound == 1.0
    assert f.dim == 2
    np.testing.assert_allclose(f(np.array([4.0, 4.0])), 5.0)
    np.testing.assert_allclose(
        f(np.array([[1.0, 0.0], [1.0, 2.0]])), [0.0, 2.0]
    )


def test_max_affine_function_values():
    slopes = np.array([[1.0, 0.0], [0.0, 1.0]])
    f = LipschitzFunction.max_affine(slopes, np.array([0.0, -1.0]))
    np.testing.assert_allclose(f(np.array([0.5, 3.0])), 2.0)
    assert f.lipschitz_bound == 1.0
    with pytest.raises(ValueError):
        LipschitzFunction.max_affine(2.0 * slopes, np.zeros(2))


def test_constant_function_is_flat():
    f = LipschitzFunction.constant(3.5)
    assert f.lipschitz_bound == 0.0
    assert f.dim is None
    np.testing.assert_allclose(f(np.array([[1.0], [2.0]])), [3.5, 3.5])


def test_function_dimension_check():
    f = LipschitzFunction.distance_to([0.0])
    with pytest.raises(DimensionError):
        f(np.array([[1.0, 2.0]]))


def test_weighted_expectation_matches_dot():
    mu = DiscreteMeasure(
        np.array([[0.0], [1.0], [3.0]]), np.array([0.2, 0.3, 0.5])
    )
    f = LipschitzFunction.distance_to([0.0])
    expected = 0.2 * 0.0 + 0.3 * 1.0 + 0.5 * 3.0
    np.testing.assert_allclose(weighted_expectation(f, mu), expected)


def test_gap_check_bounds_hand_instance():
    mu = DiscreteMeasure.uniform(np.array([[0.0], [1.0], [2.0], [3.0]]))
    grid = QuantizationGrid(np.array([[0.5], [2.5]]))
    functions = [
        LipschitzFunction.distance_to([0.0]),
        LipschitzFunction.constant(2.0),
    ]
    reports = check_lipschitz_gap(mu, grid, functions)
    assert all(r.passed for r in reports)
    assert reports[0].bound == pytest.approx(0.5)
    # The constant function has zero gap and zero bound.
    assert reports[1].gap == 0.0
    assert reports[1].bound == 0.0


def test_weighted_dataset_validation():
    points = np.zeros((3, 2)) + np.arange(3)[:, None]
    good = WeightedDataset(points, np.array([0, 1, 0]), np.ones(3))
    assert good.n_classes == 2
    with pytest.raises(ValueError):
        WeightedDataset(points, np.array([0, 2, 0]), np.ones(3))
    with pytest.raises(ValueError):
        WeightedDataset(points, np.array([0.0, 1.0, 0.0]), np.ones(3))
    with pytest.raises(ValueError):
        WeightedDataset(points, np.array([0, 1, 0]), np.array([1.0, 0.0, 1.0]))


def test_classifier_parameter_counts():
    assert TinyClassifier.multinomial_logistic(4, 3).n_parameters == 4 * 3 + 3
    assert (
        TinyClassifier.one_hidden_layer(4, 3, 8).n_parameters
        == 4 * 8 + 8 + 8 * 3 + 3
    )
    with pytest.raises(ValueError):
        TinyClassifier.multinomial_logistic(2, 1)


def test_classifier_logits_linear_case():
    clf = TinyClassifier.multinomial_logistic(2, 2)
    theta = np.array([1.0, 0.0, 0.0, 1.0, 0.5, -0.5])
    x = np.array([[2.0, 3.0]])
    # theta packs W (row-major, shape (2, 2)) then b.
    np.testing.assert_allclose(
        clf.logits(x, theta), [[2.0 + 0.5, 3.0 - 0.5]]
    )
    np.testing.assert_array_equal(clf.predict(x, theta), [0])


def test_classifier_requires_parameters():
    clf = TinyClassifier.multinomial_logistic(2, 2)
    with pytest.raises(ValueError):
        clf.logits(np.zeros((1, 2)))


@pytest.mark.parametrize("model", ["logistic", "hidden"])
def test_loss_gradient_matches_finite_differences(model):
    rng = np.random.default_rng(40)
    points = rng.normal(size=(12, 3))
    labels = rng.integers(0, 2, size=12).astype(np.intp)
    labels[0], labels[1] = 0, 1
    data = WeightedDataset(points, labels, rng.random(12) + 0.5)
    if model == "logistic":
        clf = TinyClassifier.multinomial_logistic(3, 2)
    else:
        clf = TinyClassifier.one_hidden_layer(3, 2, 4)
    theta = 0.3 * rng.standard_normal(clf.n_parameters)
    _, grad = loss_and_gradient(clf, data, theta)
    h = 1e-6
    fd = np.empty_like(grad)
    for i in range(theta.shape[0]):
        bump = theta.copy()
        bump[i] += h
        up, _ = loss_and_gradient(clf, data, bump)
        bump[i] -= 2 * h
        down, _ = loss_and_gradient(clf, data, bump)
        fd[i] = (up - down) / (2 * h)
    np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)


def test_loss_weights_scale_invariant_and_replicate_points():
    rng = np.random.default_rng(41)
    points = rng.normal(size=(6, 2))
    labels = np.array([0, 1, 0, 1, 0, 1], dtype=np.intp)
    clf = TinyClassifier.multinomial_logistic(2, 2)
    theta = 0.2 * rng.standard_normal(clf.n_parameters)
    base = WeightedDataset(points, labels, np.ones(6))
    scaled = WeightedDataset(points, labels, np.full(6, 7.0))
    loss_a, grad_a = loss_and_gradient(clf, base, theta)
    loss_b, grad_b = loss_and_gradient(clf, scaled, theta)
    np.testing.assert_allclose(loss_a, loss_b, rtol=1e-12)
    np.testing.assert_allclose(grad_a, grad_b, rtol=1e-9, atol=1e-15)
    # Doubling one point's weight equals listing the point twice.
    weights = np.ones(6)
    weights[2] = 2.0
    doubled = WeightedDataset(points, labels, weights)
    replicated = WeightedDataset(
        np.vstack([points, points[2:3]]),
        np.concatenate([labels, labels[2:3]]),
        np.ones(7),
    )
    loss_c, grad_c = loss_and_gradient(clf, doubled, theta)
    loss_d, grad_d = loss_and_gradient(clf, replicated, theta)
    np.testing.assert_allclose(loss_c, loss_d, rtol=1e-12)
    np.testing.assert_allclose(grad_c, grad_d, rtol=1e-9, atol=1e-15)


def test_train_weighted_decreases_loss_and_is_deterministic():
    rng = np.random.default_rng(42)
    points = np.vstack(
        [rng.normal(size=(20, 2)) - 2.0, rng.normal(size=(20, 2)) + 2.0]
    )
    labels = np.repeat(np.array([0, 1], dtype=np.intp), 20)
    data = WeightedDataset(points, labels, np.ones(40))
    clf = TinyClassifier.multinomial_logistic(2, 2)
    start_loss, _ = loss_and_gradient(clf, data, clf.init_parameters(7))
    trained_a = train_weighted(clf, data, epochs=50, seed=7)
    trained_b = train_weighted(clf, data, epochs=50, seed=7)
    final_loss, _ = loss_and_gradient(trained_a, data)
    assert final_loss < start_loss
    np.testing.assert_array_equal(trained_a.theta, trained_b.theta)
    assert classification_accuracy(trained_a, points, labels) == 1.0


def test_train_weighted_keeps_existing_parameters_as_start():
    points = np.array([[-1.0, 0.0], [1.0, 0.0]])
    labels = np.array([0, 1], dtype=np.intp)
    data = WeightedDataset(points, labels, np.ones(2))
    clf = TinyClassifier.multinomial_logistic(2, 2)
    warm = train_weighted(clf, data, epochs=5, seed=0)
    resumed = train_weighted(warm, data, epochs=5, seed=999)
    loss_warm, _ = loss_and_gradient(warm, data)
    loss_resumed, _ = loss_and_gradient(resumed, data)
    # The second run starts from the trained parameters, so the seed is idle.
    assert loss_resumed <= loss_warm


def test_gradient_discrepancy_zero_on_same_data():
    rng = np.random.default_rng(43)
    points = rng.normal(size=(8, 2))
    labels = np.array([0, 1] * 4, dtype=np.intp)
    data = WeightedDataset(points, labels, np.ones(8))
    clf = TinyClassifier.multinomial_logistic(2, 2)
    theta = clf.init_parameters(0)
    assert gradient_discrepancy(clf, theta, data, data) == 0.0


def test_majority_labels_votes_and_ties():
    points = np.array([[0.0], [0.1], [0.2], [1.0]])
    labels = np.array([1, 0, 0, 1], dtype=np.intp)
    grid = QuantizationGrid(np.array([[0.1], [1.0], [50.0]]))
    out = majority_labels(points, labels, np.ones(4), grid)
    # Cell 0 collects two 0-votes against one 1-vote; cell 2 is empty and
    # inherits the label of the nearest atom.
    np.testing.assert_array_equal(out, [0, 1, 1])
    tie = majority_labels(
        np.array([[0.0], [0.2]]),
        np.array([1, 0], dtype=np.intp),
        np.ones(2),
        QuantizationGrid(np.array([[0.1]])),
    )
    np.testing.assert_array_equal(tie, [0])
