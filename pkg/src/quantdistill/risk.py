"""Lipschitz expectation gaps and weighted training on distilled clouds.

Replacing a measure by a quantized stand-in changes any Lipschitz statistic
by at most the Lipschitz constant times the root quantization error; this
module provides concrete function families with certified constants, the gap
check, and a small classifier whose weighted loss treats a distilled cloud
with companion weights as a drop-in for the full dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import DimensionError, NonFiniteLoss
from .measures import (
    DiscreteMeasure,
    QuantizationGrid,
    as_point,
    as_point_array,
    project_to_grid,
    quadratic_distortion,
    squared_distances,
    voronoi_partition,
)

GAP_SLACK = 1e-9
UNIT_SLOPE_TOL = 1e-9
ARMIJO_SLOPE = 1e-4
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class LipschitzFunction:
    """A scalar test function with a certified Lipschitz constant.

    Kinds: ``distance_to_point`` (constant 1), ``max_affine`` over unit-norm
    slopes (constant 1), and ``constant`` (constant 0). Instances are
    callable on a single point or a batch of points.
    """

    kind: str
    anchor: np.ndarray | None = None
    slopes: np.ndarray | None = None
    offsets: np.ndarray | None = None
    value: float = 0.0

    def __post_init__(self):
        if self.kind == "distance_to_point":
            object.__setattr__(self, "anchor", as_point(self.anchor, "anchor"))
        elif self.kind == "max_affine":
            slopes = as_point_array(self.slopes, "slopes")
            offsets = np.ascontiguousarray(self.offsets, dtype=np.float64)
            if offsets.shape != (slopes.shape[0],):
                raise ValueError("offsets must hold one value per slope")
            if not np.all(np.isfinite(offsets)):
                raise ValueError("offsets must be finite")
            norms = np.sqrt((slopes**2).sum(axis=1))
            if np.any(np.abs(norms - 1.0) > UNIT_SLOPE_TOL):
                raise ValueError("slopes must have unit Euclidean norm")
            object.__setattr__(self, "slopes", slopes)
            object.__setattr__(self, "offsets", offsets)
        elif self.kind == "constant":
            if not np.isfinite(self.value):
                raise ValueError("value must be finite")
        else:
            raise ValueError(f"unknown function kind {self.kind!r}")

    @classmethod
    def distance_to(cls, anchor) -> "LipschitzFunction":
        return cls("distance_to_point", anchor=anchor)

    @classmethod
    def max_affine(cls, slopes, offsets) -> "LipschitzFunction":
        return cls("max_affine", slopes=slopes, offsets=offsets)

    @classmethod
    def constant(cls, value: float) -> "LipschitzFunction":
        return cls("constant", value=float(value))

    @property
    def lipschitz_bound(self) -> float:
        return 0.0 if self.kind == "constant" else 1.0

    @property
    def dim(self) -> int | None:
        """Input dimension, or None for the dimension-free constant function."""
        if self.kind == "distance_to_point":
            return self.anchor.shape[0]
        if self.kind == "max_affine":
            return self.slopes.shape[1]
        return None

    def __call__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        single = arr.ndim == 1
        batch = arr[None, :] if single else arr
        if self.dim is not None and batch.shape[1] != self.dim:
            raise DimensionError(f"dimension mismatch: {batch.shape[1]} vs {self.dim}")
        if self.kind == "distance_to_point":
            out = np.sqrt(((batch - self.anchor) ** 2).sum(axis=1))
        elif self.kind == "max_affine":
            out = (batch @ self.slopes.T + self.offsets).max(axis=1)
        else:
            out = np.full(batch.shape[0], self.value)
        return float(out[0]) if single else out


def weighted_expectation(f, nu: DiscreteMeasure) -> float:
    """Expectation of a vectorized scalar function under a discrete measure."""
    values = np.asarray(f(nu.atoms), dtype=np.float64)
    if values.shape != (nu.n_atoms,):
        raise ValueError("f must map (n, d) points to (n,) values")
    return float(np.dot(nu.weights, values))


@dataclass(frozen=True)
class GapReport:
    """Observed expectation gap against its quantization bound for one function."""

    function_kind: str
    gap: float
    bound: float
    slack: float
    passed: bool


def check_lipschitz_gap(
    mu: DiscreteMeasure,
    grid: QuantizationGrid,
    functions,
) -> list[GapReport]:
    """Check |E_mu f - E_nu f| <= L * sqrt(distortion) for each function.

    ``nu`` is the nearest-centroid projection of ``mu`` onto the grid.
    ``passed`` allows an absolute slack of 1e-9 for rounding.
    """
    nu = project_to_grid(mu, grid)
    root_distortion = float(np.sqrt(quadratic_distortion(mu, grid)))
    reports = []
    for f in functions:
        gap = abs(weighted_expectation(f, mu) - weighted_expectation(f, nu))
        bound = f.lipschitz_bound * root_distortion
        reports.append(
            GapReport(
                function_kind=f.kind,
                gap=gap,
                bound=bound,
                slack=bound - gap,
                passed=gap <= bound + GAP_SLACK,
            )
        )
    return reports


@dataclass(frozen=True)
class WeightedDataset:
    """Labeled points with positive per-point loss weights.

    Labels must be the contiguous range 0..n_classes-1 over the whole
    dataset, in any order. Weights need not sum to 1; losses normalize by the
    total weight.
    """

    points: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = as_point_array(self.points, "points")
        labels = np.ascontiguousarray(self.labels)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        n = points.shape[0]
        if labels.shape != (n,) or not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be one integer per point")
        if np.any(labels < 0):
            raise ValueError("labels must be nonnegative")
        present = np.unique(labels)
        if not np.array_equal(present, np.arange(present.shape[0])):
            raise ValueError("labels must form a contiguous range starting at 0")
        if weights.shape != (n,) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be one finite value per point")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels.astype(np.intp))
        object.__setattr__(self, "weights", weights)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class TinyClassifier:
    """A multinomial logistic model, optionally with one tanh hidden layer.

    ``theta`` packs all parameters into one flat vector: ``[W, b]`` for the
    linear model and ``[W1, b1, W2, b2]`` with row-major weight blocks for
    the hidden-layer model. ``theta=None`` means not yet initialized.
    """

    n_inputs: int
    n_classes: int
    hidden: int | None = None
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be positive")
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2")
        if self.hidden is not None and self.hidden < 1:
            raise ValueError("hidden width must be positive when given")
        if self.theta is not None:
            theta = np.ascontiguousarray(self.theta, dtype=np.float64)
            if theta.shape != (self.n_parameters,):
                raise ValueError(
                    f"theta must have shape ({self.n_parameters},), got {theta.shape}"
                )
            if not np.all(np.isfinite(theta)):
                raise ValueError("theta must be finite")
            object.__setattr__(self, "theta", theta)

    @classmethod
    def multinomial_logistic(cls, n_inputs: int, n_classes: int) -> "TinyClassifier":
        return cls(n_inputs, n_classes, hidden=None)

    @classmethod
    def one_hidden_layer(
        cls, n_inputs: int, n_classes: int, width: int
    ) -> "TinyClassifier":
        return cls(n_inputs, n_classes, hidden=width)

    @property
    def n_parameters(self) -> int:
        d, c = self.n_inputs, self.n_classes
        if self.hidden is None:
            return d * c + c
        h = self.hidden
        return d * h + h + h * c + c

    def init_parameters(self, seed) -> np.ndarray:
        """Small random parameters; deterministic in the seed."""
        rng = np.random.default_rng(seed)
        return 0.1 * rng.standard_normal(self.n_parameters)

    def _unpack(self, theta: np.ndarray):
        d, c = self.n_inputs, self.n_classes
        if self.hidden is None:
            return theta[: d * c].reshape(d, c), theta[d * c :]
        h = self.hidden
        w1 = theta[: d * h].reshape(d, h)
        b1 = theta[d * h : d * h + h]
        w2 = theta[d * h + h : d * h + h + h * c].reshape(h, c)
        b2 = theta[d * h + h + h * c :]
        return w1, b1, w2, b2

    def _require_theta(self, theta) -> np.ndarray:
        if theta is None:
            theta = self.theta
        if theta is None:
            raise ValueError("no parameters: initialize or train first")
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.n_parameters,):
            raise ValueError(f"theta must have shape ({self.n_parameters},)")
        return theta

    def logits(self, points, theta=None) -> np.ndarray:
        theta = self._require_theta(theta)
        x = as_point_array(points, "points")
        if x.shape[1] != self.n_inputs:
            raise DimensionError(f"dimension mismatch: {x.shape[1]} vs {self.n_inputs}")
        if self.hidden is None:
            w, b = self._unpack(theta)
            return x @ w + b
        w1, b1, w2, b2 = self._unpack(theta)
        return np.tanh(x @ w1 + b1) @ w2 + b2

    def predict(self, points, theta=None) -> np.ndarray:
        """Most likely class per point, ties to the lowest class index."""
        return np.argmax(self.logits(points, theta), axis=1)


def loss_and_gradient(
    classifier: TinyClassifier, data: WeightedDataset, theta=None
) -> tuple[float, np.ndarray]:
    """Weight-normalized cross-entropy and its gradient in ``theta``.

    The loss is ``sum_i w_i * nll_i / sum_i w_i``, so all-ones weights give
    exactly the unweighted mean loss and rescaling all weights by a common
    factor changes nothing.

    Raises
    ------
    NonFiniteLoss
        If the loss or gradient fails to be finite at ``theta``.
    """
    theta = classifier._require_theta(theta)
    if data.dim != classifier.n_inputs:
        raise DimensionError(
            f"dimension mismatch: {data.dim} vs {classifier.n_inputs}"
        )
    if data.n_classes > classifier.n_classes:
        raise ValueError("dataset has more classes than the classifier")
    x, y, w = data.points, data.labels, data.weights
    n = x.shape[0]
    scale = w / w.sum()
    if classifier.hidden is None:
        weight, bias = classifier._unpack(theta)
        z = x @ weight + bias
        hidden_act = None
    else:
        w1, b1, w2, b2 = classifier._unpack(theta)
        hidden_act = np.tanh(x @ w1 + b1)
        z = hidden_act @ w2 + b2
    log_norm = logsumexp(z, axis=1)
    nll = log_norm - z[np.arange(n), y]
    loss = float(np.dot(scale, nll))
    dz = softmax(z, axis=1)
    dz[np.arange(n), y] -= 1.0
    dz *= scale[:, None]
    if classifier.hidden is None:
        grad = np.concatenate([(x.T @ dz).ravel(), dz.sum(axis=0)])
    else:
        gw2 = hidden_act.T @ dz
        gb2 = dz.sum(axis=0)
        dh = (dz @ w2.T) * (1.0 - hidden_act**2)
        grad = np.concatenate(
            [(x.T @ dh).ravel(), dh.sum(axis=0), gw2.ravel(), gb2]
        )
    if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
        raise NonFiniteLoss("loss or gradient is not finite")
    return loss, grad


def train_weighted(
    classifier: TinyClassifier,
    data: WeightedDataset,
    *,
    learning_rate: float = 1.0,
    epochs: int = 200,
    seed=0,
) -> TinyClassifier:
    """Full-batch gradient descent with backtracking on the weighted loss.

    Each epoch evaluates the exact weighted gradient, then halves the step
    from ``learning_rate`` until the Armijo decrease condition holds. The
    run is deterministic: the seed only sets the initial parameters, and only
    when the classifier carries none. Returns a new classifier holding the
    trained parameters.
    """
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if epochs < 1:
        raise ValueError("epochs must be positive")
    theta = classifier.theta
    if theta is None:
        theta = classifier.init_parameters(seed)
    theta = theta.copy()
    loss, grad = loss_and_gradient(classifier, data, theta)
    for _ in range(epochs):
        sq_norm = float(np.dot(grad, grad))
        if sq_norm == 0.0:
            break
        step = learning_rate
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            candidate = theta - step * grad
            try:
                cand_loss, cand_grad = loss_and_gradient(classifier, data, candidate)
            except NonFiniteLoss:
                step *= 0.5
                continue
            if cand_loss <= loss - ARMIJO_SLOPE * step * sq_norm:
                theta, loss, grad = candidate, cand_loss, cand_grad
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return replace(classifier, theta=theta)


def classification_accuracy(
    classifier: TinyClassifier, points, labels, theta=None
) -> float:
    """Unweighted fraction of points assigned their stated label."""
    labels = np.ascontiguousarray(labels)
    predicted = classifier.predict(points, theta)
    return float(np.mean(predicted == labels))


def gradient_discrepancy(
    classifier: TinyClassifier,
    theta,
    full_data: WeightedDataset,
    distilled: WeightedDataset,
) -> float:
    """Euclidean distance between the loss gradients on two datasets.

    Both gradients are taken at the same ``theta`` and each normalizes by its
    own total weight, so the value measures how well the distilled cloud
    reproduces the full data's training signal at that parameter point.
    """
    _, g_full = loss_and_gradient(classifier, full_data, theta)
    _, g_dist = loss_and_gradient(classifier, distilled, theta)
    return float(np.linalg.norm(g_full - g_dist))


def majority_labels(
    points, labels, weights, grid: QuantizationGrid
) -> np.ndarray:
    """Weighted majority label of each Voronoi cell.

    Ties resolve to the lowest label. A cell with no mass takes the label of
    the atom nearest its centroid.
    """
    mu = DiscreteMeasure.from_unnormalized(points, weights)
    labels = np.ascontiguousarray(labels)
    if labels.shape != (mu.n_atoms,) or not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("labels must be one integer per point")
    part = voronoi_partition(mu, grid)
    n_labels = int(labels.max()) + 1
    votes = np.zeros((grid.n_centroids, n_labels))
    np.add.at(votes, (part.assignment, labels), mu.weights)
    out = np.argmax(votes, axis=1).astype(np.intp)
    for j in np.flatnonzero(part.cell_mass == 0.0):
        nearest_atom = int(
            np.argmin(squared_distances(mu.atoms, grid.centroids[j][None, :])[:, 0])
        )
        out[j] = labels[nearest_atom]
    return out
