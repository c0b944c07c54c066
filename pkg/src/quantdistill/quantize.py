"""Weighted vector quantization: online competitive learning and Lloyd refinement.

The online learner processes one sample per step: the nearest centroid (the
winner) moves toward the sample by the current step size, a companion weight
vector tracks each centroid's share of wins through the same averaging, and a
visit counter records raw win totals. With the count-reciprocal schedule the
exact same loop is classical mini-batch k-means, so both entry points share
one code path and agree bit for bit under a common seed.

Lloyd refinement is the batch counterpart: each centroid jumps to the weighted
mean of its cell until centroids stop moving. Empty cells are reseeded at the
currently worst-served atom, which never increases the distortion.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionError,
    EmptyCluster,
    InsufficientPoints,
    InvalidSchedule,
)
from .measures import (
    DiscreteMeasure,
    QuantizationGrid,
    as_point_array,
    squared_distances,
)

RESULT_WEIGHT_TOL = 1e-9
LLOYD_DEFAULT_TOL = 1e-10
LLOYD_DEFAULT_MAX_ITERATIONS = 500


def as_generator(seed) -> np.random.Generator:
    """Pass through a Generator, otherwise build one from the given seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class StepSchedule:
    """Step-size rule for the online learner.

    ``harmonic`` emits ``a / (b + i)`` at step ``i`` (counting from 1), so the
    first and largest step is ``a / (b + 1)``. ``count_reciprocal`` emits the
    reciprocal of the winner's visit count after incrementing it, so a
    centroid's first win moves it exactly onto the sample.
    """

    kind: str
    a: float = 1.0
    b: float = 10.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "count_reciprocal"):
            raise InvalidSchedule(f"unknown schedule kind {self.kind!r}")
        if self.kind == "harmonic":
            if not (np.isfinite(self.a) and np.isfinite(self.b)):
                raise InvalidSchedule("schedule parameters must be finite")
            if self.a <= 0 or self.b < 0:
                raise InvalidSchedule("harmonic schedule needs a > 0 and b >= 0")
            if self.a > self.b + 1.0:
                raise InvalidSchedule(
                    f"harmonic schedule emits {self.a / (self.b + 1.0)!r} > 1 "
                    "at its first step"
                )

    @classmethod
    def harmonic(cls, a: float = 1.0, b: float = 10.0) -> "StepSchedule":
        return cls("harmonic", a, b)

    @classmethod
    def count_reciprocal(cls) -> "StepSchedule":
        return cls("count_reciprocal")

    def step(self, i: int) -> float:
        """Step size for 0-based step index ``i`` (harmonic only)."""
        if self.kind != "harmonic":
            raise InvalidSchedule(
                "count_reciprocal steps depend on visit counts, not the step index"
            )
        return self.a / (self.b + i + 1.0)


class EmpiricalSampler:
    """Draws atoms of a discrete measure with replacement, by weight.

    Sampling uses inverse-CDF lookup on one uniform draw per sample, so the
    index stream is a pure function of the generator's uniform stream.
    """

    def __init__(self, measure: DiscreteMeasure):
        self.measure = measure
        self._cdf = np.cumsum(measure.weights)

    @property
    def dim(self) -> int:
        return self.measure.dim

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        u = rng.random(n)
        idx = np.searchsorted(self._cdf, u, side="right")
        np.clip(idx, 0, self.measure.n_atoms - 1, out=idx)
        return self.measure.atoms[idx]


class GaussianMixtureSampler:
    """Draws from a mixture of isotropic Gaussians.

    Parameters
    ----------
    means : ndarray, shape (m, d)
    variances : ndarray, shape (m,)
        Per-component isotropic variances, all positive.
    weights : ndarray, shape (m,)
        Mixture weights, nonnegative with positive total (normalized here).
    """

    def __init__(self, means, variances, weights):
        self.means = as_point_array(means, "means")
        self.variances = np.ascontiguousarray(variances, dtype=np.float64)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        m = self.means.shape[0]
        if self.variances.shape != (m,) or np.any(self.variances <= 0):
            raise ValueError("variances must be positive with one entry per component")
        if weights.shape != (m,) or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        self.weights = weights / weights.sum()
        self._cdf = np.cumsum(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        comp = np.searchsorted(self._cdf, rng.random(n), side="right")
        np.clip(comp, 0, self.means.shape[0] - 1, out=comp)
        noise = rng.standard_normal((n, self.dim))
        return self.means[comp] + np.sqrt(self.variances[comp])[:, None] * noise


class UniformCubeSampler:
    """Draws uniformly from the unit cube [0, 1)^d."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        return rng.random((n, self._dim))


@dataclass(frozen=True)
class WeightedQuantization:
    """Result of an online quantization run.

    Attributes
    ----------
    grid : QuantizationGrid
        Final centroid positions.
    counts : ndarray, shape (K,)
        Raw win totals per centroid; they sum to the number of steps.
    weights : ndarray, shape (K,)
        Companion weights in the probability simplex (within accumulated
        rounding drift). The online learner reports its running weight
        average; the k-means entry point reports normalized counts.
    winner_sq_dists : ndarray or None
        Per-step squared distance from the sample to the winner, measured
        before the winner moved. Present only when recording was requested.
    """

    grid: QuantizationGrid
    counts: np.ndarray
    weights: np.ndarray
    winner_sq_dists: np.ndarray | None = None

    def __post_init__(self):
        k = self.grid.n_centroids
        counts = np.ascontiguousarray(self.counts, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if counts.shape != (k,) or np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise ValueError("counts must be nonnegative integers, one per centroid")
        if weights.shape != (k,) or np.any(weights < 0):
            raise ValueError("weights must be nonnegative, one per centroid")
        if abs(float(weights.sum()) - 1.0) > RESULT_WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 within {RESULT_WEIGHT_TOL}")
        if self.winner_sq_dists is not None:
            trace = np.ascontiguousarray(self.winner_sq_dists, dtype=np.float64)
            if trace.ndim != 1 or np.any(trace < 0):
                raise ValueError("winner_sq_dists must be a 1-d nonnegative array")
            object.__setattr__(self, "winner_sq_dists", trace)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "weights", weights)

    def measure(self) -> DiscreteMeasure:
        """The weighted point cloud (centroids, weights) as a measure."""
        return DiscreteMeasure.from_unnormalized(self.grid.centroids.copy(), self.weights)


def _seeding_pool(source, rng: np.random.Generator, n_centroids: int):
    """Atoms and weights to seed from: the measure itself, or a sampled pool."""
    if isinstance(source, DiscreteMeasure):
        return source.atoms, source.weights
    pool = max(512, 32 * n_centroids)
    atoms = source.draw(rng, pool)
    return atoms, np.full(pool, 1.0 / pool)


def init_grid(
    source,
    n_centroids: int,
    strategy: str = "dsquared",
    seed=None,
) -> QuantizationGrid:
    """Choose initial centroids from a measure or a sampler.

    Parameters
    ----------
    source : DiscreteMeasure or sampler
        Seeding pool. A sampler contributes ``max(512, 32 K)`` fresh draws.
    n_centroids : int
        Number of centroids K.
    strategy : {"dsquared", "random_subset"}
        ``dsquared`` picks the first centroid by weight and each later one
        with probability proportional to weight times squared distance to the
        nearest chosen centroid, which spreads seeds across separated modes.
        ``random_subset`` picks K distinct atoms uniformly.
    seed : int, SeedSequence, or Generator

    Raises
    ------
    InsufficientPoints
        If the pool holds fewer than K distinct points.
    """
    if n_centroids < 1:
        raise ValueError("n_centroids must be positive")
    rng = as_generator(seed)
    atoms, weights = _seeding_pool(source, rng, n_centroids)
    n = atoms.shape[0]
    if strategy == "dsquared":
        chosen = np.empty(n_centroids, dtype=np.intp)
        cdf = np.cumsum(weights)
        first = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        chosen[0] = min(first, n - 1)
        d2 = squared_distances(atoms, atoms[chosen[0]][None, :])[:, 0]
        for k in range(1, n_centroids):
            scores = weights * d2
            total = scores.sum()
            if total <= 0:
                raise InsufficientPoints(
                    f"only {k} distinct points available for {n_centroids} centroids"
                )
            cdf = np.cumsum(scores)
            idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            chosen[k] = min(idx, n - 1)
            step = squared_distances(atoms, atoms[chosen[k]][None, :])[:, 0]
            np.minimum(d2, step, out=d2)
        return QuantizationGrid(atoms[chosen].copy())
    if strategy == "random_subset":
        distinct = np.unique(atoms, axis=0)
        if distinct.shape[0] < n_centroids:
            raise InsufficientPoints(
                f"only {distinct.shape[0]} distinct points available "
                f"for {n_centroids} centroids"
            )
        pick = rng.choice(distinct.shape[0], size=n_centroids, replace=False)
        return QuantizationGrid(distinct[np.sort(pick)].copy())
    raise ValueError(f"unknown init strategy {strategy!r}")


def _competitive_loop(samples, x0, schedule: StepSchedule, record: bool):
    x = x0.copy()
    k = x.shape[0]
    w = np.full(k, 1.0 / k)
    v = np.zeros(k)
    n = samples.shape[0]
    trace = np.empty(n) if record else None
    count_mode = schedule.kind == "count_reciprocal"
    a, b = schedule.a, schedule.b
    for i in range(n):
        s = samples[i]
        diff = x - s
        d2 = np.einsum("kd,kd->k", diff, diff)
        win = int(np.argmin(d2))
        if record:
            trace[i] = d2[win]
        v[win] += 1.0
        g = 1.0 / v[win] if count_mode else a / (b + i + 1.0)
        x[win] = (1.0 - g) * x[win] + g * s
        w *= 1.0 - g
        w[win] += g
    return x, v, w, trace


def clvq(
    sampler,
    n_centroids: int,
    schedule: StepSchedule,
    n_steps: int,
    seed,
    *,
    init: QuantizationGrid | None = None,
    init_strategy: str = "dsquared",
    record_distortion: bool = False,
) -> WeightedQuantization:
    """Online competitive learning with companion weights.

    Each step draws one sample, finds the nearest centroid (ties to the
    lowest index), records that centroid's squared distance if requested,
    then moves only the winner toward the sample by the schedule's step and
    refreshes the companion weights by the same convex averaging. Centroids
    therefore never leave the convex hull of the initial grid and the
    samples.

    Parameters
    ----------
    sampler : object with ``dim`` and ``draw(rng, n)``
        Sample source.
    n_centroids : int
    schedule : StepSchedule
    n_steps : int
        Number of samples presented, at least 1.
    seed : int, SeedSequence, or Generator
        Drives initialization (when ``init`` is None) and the sample stream.
    init : QuantizationGrid, optional
        Starting grid; drawn via ``init_grid(sampler, ..., init_strategy)``
        from the same generator when omitted.
    record_distortion : bool
        Store per-step winner squared distances for the running-average
        diagnostic.

    Raises
    ------
    InvalidSchedule
        If the schedule would emit a step outside (0, 1].
    DimensionError
        If ``init`` and the sampler disagree on dimension.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    if not isinstance(schedule, StepSchedule):
        raise InvalidSchedule("schedule must be a StepSchedule")
    if schedule.kind == "harmonic" and not 0.0 < schedule.step(0) <= 1.0:
        raise InvalidSchedule("first harmonic step falls outside (0, 1]")
    rng = as_generator(seed)
    if init is None:
        init = init_grid(sampler, n_centroids, init_strategy, rng)
    if init.dim != sampler.dim:
        raise DimensionError(f"dimension mismatch: {init.dim} vs {sampler.dim}")
    if init.n_centroids != n_centroids:
        raise ValueError("init grid size must equal n_centroids")
    samples = sampler.draw(rng, n_steps)
    x, v, w, trace = _competitive_loop(samples, init.centroids, schedule, record_distortion)
    return WeightedQuantization(QuantizationGrid(x), v, w, trace)


def minibatch_kmeans(
    data: DiscreteMeasure,
    n_centroids: int,
    batch_size: int,
    n_iterations: int,
    seed,
    *,
    init: QuantizationGrid | None = None,
    init_strategy: str = "dsquared",
    record_distortion: bool = False,
) -> WeightedQuantization:
    """Mini-batch k-means with per-centroid count-reciprocal steps.

    Presents ``batch_size * n_iterations`` weighted draws from ``data`` to the
    same sequential loop as the online learner under the count-reciprocal
    schedule, so grids and counts agree with a same-seed online run bit for
    bit. Reported weights are the win counts normalized by the total number
    of steps.
    """
    if batch_size < 1 or n_iterations < 1:
        raise ValueError("batch_size and n_iterations must be positive")
    result = clvq(
        EmpiricalSampler(data),
        n_centroids,
        StepSchedule.count_reciprocal(),
        batch_size * n_iterations,
        seed,
        init=init,
        init_strategy=init_strategy,
        record_distortion=record_distortion,
    )
    return replace(result, weights=result.counts / result.counts.sum())


@dataclass(frozen=True)
class LloydInfo:
    """Diagnostics from a Lloyd run.

    ``distortion_history[0]`` is the starting distortion and each later entry
    follows one update; the sequence never increases. ``empty_cells_resolved``
    counts reseeded centroids across all iterations.
    """

    n_iterations: int
    converged: bool
    distortion_history: np.ndarray
    empty_cells_resolved: int


def _lloyd_distortion(atoms, weights, centroids) -> float:
    d2 = squared_distances(atoms, centroids)
    return float(np.dot(weights, d2.min(axis=1)))


def lloyd(
    mu: DiscreteMeasure,
    init: QuantizationGrid,
    *,
    max_iterations: int = LLOYD_DEFAULT_MAX_ITERATIONS,
    tol: float = LLOYD_DEFAULT_TOL,
    return_info: bool = False,
):
    """Batch centroid refinement to a fixed point of the cell-mean map.

    Repeats: assign atoms to nearest centroids, move each centroid to its
    cell's weighted mean. A centroid whose cell holds no mass is reseeded at
    the atom currently farthest from every centroid, which strictly helps
    that atom and costs nothing elsewhere, so the distortion never increases
    (checked every iteration). Stops when the largest centroid displacement
    is at most ``tol`` or after ``max_iterations``.

    Returns the final grid, or ``(grid, LloydInfo)`` when ``return_info``.
    """
    if mu.dim != init.dim:
        raise DimensionError(f"dimension mismatch: {mu.dim} vs {init.dim}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    atoms, weights = mu.atoms, mu.weights
    x = init.centroids.copy()
    k = x.shape[0]
    history = [_lloyd_distortion(atoms, weights, x)]
    resolved = 0
    converged = False
    iterations = 0
    for _ in range(max_iterations):
        iterations += 1
        d2 = squared_distances(atoms, x)
        assign = np.argmin(d2, axis=1)
        mass = np.bincount(assign, weights=weights, minlength=k)
        new_x = x.copy()
        nonempty = mass > 0
        for axis in range(atoms.shape[1]):
            sums = np.bincount(assign, weights=weights * atoms[:, axis], minlength=k)
            new_x[nonempty, axis] = sums[nonempty] / mass[nonempty]
        for j in np.flatnonzero(~nonempty):
            dmin = squared_distances(atoms, new_x).min(axis=1)
            worst = int(np.argmax(dmin))
            if dmin[worst] <= 0.0:
                raise InsufficientPoints(
                    "cannot reseed an empty cell: every atom already sits on a centroid"
                )
            new_x[j] = atoms[worst]
            resolved += 1
        displacement = float(np.sqrt(((new_x - x) ** 2).sum(axis=1).max()))
        x = new_x
        current = _lloyd_distortion(atoms, weights, x)
        assert current <= history[-1] + 1e-12 * (1.0 + history[-1])
        history.append(current)
        if displacement <= tol:
            converged = True
            break
    grid = QuantizationGrid(x)
    if not return_info:
        return grid
    info = LloydInfo(iterations, converged, np.asarray(history), resolved)
    return grid, info


def variance_reduced_weights(counts) -> np.ndarray:
    """Square-root reweighting of visit counts for training losses.

    Maps counts ``v`` over K centroids to ``sqrt(K * v / sum(v))``, so equal
    counts give all ones and rare centroids are damped less than
    proportionally. The output does not sum to 1.

    Raises
    ------
    EmptyCluster
        If any count is zero; the caller must decide how to handle a centroid
        that never won.
    """
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.shape[0] < 1:
        raise ValueError("counts must be a nonempty 1-d array")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if np.any(counts == 0):
        raise EmptyCluster("a centroid with zero visits has no defined reweighting")
    k = counts.shape[0]
    return np.sqrt(k * counts / counts.sum())


def empirical_distortion_trace(result: WeightedQuantization) -> np.ndarray:
    """Running mean of the recorded per-step winner squared distances.

    Entry t is the average of the first t+1 recorded values. The run must
    have been made with ``record_distortion=True``.
    """
    if result.winner_sq_dists is None:
        raise ValueError(
            "no recorded winner distances; run the quantizer with record_distortion=True"
        )
    trace = result.winner_sq_dists
    return np.cumsum(trace) / np.arange(1, trace.shape[0] + 1)
