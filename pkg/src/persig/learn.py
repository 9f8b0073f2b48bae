"""Small classification harness: kernel k-NN, nearest centroid, stratified
splits, cross-validated grid search and repeated evaluation.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .kernel import thread_count
from .signature import TruncatedTensor


def _as_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    return y.astype(int)


def _vote(neighbour_labels: np.ndarray) -> int:
    # np.unique sorts, so argmax on counts resolves ties to the smallest label
    values, counts = np.unique(neighbour_labels, return_counts=True)
    return int(values[np.argmax(counts)])


def knn_classify(gram_train, gram_cross, labels, k: int = 1) -> np.ndarray:
    """k-nearest-neighbour prediction in the feature space of a kernel.

    Squared distances are ``k(x,x) + k(y,y) - 2 k(x,y)``. The test point's own
    ``k(y,y)`` is the same for every training point, so only the training
    diagonal is needed.

    Args:
        gram_train: ``(n, n)`` kernel matrix of training points.
        gram_cross: ``(t, n)`` kernel values between test and training points.
        labels: ``n`` training labels.
        k: number of neighbours; ties in the vote go to the smallest label and
            ties in distance to the earlier training point.
    """
    g = np.asarray(gram_train, dtype=float)
    c = np.atleast_2d(np.asarray(gram_cross, dtype=float))
    y = _as_labels(labels)
    n = len(y)
    if g.shape != (n, n) or c.shape[1] != n:
        raise ValueError(f"inconsistent shapes: gram {g.shape}, cross {c.shape}, {n} labels")
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and the training size {n}, got {k}")
    dist = np.diag(g)[None, :] - 2 * c
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return np.array([_vote(y[row]) for row in order], dtype=int)


def _feature_array(features) -> np.ndarray:
    if len(features) and isinstance(features[0], TruncatedTensor):
        return np.vstack([s.flatten(include_level0=False) for s in features])
    return np.atleast_2d(np.asarray(features, dtype=float))


def knn_features(train, test, labels, k: int = 1) -> np.ndarray:
    """k-NN with the Euclidean metric on explicit feature vectors."""
    a, b = _feature_array(train), _feature_array(test)
    return knn_classify(a @ a.T, b @ a.T, labels, k)


def centroid_classify(train, labels, test=None) -> np.ndarray:
    """Nearest class mean in flattened feature space (Euclidean).

    ``train``/``test`` are signature tensors or feature rows; ``test``
    defaults to ``train``. Ties go to the smallest label.
    """
    x = _feature_array(train)
    t = x if test is None else _feature_array(test)
    y = _as_labels(labels)
    classes = np.arange(y.max() + 1) if len(y) else np.empty(0, int)
    present = np.unique(y)
    if len(present) != len(classes):
        missing = sorted(set(classes.tolist()) - set(present.tolist()))
        raise ValueError(f"no training examples for class(es) {missing}")
    means = np.vstack([x[y == c].mean(axis=0) for c in classes])
    dist = ((t[:, None, :] - means[None, :, :]) ** 2).sum(-1)
    return classes[np.argmin(dist, axis=1)]


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    return float(np.mean(pred == truth)) if len(truth) else float("nan")


# ---------------------------------------------------------------------------
# splits


def stratified_split(labels, rng: np.random.Generator, train_fraction: float = 0.5):
    """Per-class shuffled split; returns sorted ``(train_idx, test_idx)``."""
    y = _as_labels(labels)
    train, test = [], []
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        cut = int(round(train_fraction * len(idx)))
        train.extend(idx[:cut])
        test.extend(idx[cut:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def stratified_folds(labels, n_folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Assign each class's shuffled members round-robin to ``n_folds`` folds."""
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    y = _as_labels(labels)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        if len(idx) < n_folds:
            raise ValueError(f"class {c} has {len(idx)} members, fewer than {n_folds} folds")
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.sort(np.array(f, dtype=int)) for f in folds]


# ---------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class ParamGrid:
    """Cartesian grid over named candidate lists, iterated in insertion order."""

    candidates: Mapping[str, Sequence]

    def __post_init__(self):
        if not self.candidates or any(len(v) == 0 for v in self.candidates.values()):
            raise ValueError("every grid axis needs at least one candidate")

    def cells(self) -> list[dict]:
        keys = list(self.candidates)
        return [dict(zip(keys, combo)) for combo in itertools.product(*self.candidates.values())]

    def __len__(self) -> int:
        return int(np.prod([len(v) for v in self.candidates.values()]))


# fit_predict(cell, train_idx, test_idx) -> predicted labels for test_idx
FitPredict = Callable[[dict, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class GridSearchResult:
    best: dict
    best_score: float
    table: list[tuple[dict, float]] = field(default_factory=list)

    def format(self) -> str:
        lines = []
        for cell, score in self.table:
            desc = " ".join(f"{k}={v}" for k, v in cell.items())
            lines.append(f"{desc}  {score:.3f}")
        return "\n".join(lines)


def cross_validated_gridsearch(
    labels,
    grid: ParamGrid | Sequence[dict],
    fit_predict: FitPredict,
    n_folds: int = 5,
    seed: int = 0,
    threads: int | None = None,
) -> GridSearchResult:
    """Mean validation accuracy per grid cell over stratified folds.

    Every cell sees the same folds. The winner is the first cell (in grid
    order) with the highest mean accuracy. Refitting on the full training set
    is left to the caller.
    """
    y = _as_labels(labels)
    cells = grid.cells() if isinstance(grid, ParamGrid) else list(grid)
    if not cells:
        raise ValueError("empty grid")
    folds = stratified_folds(y, n_folds, np.random.Generator(np.random.PCG64(seed)))
    everything = np.arange(len(y))

    def score(cell: dict) -> float:
        accs = []
        for f in folds:
            tr = np.setdiff1d(everything, f)
            accs.append(accuracy(fit_predict(cell, tr, f), y[f]))
        return float(np.mean(accs))

    workers = thread_count(threads)
    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, cells))
    else:
        scores = [score(c) for c in cells]
    best = int(np.argmax(scores))
    return GridSearchResult(cells[best], scores[best], list(zip(cells, scores)))


# ---------------------------------------------------------------------------
# repeated evaluation


@dataclass(frozen=True)
class Evaluation:
    accuracies: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        if len(self.accuracies) < 2:
            return 0.0
        return float(np.std(self.accuracies, ddof=1))

    def format(self) -> str:
        """Percent accuracy as ``mean ± std`` with one decimal."""
        return f"{100 * self.mean:.1f} ± {100 * self.std:.1f}"


def evaluate(
    labels,
    run: Callable[[np.ndarray, np.ndarray, np.random.Generator], float],
    repetitions: int = 20,
    seed: int = 0,
    train_fraction: float = 0.5,
) -> Evaluation:
    """Repeat ``run(train_idx, test_idx, rng)`` over seeded stratified splits.

    Each repetition draws its split (and hands ``run`` a generator for any
    further randomness) from its own child of ``SeedSequence(seed)``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    y = _as_labels(labels)
    accs = []
    for child in np.random.SeedSequence(seed).spawn(repetitions):
        rng = np.random.Generator(np.random.PCG64(child))
        tr, te = stratified_split(y, rng, train_fraction)
        accs.append(float(run(tr, te, rng)))
    return Evaluation(tuple(accs))


def format_table(rows: Iterable[tuple[str, Mapping[str, Evaluation]]], columns: Sequence[str]) -> str:
    """Plain-text results table: one row per pipeline, one column per dataset."""
    rows = list(rows)
    width = max([len("pipeline")] + [len(name) for name, _ in rows])
    head = "pipeline".ljust(width) + "".join(f"  {c:>14}" for c in columns)
    lines = [head, "-" * len(head)]
    for name, results in rows:
        cells = "".join(
            f"  {results[c].format() if c in results else '-':>14}" for c in columns
        )
        lines.append(name.ljust(width) + cells)
    return "\n".join(lines)
