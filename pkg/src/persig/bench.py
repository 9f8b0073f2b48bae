"""Desk-scale orbit and shape classification benchmarks."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .barcode import Barcode
from .datasets import orbit_dataset, shape_dataset
from .embeddings import envelope_embed, euler_embed, generalized_betti_embed
from .kernel import StaticKernel, gram, median_heuristic
from .learn import (
    Evaluation,
    ParamGrid,
    cross_validated_gridsearch,
    evaluate,
    format_table,
    knn_classify,
    knn_features,
)
from .paths import PiecewiseLinearPath, drop_stationary, time_augment
from .rips import rips_barcode
from .signature import n_coefficients, signature

ORBIT_SCALE = 0.05
SHAPE_SCALE = 1.5
DEFAULT_GRID = {"M": (2, 3, 4, 5, 6), "tau": (0, 1)}


@dataclass(frozen=True)
class FeaturePipeline:
    """Barcode -> path -> truncated signature -> 1-NN.

    ``M`` and ``tau`` are fixed unless a grid is passed to
    :func:`run_feature_benchmark`, in which case they are chosen per
    repetition by cross-validation on the training half.
    """

    name: str
    embedding: Callable[[Barcode], PiecewiseLinearPath]
    M: int = 4
    tau: int = 1
    shuffle_labels: bool = False


@dataclass(frozen=True)
class KernelPipeline:
    """Barcode -> path -> signature kernel with an RBF static kernel -> 1-NN."""

    name: str
    embedding: Callable[[Barcode], PiecewiseLinearPath]
    M: int = 3
    sigma_factor: float = 1.0


def envelope_h0(b: Barcode) -> PiecewiseLinearPath:
    return envelope_embed(b, 0)


def euler_curve(b: Barcode) -> PiecewiseLinearPath:
    return euler_embed(b)


def betti_h1(b: Barcode) -> PiecewiseLinearPath:
    return generalized_betti_embed(b, [[0.0, 1.0]])


def betti_h0_h1(b: Barcode) -> PiecewiseLinearPath:
    return generalized_betti_embed(b, np.eye(2))


def envelope_h0_moving(b: Barcode) -> PiecewiseLinearPath:
    # repeated intervals give stationary segments, which add nothing to the
    # kernel but cost time in the dynamic program
    return drop_stationary(envelope_embed(b, 0))


def orbit_pipelines(with_kernel: bool = True) -> list:
    out: list = [
        FeaturePipeline("Phi_E (H0)", envelope_h0),
        FeaturePipeline("Phi_chi (H0+H1)", euler_curve),
        FeaturePipeline("Phi_beta (H0+H1)", betti_h0_h1),
        FeaturePipeline("shuffled labels, Phi_chi", euler_curve, shuffle_labels=True),
    ]
    if with_kernel:
        out.append(KernelPipeline("k_E (H0, rbf)", envelope_h0_moving, M=2))
    return out


def shape_pipelines() -> list:
    return [
        FeaturePipeline("Phi_beta (H1)", betti_h1),
        FeaturePipeline("shuffled labels, Phi_beta", betti_h1, shuffle_labels=True),
    ]


def barcodes(clouds: Sequence[np.ndarray], max_dim: int, max_scale: float) -> list[Barcode]:
    return [rips_barcode(c, max_dim=max_dim, max_scale=max_scale) for c in clouds]


def _signature_table(paths: Sequence[PiecewiseLinearPath], depth: int) -> np.ndarray:
    return np.vstack([signature(p, depth).flatten(include_level0=False) for p in paths])


def _feature_sets(barcodes_, embedding, taus, depth):
    """Signature features up to ``depth`` for each ``tau``; lower levels are a prefix."""
    base = [embedding(b) for b in barcodes_]
    out = {}
    for tau in taus:
        paths = [time_augment(p) for p in base] if tau else base
        out[tau] = (paths[0].dim, _signature_table(paths, depth))
    return out


def _columns(features, tau: int, M: int) -> np.ndarray:
    n, table = features[tau]
    return table[:, : n_coefficients(n, M)]


def run_feature_benchmark(
    barcodes_: Sequence[Barcode],
    labels,
    pipeline: FeaturePipeline,
    repetitions: int = 5,
    seed: int = 0,
    grid: dict | None = None,
    n_folds: int = 5,
) -> Evaluation:
    """Mean 1-NN accuracy over seeded 50/50 stratified splits."""
    y = np.asarray(labels, dtype=int)
    taus = tuple(grid["tau"]) if grid else (pipeline.tau,)
    depth = max(grid["M"]) if grid else pipeline.M
    features = _feature_sets(barcodes_, pipeline.embedding, taus, depth)

    def run(tr, te, rng):
        y_train = y[tr]
        if pipeline.shuffle_labels:
            y_train = rng.permutation(y_train)
        if grid:
            def fit_predict(cell, a, b):
                x = _columns(features, cell["tau"], cell["M"])[tr]
                return knn_features(x[a], x[b], y_train[a], k=1)

            cv_seed = int(rng.integers(2**31))
            best = cross_validated_gridsearch(y_train, ParamGrid(grid), fit_predict, n_folds, cv_seed, threads=1).best
            tau, M = best["tau"], best["M"]
        else:
            tau, M = pipeline.tau, pipeline.M
        x = _columns(features, tau, M)
        pred = knn_features(x[tr], x[te], y_train, k=1)
        return float(np.mean(pred == y[te]))

    return evaluate(y, run, repetitions=repetitions, seed=seed)


def run_kernel_benchmark(
    barcodes_: Sequence[Barcode],
    labels,
    pipeline: KernelPipeline,
    repetitions: int = 5,
    seed: int = 0,
    threads: int | None = None,
) -> Evaluation:
    """1-NN in the feature space of the signature kernel.

    The full Gram matrix is computed once; the RBF lengthscale is the median
    heuristic over all paths times ``sigma_factor``.
    """
    y = np.asarray(labels, dtype=int)
    paths = [pipeline.embedding(b) for b in barcodes_]
    kappa = StaticKernel("rbf", median_heuristic(paths) * pipeline.sigma_factor)
    g = gram(paths, pipeline.M, kappa, threads=threads).matrix

    def run(tr, te, rng):
        pred = knn_classify(g[np.ix_(tr, tr)], g[np.ix_(te, tr)], y[tr], k=1)
        return float(np.mean(pred == y[te]))

    return evaluate(y, run, repetitions=repetitions, seed=seed)


@dataclass
class BenchReport:
    dataset: str
    results: dict
    seconds: float

    def table(self) -> str:
        rows = [(name, {self.dataset: ev}) for name, ev in self.results.items()]
        return format_table(rows, [self.dataset])


def _run(dataset, barcodes_, labels, pipelines, repetitions, seed, grid, threads, started):
    results = {}
    for p in pipelines:
        if isinstance(p, KernelPipeline):
            results[p.name] = run_kernel_benchmark(barcodes_, labels, p, repetitions, seed, threads)
        else:
            results[p.name] = run_feature_benchmark(barcodes_, labels, p, repetitions, seed, grid)
    return BenchReport(dataset, results, time.perf_counter() - started)


def bench_orbits(
    per_class: int = 20,
    n_points: int = 300,
    seed: int = 0,
    repetitions: int = 5,
    max_scale: float = ORBIT_SCALE,
    pipelines=None,
    grid: dict | None = None,
    sequential: bool = False,
    threads: int | None = None,
) -> BenchReport:
    """Orbit benchmark: five parameter classes, H0 and H1 up to ``max_scale``."""
    started = time.perf_counter()
    clouds, labels = orbit_dataset(per_class, n_points, seed=seed, sequential=sequential)
    bars = barcodes(clouds, 1, max_scale)
    pipelines = orbit_pipelines() if pipelines is None else pipelines
    return _run("orbits", bars, labels, pipelines, repetitions, seed, grid, threads, started)


def bench_shapes(
    per_class: int = 10,
    n_points: int = 100,
    seed: int = 0,
    repetitions: int = 5,
    max_scale: float = SHAPE_SCALE,
    noise_sd: float = 0.1,
    pipelines=None,
    grid: dict | None = None,
    threads: int | None = None,
) -> BenchReport:
    """Shape benchmark: six classes, H1 up to ``max_scale``."""
    started = time.perf_counter()
    clouds, labels = shape_dataset(per_class, n_points, noise_sd=noise_sd, seed=seed)
    bars = barcodes(clouds, 1, max_scale)
    pipelines = shape_pipelines() if pipelines is None else pipelines
    return _run("shapes", bars, labels, pipelines, repetitions, seed, grid, threads, started)
