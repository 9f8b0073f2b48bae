"""Signature kernels between piecewise-linear paths and Gram-matrix assembly.

The kernel is evaluated by dynamic programming over the double increments of
a static kernel on the knot values. For the linear static kernel this is the
inner product of truncated signatures; for the RBF kernel it is the
truncated signature kernel of the knot sequences lifted into the RKHS.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .barcode import Barcode
from .embeddings import embed
from .paths import PiecewiseLinearPath, add_lags, time_augment

THREADS_ENV = "PERSIG_THREADS"
# knot values used by the median heuristic are subsampled to at most this many
MEDIAN_SAMPLE = 2000


@dataclass(frozen=True)
class StaticKernel:
    """Kernel on knot values: ``linear`` (dot product) or ``rbf`` with lengthscale ``sigma``."""

    kind: str = "linear"
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown static kernel {self.kind!r}; expected 'linear' or 'rbf'")
        if self.kind == "rbf" and (self.sigma is None or not self.sigma > 0):
            raise ValueError("the rbf kernel needs sigma > 0")
        if self.kind == "linear" and self.sigma is not None:
            raise ValueError("sigma applies only to the rbf kernel")

    def matrix(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return u @ v.T
        sq = (u * u).sum(1)[:, None] + (v * v).sum(1)[None, :] - 2 * u @ v.T
        return np.exp(-np.maximum(sq, 0.0) / (2 * self.sigma**2))

    def describe(self) -> str:
        return "linear" if self.kind == "linear" else f"rbf(sigma={self.sigma!r})"


LINEAR = StaticKernel()


def increment_matrix(x: PiecewiseLinearPath, y: PiecewiseLinearPath, kappa: StaticKernel = LINEAR) -> np.ndarray:
    """``delta[i, j] = k(x_{i+1}, y_{j+1}) - k(x_{i+1}, y_j) - k(x_i, y_{j+1}) + k(x_i, y_j)``."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    g = kappa.matrix(x.values, y.values)
    return g[1:, 1:] - g[1:, :-1] - g[:-1, 1:] + g[:-1, :-1]


def _strict_prefix(a: np.ndarray, axis: int) -> np.ndarray:
    """``out[i] = sum_{i' < i} a[i']`` along ``axis``."""
    c = np.cumsum(a, axis=axis)
    c = np.moveaxis(c, axis, 0)
    out = np.zeros_like(c)
    out[1:] = c[:-1]
    return np.moveaxis(out, 0, axis)


def kernel_levels(delta: np.ndarray, M: int) -> np.ndarray:
    """Level-by-level contributions ``[1, k_1, ..., k_M]`` from an increment matrix.

    A level-``m`` term is a pair of nondecreasing segment sequences
    ``(i_1..i_m), (j_1..j_m)`` weighted by ``prod delta[i_r, j_r]`` divided by
    the factorials of the run lengths of both sequences. The state tracks the
    current segment pair and the lengths ``p, q`` of the current runs; a step
    that extends a run to length ``p'`` divides by ``p'``.
    """
    if M < 0:
        raise ValueError("truncation level must be >= 0")
    out = np.zeros(M + 1)
    out[0] = 1.0
    if M == 0 or delta.size == 0:
        return out
    l1, l2 = delta.shape
    # state[i, j, p-1, q-1]
    state = np.zeros((l1, l2, M, M))
    state[:, :, 0, 0] = delta
    out[1] = delta.sum()
    inv = 1.0 / np.arange(1, M + 1)
    for m in range(1, M):
        new = np.zeros_like(state)
        total = state.sum(axis=(2, 3))
        # both sequences move to new segments
        new[:, :, 0, 0] = _strict_prefix(_strict_prefix(total, 0), 1)
        # x moves on, y repeats its segment: run length q' = q + 1
        by_q = _strict_prefix(state.sum(axis=2), 0)  # (l1, l2, M) summed over p, i' < i
        new[:, :, 0, 1:] = by_q[:, :, :-1] * inv[1:]
        # y moves on, x repeats
        by_p = _strict_prefix(state.sum(axis=3), 1)
        new[:, :, 1:, 0] = by_p[:, :, :-1] * inv[1:]
        # both repeat
        new[:, :, 1:, 1:] = state[:, :, :-1, :-1] * (inv[1:, None] * inv[None, 1:])
        new *= delta[:, :, None, None]
        state = new
        out[m + 1] = state.sum()
    return out


def sig_kernel(
    x: PiecewiseLinearPath,
    y: PiecewiseLinearPath,
    M: int,
    kappa: StaticKernel = LINEAR,
    levels: bool = False,
):
    """Truncated signature kernel ``sum_{m <= M} <S(x)_m, S(y)_m>``.

    Args:
        levels: return the per-level contributions ``[1, k_1, ..., k_M]``
            instead of their sum.
    """
    parts = kernel_levels(increment_matrix(x, y, kappa), M)
    return parts if levels else float(parts.sum())


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return threads


@dataclass(frozen=True, eq=False)
class GramMatrix:
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        sym = (self.matrix + self.matrix.T) / 2
        return float(np.linalg.eigvalsh(sym).min())

    def is_psd(self, rtol: float = 1e-8) -> bool:
        return self.min_eigenvalue() >= -rtol * float(np.trace(self.matrix))

    def metadata_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.metadata.items())


def _pairwise(xs, ys, M, kappa, pairs, threads):
    def one(ij):
        i, j = ij
        return sig_kernel(xs[i], ys[j], M, kappa)

    workers = thread_count(threads)
    if workers == 1 or len(pairs) < 2:
        return [one(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, pairs))


def gram(
    paths: Sequence[PiecewiseLinearPath],
    M: int,
    kappa: StaticKernel = LINEAR,
    threads: int | None = None,
    metadata: dict | None = None,
) -> GramMatrix:
    """Symmetric matrix of signature kernels; each unordered pair is computed once."""
    if len(paths) == 0:
        raise ValueError("need at least one path")
    dims = {p.dim for p in paths}
    if len(dims) != 1:
        raise ValueError(f"paths have differing dimensions {sorted(dims)}")
    n = len(paths)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    vals = _pairwise(paths, paths, M, kappa, pairs, threads)
    g = np.zeros((n, n))
    for (i, j), v in zip(pairs, vals):
        g[i, j] = g[j, i] = v
    meta = {"M": M, "kappa": kappa.describe(), "n": n}
    meta.update(metadata or {})
    return GramMatrix(g, meta)


def cross_gram(
    xs: Sequence[PiecewiseLinearPath],
    ys: Sequence[PiecewiseLinearPath],
    M: int,
    kappa: StaticKernel = LINEAR,
    threads: int | None = None,
) -> np.ndarray:
    """Rectangular matrix ``k(xs[i], ys[j])``."""
    pairs = [(i, j) for i in range(len(xs)) for j in range(len(ys))]
    vals = _pairwise(xs, ys, M, kappa, pairs, threads)
    return np.array(vals, dtype=float).reshape(len(xs), len(ys))


def median_heuristic(paths: Sequence[PiecewiseLinearPath]) -> float:
    """Median pairwise distance between knot values pooled over ``paths``.

    At most :data:`MEDIAN_SAMPLE` values, evenly spaced in the pooled order,
    are used. Falls back to 1 when all values coincide.
    """
    pts = np.vstack([p.values for p in paths])
    if len(pts) > MEDIAN_SAMPLE:
        pts = pts[np.linspace(0, len(pts) - 1, MEDIAN_SAMPLE).astype(int)]
    iu, ju = np.triu_indices(len(pts), 1)
    if len(iu) == 0:
        return 1.0
    med = float(np.median(np.linalg.norm(pts[iu] - pts[ju], axis=1)))
    return med if med > 0 else 1.0


@dataclass(frozen=True)
class PipelineParams:
    """Embedding choice plus the hyperparameters ``M, tau, lags`` and static kernel."""

    embedding: str = "envelope"
    dim: int = 0
    K: int | None = None
    N: int | None = None
    coeffs: tuple | None = None
    n: int | None = None
    refine: int = 4
    M: int = 3
    tau: int = 0
    lags: tuple[float, ...] = ()
    kappa: StaticKernel = LINEAR

    def __post_init__(self):
        if self.tau not in (0, 1):
            raise ValueError("tau must be 0 or 1")
        if self.M < 0:
            raise ValueError("M must be >= 0")

    def describe(self) -> dict:
        return {
            "embedding": self.embedding,
            "dim": self.dim,
            "K": self.K,
            "N": self.N,
            "n": self.n,
            "M": self.M,
            "tau": self.tau,
            "lags": ",".join(map(repr, self.lags)),
            "kappa": self.kappa.describe(),
        }


def kernelized_feature_pipeline(b: Barcode, params: PipelineParams) -> PiecewiseLinearPath:
    """Embed ``b``, then optionally time-augment and add lags."""
    x = embed(
        b,
        params.embedding,
        dim=params.dim,
        K=params.K,
        N=params.N,
        coeffs=params.coeffs,
        refine=params.refine,
        n=params.n,
    )
    if params.tau:
        x = time_augment(x)
    if params.lags:
        x = add_lags(x, params.lags)
    return x
