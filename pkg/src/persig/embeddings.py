"""Maps from barcodes to paths of bounded variation.

Every embedding returns a :class:`~persig.paths.PiecewiseLinearPath` (the
integrated landscape can also be returned exactly, as a
:class:`~persig.paths.QuadraticSplinePath`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .barcode import Barcode, max_betti
from .paths import PiecewiseLinearPath, QuadraticSplinePath

EMBEDDINGS = ("landscape", "ilandscape", "envelope", "naive", "betti", "euler", "gbetti")

# number of critical points evaluated per numpy block in the landscape sweep
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class LandscapeFamily:
    """The first ``K`` landscape functions sampled at all of their breakpoints.

    ``values[j, k]`` is ``lambda_{k+1}(times[j])``; each function is linear
    between consecutive ``times`` and zero outside ``[times[0], times[-1]]``.
    """

    times: np.ndarray
    values: np.ndarray

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        cols = [np.interp(t, self.times, self.values[:, k], left=0.0, right=0.0) for k in range(self.K)]
        return np.stack(cols, axis=-1)

    def to_path(self) -> PiecewiseLinearPath:
        return PiecewiseLinearPath(self.times, self.values)


def _sort_intervals(arr: np.ndarray) -> np.ndarray:
    """Longest first; ties by birth, then death, then input order."""
    if len(arr) == 0:
        return arr
    order = np.lexsort((np.arange(len(arr)), arr[:, 1], arr[:, 0], -(arr[:, 1] - arr[:, 0])))
    return arr[order]


def _tent_values(arr: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Matrix ``(len(t), len(arr))`` of tent heights ``max(0, min(t - b, d - t))``."""
    return np.maximum(0.0, np.minimum(t[:, None] - arr[None, :, 0], arr[None, :, 1] - t[:, None]))


def _critical_points(arr: np.ndarray, horizon: float) -> np.ndarray:
    # between these points no two tent edges cross, so every order statistic
    # of the tents is linear there
    b, d = arr[:, 0], arr[:, 1]
    crossings = (b[:, None] + d[None, :]).ravel() / 2
    pts = np.concatenate([[0.0, horizon], b, d, crossings])
    return np.unique(pts[(pts >= 0) & (pts <= horizon)])


def _drop_collinear(times: np.ndarray, values: np.ndarray):
    if len(times) <= 2:
        return times, values
    slopes = np.diff(values, axis=0) / np.diff(times)[:, None]
    bend = np.any(np.abs(slopes[1:] - slopes[:-1]) > 1e-12 * (1 + np.abs(slopes[1:])), axis=1)
    keep = np.concatenate([[True], bend, [True]])
    return times[keep], values[keep]


def landscape(b: Barcode, dim: int, K: int | None = None) -> LandscapeFamily:
    """Exact piecewise-linear landscapes ``lambda_1 >= ... >= lambda_K``.

    ``lambda_k(t)`` is the ``k``-th largest tent height at ``t``, where the
    interval ``[b, d)`` contributes the tent peaking at ``((b + d)/2, (d - b)/2)``.
    ``K`` defaults to the largest Betti number, i.e. all nonzero landscapes;
    extra functions are identically zero.
    """
    arr = b.array(dim)
    if K is None:
        K = max(max_betti(b, dim), 1)
    if K < 1:
        raise ValueError("K must be >= 1")
    times = _critical_points(arr, b.horizon)
    values = np.zeros((len(times), K))
    if len(arr):
        keep = min(K, len(arr))
        for start in range(0, len(times), _CHUNK):
            tents = _tent_values(arr, times[start:start + _CHUNK])
            top = -np.sort(-tents, axis=1)[:, :keep]
            values[start:start + _CHUNK, :keep] = top
    times, values = _drop_collinear(times, values)
    return LandscapeFamily(times, values)


def landscape_embed(b: Barcode, dim: int, K: int | None = None) -> PiecewiseLinearPath:
    """Path ``t -> (lambda_1(t), ..., lambda_K(t))`` on ``[0, horizon]``."""
    return landscape(b, dim, K).to_path()


def integrated_landscape(b: Barcode, dim: int, K: int | None = None) -> QuadraticSplinePath:
    """Exact running integrals of the landscapes, starting from zero at ``t = 0``."""
    return QuadraticSplinePath.integrate(landscape_embed(b, dim, K))


def integrated_landscape_embed(b: Barcode, dim: int, K: int | None = None, refine: int = 4) -> PiecewiseLinearPath:
    """Integrated landscape, linearized with ``refine`` pieces per landscape segment.

    Values at the sample points are exact integrals; only the shape between
    samples is approximated.
    """
    return integrated_landscape(b, dim, K).to_path(refine)


def envelope_embed(b: Barcode, dim: int) -> PiecewiseLinearPath:
    """Interpolate ``(0, 0), (b_1, d_1), ..., (b_m, d_m)`` at times ``0, 1, ..., m``.

    Intervals are ordered longest first, ties broken by birth, then death.
    """
    arr = _sort_intervals(b.array(dim))
    values = np.vstack([np.zeros((1, 2)), arr])
    return PiecewiseLinearPath.from_values(values)


def restricted_envelope_embed(b: Barcode, dim: int, N: int) -> PiecewiseLinearPath:
    """Envelope path that stops moving after the ``N`` longest intervals."""
    if N < 1:
        raise ValueError("N must be >= 1")
    path = envelope_embed(b, dim)
    values = np.array(path.values)
    if N < len(values) - 1:
        values[N + 1:] = values[N]
    return PiecewiseLinearPath(path.times, values)


def naive_embed(b: Barcode, dim: int) -> PiecewiseLinearPath:
    """One coordinate per interval, moving at unit speed while the interval is alive.

    Coordinates follow the envelope ordering. An empty barcode gives a
    one-dimensional zero path.
    """
    arr = _sort_intervals(b.array(dim))
    times = np.unique(np.concatenate([[0.0, b.horizon], arr.ravel()]))
    if len(arr) == 0:
        return PiecewiseLinearPath(times, np.zeros((len(times), 1)))
    values = np.clip(times[:, None] - arr[None, :, 0], 0.0, (arr[:, 1] - arr[:, 0])[None, :])
    return PiecewiseLinearPath(times, values)


def _betti_table(b: Barcode, times: np.ndarray, n_dims: int) -> np.ndarray:
    out = np.zeros((len(times), n_dims))
    for i in range(n_dims):
        arr = b.array(i)
        if len(arr):
            alive = (arr[None, :, 0] <= times[:, None]) & (times[:, None] < arr[None, :, 1])
            out[:, i] = alive.sum(axis=1)
    return out


def generalized_betti_embed(b: Barcode, coeffs) -> PiecewiseLinearPath:
    """Path whose coordinate ``k`` at each knot is ``sum_i coeffs[k][i] * beta_i``.

    Knots are every interval endpoint of every dimension together with ``0``
    and the horizon; the path is linear in between.

    Args:
        coeffs: table of shape ``(n, L)``; row ``k`` weights Betti numbers of
            dimensions ``0..L-1``.
    """
    a = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if a.size == 0 or not np.any(a):
        raise ValueError("coefficient table needs at least one nonzero entry")
    times = np.unique(np.concatenate([[0.0, b.horizon], b.all_intervals().ravel()]))
    betti = _betti_table(b, times, a.shape[1])
    return PiecewiseLinearPath(times, betti @ a.T)


def betti_embed(b: Barcode, n: int | None = None) -> PiecewiseLinearPath:
    """Betti curves of dimensions ``0..n-1``, one per coordinate."""
    if n is None:
        n = b.max_dim + 1
    if n < 1:
        raise ValueError("n must be >= 1")
    return generalized_betti_embed(b, np.eye(n))


def euler_embed(b: Barcode) -> PiecewiseLinearPath:
    """Euler characteristic curve ``sum_i (-1)^i beta_i``."""
    signs = (-1.0) ** np.arange(b.max_dim + 1)
    return generalized_betti_embed(b, signs[None, :])


def embed(
    b: Barcode,
    name: str,
    dim: int = 0,
    K: int | None = None,
    N: int | None = None,
    coeffs=None,
    refine: int = 4,
    n: int | None = None,
) -> PiecewiseLinearPath:
    """Apply the embedding called ``name`` (one of :data:`EMBEDDINGS`)."""
    if name == "landscape":
        return landscape_embed(b, dim, K)
    if name == "ilandscape":
        return integrated_landscape_embed(b, dim, K, refine)
    if name == "envelope":
        return envelope_embed(b, dim) if N is None else restricted_envelope_embed(b, dim, N)
    if name == "naive":
        return naive_embed(b, dim)
    if name == "betti":
        return betti_embed(b, n)
    if name == "euler":
        return euler_embed(b)
    if name == "gbetti":
        if coeffs is None:
            raise ValueError("the gbetti embedding needs a coefficient table")
        return generalized_betti_embed(b, coeffs)
    raise ValueError(f"unknown embedding {name!r}; expected one of {EMBEDDINGS}")


def load_coefficients(source) -> np.ndarray:
    """Read a coefficient table: one CSV row per output coordinate."""
    text = source.read() if hasattr(source, "read") else str(source)
    rows = [
        [float(v) for v in line.split(",")]
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    width = max((len(r) for r in rows), default=0)
    if width == 0:
        raise ValueError("empty coefficient table")
    return np.array([r + [0.0] * (width - len(r)) for r in rows])


def stack_dimensions(paths: Sequence[PiecewiseLinearPath]) -> PiecewiseLinearPath:
    """Join paths of several homological dimensions side by side on merged knots."""
    times = np.unique(np.concatenate([p.times for p in paths]))
    return PiecewiseLinearPath(times, np.hstack([p(times) for p in paths]))
