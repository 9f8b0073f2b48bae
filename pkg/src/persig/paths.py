"""Piecewise-linear paths and the path norms used throughout the package."""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

_ORDS = {"l1": 1, "l2": 2, "linf": np.inf}


def _norm(v: np.ndarray, norm: str, axis=-1) -> np.ndarray:
    try:
        ord_ = _ORDS[norm]
    except KeyError:
        raise ValueError(f"unknown norm {norm!r}; expected one of {sorted(_ORDS)}") from None
    return np.linalg.norm(v, ord=ord_, axis=axis)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPath:
    """Continuous path through ``values[j]`` at ``times[j]``, linear in between.

    The path is constant before the first and after the last knot. Stationary
    segments (equal consecutive values) are allowed.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or len(values) != len(times):
            raise ValueError(
                f"need one value row per knot, got times {times.shape} and values {values.shape}"
            )
        if len(times) == 0:
            raise ValueError("a path needs at least one knot")
        if values.shape[1] == 0:
            raise ValueError("path values must have dimension >= 1")
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, start: float = 0.0) -> "PiecewiseLinearPath":
        """Path through ``values`` at unit-spaced times ``start, start + 1, ...``."""
        values = np.asarray(values, dtype=float)
        return cls(start + np.arange(len(values), dtype=float), values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_knots(self) -> int:
        return len(self.times)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def __call__(self, t) -> np.ndarray:
        """Evaluate at scalar or array ``t``; returns shape ``(..., dim)``."""
        t = np.asarray(t, dtype=float)
        out = np.stack([np.interp(t, self.times, self.values[:, k]) for k in range(self.dim)], axis=-1)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinearPath):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self) -> str:
        return f"PiecewiseLinearPath(dim={self.dim}, knots={self.n_knots}, domain=[{self.start}, {self.end}])"

    def simplify(self, atol: float = 0.0) -> "PiecewiseLinearPath":
        """Drop interior knots where the path is affine through them."""
        if self.n_knots <= 2:
            return self
        t, v = self.times, self.values
        slopes = np.diff(v, axis=0) / np.diff(t)[:, None]
        bend = np.any(np.abs(slopes[1:] - slopes[:-1]) > atol, axis=1)
        keep = np.concatenate([[True], bend, [True]])
        return PiecewiseLinearPath(t[keep], v[keep])


def one_variation(x: PiecewiseLinearPath, norm: str = "linf") -> float:
    """``||x(0)|| + sum of segment lengths``; exact for piecewise-linear paths."""
    total = float(_norm(x.values[0], norm))
    if x.n_knots > 1:
        total += float(np.sum(_norm(x.increments, norm)))
    return total


def holder1_norm(x, norm: str = "linf") -> float:
    """1-Hölder norm: ``||x(0)||`` plus the largest difference quotient.

    For a piecewise-linear path the supremum of difference quotients is the
    steepest segment slope. Objects with their own ``holder1_norm`` method
    (e.g. :class:`QuadraticSplinePath`) are delegated to.
    """
    if not isinstance(x, PiecewiseLinearPath):
        return x.holder1_norm(norm)
    head = float(_norm(x.values[0], norm))
    if x.n_knots == 1:
        return head
    slopes = _norm(x.increments, norm) / np.diff(x.times)
    return head + float(slopes.max())


def time_augment(x: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Prepend the time coordinate: ``t -> (t, x(t))``."""
    return PiecewiseLinearPath(x.times, np.column_stack([x.times, x.values]))


def add_lags(x: PiecewiseLinearPath, lags: Sequence[float]) -> PiecewiseLinearPath:
    """Stack lagged copies: ``t -> (x(t), x(max(t - lag_1, t0)), ...)``.

    The knot set is refined with every knot shifted forward by every lag, so
    the lagged path is represented exactly.
    """
    lags = [float(d) for d in lags]
    if any(d < 0 for d in lags):
        raise ValueError("lags must be non-negative")
    if not lags:
        return x
    t0, t1 = x.start, x.end
    knots = [x.times] + [x.times + d for d in lags]
    times = np.unique(np.concatenate(knots))
    times = times[(times >= t0) & (times <= t1)]
    blocks = [x(times)] + [x(np.maximum(times - d, t0)) for d in lags]
    return PiecewiseLinearPath(times, np.hstack(blocks))


def concatenate(x: PiecewiseLinearPath, y: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Run ``x`` then ``y``, translating ``y`` to start where ``x`` ends."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    shift_t = x.end - y.start
    shift_v = x.values[-1] - y.values[0]
    times = np.concatenate([x.times, y.times[1:] + shift_t])
    values = np.vstack([x.values, y.values[1:] + shift_v])
    return PiecewiseLinearPath(times, values)


def time_reverse(x: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Traverse ``x`` backwards over the same time domain."""
    return PiecewiseLinearPath((x.start + x.end - x.times)[::-1], x.values[::-1])


def drop_stationary(x: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Remove stationary segments by dropping knots that repeat the previous value.

    The result traces the same curve (its signature is unchanged) but runs on
    fewer knots and a different time axis.
    """
    if x.n_knots <= 1:
        return x
    moving = np.concatenate([[True], np.any(np.diff(x.values, axis=0) != 0, axis=1)])
    times = x.times[moving]
    return PiecewiseLinearPath(np.arange(len(times), dtype=float) + x.start, x.values[moving])


def merged_knots(*paths) -> np.ndarray:
    return np.unique(np.concatenate([p.times for p in paths]))


def subtract(x: PiecewiseLinearPath, y: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Pointwise difference on the union of both knot sets and domains."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    t = merged_knots(x, y)
    return PiecewiseLinearPath(t, x(t) - y(t))


def holder1_distance(x, y, norm: str = "linf") -> float:
    """``holder1_norm(x - y)``, paths extended as constants outside their domains."""
    if isinstance(x, PiecewiseLinearPath) and isinstance(y, PiecewiseLinearPath):
        return holder1_norm(subtract(x, y), norm)
    return holder1_norm(x - y, norm)


# ---------------------------------------------------------------------------
# piecewise quadratic paths (integrals of piecewise-linear paths)


@dataclass(frozen=True, eq=False)
class QuadraticSplinePath:
    """C^1 path whose derivative is piecewise linear.

    Stored by knot times, knot values and knot derivatives. Between knots the
    path is the quadratic with the given end values whose derivative
    interpolates the knot derivatives linearly. This is exactly the running
    integral of a piecewise-linear function.
    """

    times: np.ndarray
    values: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(len(times), -1)
        rates = np.asarray(self.rates, dtype=float).reshape(values.shape)
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        for a in (times, values, rates):
            a.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def integrate(cls, derivative: PiecewiseLinearPath, initial=None) -> "QuadraticSplinePath":
        """Running integral of a piecewise-linear path, starting from ``initial``."""
        t, v = derivative.times, derivative.values
        start = np.zeros(derivative.dim) if initial is None else np.asarray(initial, float)
        areas = 0.5 * (v[1:] + v[:-1]) * np.diff(t)[:, None]
        values = start + np.vstack([np.zeros((1, derivative.dim)), np.cumsum(areas, axis=0)])
        return cls(t, values, v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    def derivative(self) -> PiecewiseLinearPath:
        return PiecewiseLinearPath(self.times, self.rates)

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tt, v, r = self.times, self.values, self.rates
        out = np.empty((len(t), self.dim))
        before = t <= tt[0]
        after = t >= tt[-1]
        out[before] = v[0] + np.outer(t[before] - tt[0], r[0])
        out[after] = v[-1] + np.outer(t[after] - tt[-1], r[-1])
        mid = ~(before | after)
        if np.any(mid):
            j = np.searchsorted(tt, t[mid], side="right") - 1
            h = (t[mid] - tt[j])[:, None]
            width = (tt[j + 1] - tt[j])[:, None]
            slope = (r[j + 1] - r[j]) / width
            out[mid] = v[j] + r[j] * h + 0.5 * slope * h * h
        return out

    def __sub__(self, other: "QuadraticSplinePath") -> "QuadraticSplinePath":
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        t = np.unique(np.concatenate([self.times, other.times]))
        rates = self.derivative()(t) - other.derivative()(t)
        return QuadraticSplinePath(t, self(t) - other(t), rates)

    def holder1_norm(self, norm: str = "linf") -> float:
        # derivative is piecewise linear and continuous, so the supremum of
        # difference quotients is its largest norm, attained at a knot
        return float(_norm(self.values[0], norm)) + float(np.max(_norm(self.rates, norm)))

    def to_path(self, refine: int = 4) -> PiecewiseLinearPath:
        """Linearize, sampling the exact values at ``refine`` points per segment."""
        if refine < 1:
            raise ValueError("refine must be >= 1")
        if len(self.times) == 1:
            return PiecewiseLinearPath(self.times, self.values)
        frac = np.arange(refine) / refine
        t = (self.times[:-1, None] + np.diff(self.times)[:, None] * frac).ravel()
        # rounding can merge samples on very short segments
        t = np.unique(np.append(t, self.times[-1]))
        return PiecewiseLinearPath(t, self(t))


# ---------------------------------------------------------------------------
# CSV


PATH_HEADER = "# persig path v1"


def save_path(x: PiecewiseLinearPath, sink: IO[str]) -> None:
    sink.write(PATH_HEADER + "\n")
    header = ",".join(["t"] + [f"x{k + 1}" for k in range(x.dim)])
    sink.write(header + "\n")
    for t, row in zip(x.times, x.values):
        sink.write(",".join(repr(float(v)) for v in (t, *row)) + "\n")


def load_path(source: IO[str] | str) -> PiecewiseLinearPath:
    """Read the path CSV written by :func:`save_path` (``#`` lines are skipped)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [ln for ln in source.read().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("t"):
        raise ValueError("path CSV must start with a 't,x1,...' header")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("path CSV needs a time column and at least one value column")
    return PiecewiseLinearPath(data[:, 0], data[:, 1:])
