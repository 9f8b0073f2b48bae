"""Barcodes: multisets of half-open intervals per homological dimension.

Intervals are half-open ``[birth, death)``. Essential intervals (infinite
death) are clamped to ``[birth, horizon)`` when a barcode is built, so every
barcode handled downstream is tame: finitely many finite intervals inside
``[0, horizon]``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, NamedTuple

import numpy as np

FORMAT_HEADER = "# persig barcode v1"


class BarcodeError(ValueError):
    """Raised for malformed or non-tame barcode data."""


class Interval(NamedTuple):
    birth: float
    death: float

    @property
    def length(self) -> float:
        return self.death - self.birth

    def contains(self, t: float) -> bool:
        return self.birth <= t < self.death


@dataclass(frozen=True)
class Barcode:
    """Tame barcode.

    Use :meth:`from_intervals` rather than the constructor; it validates,
    clamps essential classes and infers the horizon.

    Attributes:
        bars: mapping ``dim -> tuple of Interval`` (dimensions with no
            intervals may be absent).
        horizon: the scale ``T_B`` bounding every interval.
    """

    bars: Mapping[int, tuple[Interval, ...]]
    horizon: float
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def from_intervals(
        cls,
        intervals: Mapping[int, Iterable[tuple[float, float]]] | Iterable[tuple[float, float]],
        horizon: float | None = None,
        essential: str = "clamp",
    ) -> "Barcode":
        """Build a tame barcode.

        Args:
            intervals: ``{dim: [(birth, death), ...]}``, or a flat iterable of
                pairs which is taken as dimension 0. ``death`` may be ``inf``.
            horizon: the scale ``T_B``. Defaults to the largest finite
                endpoint.
            essential: ``"clamp"`` replaces infinite deaths by the horizon,
                ``"drop"`` discards essential intervals.
        """
        if essential not in ("clamp", "drop"):
            raise ValueError(f"unknown essential policy {essential!r}")
        if not isinstance(intervals, Mapping):
            intervals = {0: intervals}
        raw: dict[int, list[tuple[float, float]]] = {}
        for dim, items in intervals.items():
            dim = int(dim)
            if dim < 0:
                raise BarcodeError(f"negative homological dimension {dim}")
            pairs = [(float(b), float(d)) for b, d in items]
            for b, d in pairs:
                if not math.isfinite(b) or b < 0:
                    raise BarcodeError(f"birth must be finite and >= 0, got {b}")
                if math.isnan(d) or d == -math.inf:
                    raise BarcodeError(f"invalid death {d}")
                if math.isfinite(d) and not b < d:
                    raise BarcodeError(f"birth must be < death, got [{b}, {d})")
            raw[dim] = pairs

        endpoints = [e for pairs in raw.values() for p in pairs for e in p if math.isfinite(e)]
        if horizon is None:
            horizon = max(endpoints, default=0.0)
        horizon = float(horizon)
        if not math.isfinite(horizon) or horizon < 0:
            raise BarcodeError(f"horizon must be finite and >= 0, got {horizon}")

        bars: dict[int, tuple[Interval, ...]] = {}
        for dim, pairs in sorted(raw.items()):
            kept = []
            for b, d in pairs:
                if math.isinf(d):
                    if essential == "drop":
                        continue
                    if not b < horizon:
                        raise BarcodeError(
                            f"essential interval born at {b} does not fit below horizon {horizon}; "
                            "pass a larger horizon"
                        )
                    d = horizon
                elif d > horizon:
                    raise BarcodeError(f"interval [{b}, {d}) exceeds horizon {horizon}")
                kept.append(Interval(b, d))
            if kept:
                bars[dim] = tuple(kept)
        return cls(bars=bars, horizon=horizon)

    @property
    def dims(self) -> list[int]:
        return sorted(self.bars)

    @property
    def max_dim(self) -> int:
        return max(self.bars, default=0)

    def intervals(self, dim: int) -> tuple[Interval, ...]:
        return self.bars.get(dim, ())

    def array(self, dim: int) -> np.ndarray:
        """Intervals of one dimension as a read-only ``(m, 2)`` float array."""
        arr = self._arrays.get(dim)
        if arr is None:
            arr = np.array(self.intervals(dim), dtype=float).reshape(-1, 2)
            arr.setflags(write=False)
            self._arrays[dim] = arr
        return arr

    def all_intervals(self) -> np.ndarray:
        """Every interval of every dimension, stacked into one ``(m, 2)`` array."""
        if not self.bars:
            return np.empty((0, 2))
        return np.vstack([self.array(d) for d in self.dims])

    def restrict(self, dims: Iterable[int]) -> "Barcode":
        keep = set(dims)
        return Barcode({d: v for d, v in self.bars.items() if d in keep}, self.horizon)

    def with_horizon(self, horizon: float) -> "Barcode":
        return Barcode.from_intervals(
            {d: [tuple(iv) for iv in v] for d, v in self.bars.items()}, horizon=horizon
        )

    def __len__(self) -> int:
        return sum(len(v) for v in self.bars.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Barcode):
            return NotImplemented
        if self.horizon != other.horizon:
            return False
        return all(
            sorted(self.intervals(d)) == sorted(other.intervals(d))
            for d in set(self.bars) | set(other.bars)
        )

    def __hash__(self):
        return hash((self.horizon, tuple((d, tuple(sorted(v))) for d, v in sorted(self.bars.items()))))


# ---------------------------------------------------------------------------
# text format


def _fmt(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def load_barcode(
    source: IO[str] | IO[bytes] | str, horizon: float | None = None, essential: str = "clamp"
) -> Barcode:
    """Parse the text barcode format.

    One interval per line, ``<dim> <birth> <death|inf>``; ``#`` starts a
    comment line. A header comment ``# ... horizon=<T>`` written by
    :func:`save_barcode` supplies the horizon unless ``horizon`` is given.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    file_horizon = None
    intervals: dict[int, list[tuple[float, float]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("horizon="):
                    file_horizon = float(token.split("=", 1)[1])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise BarcodeError(f"line {lineno}: expected '<dim> <birth> <death>', got {line!r}")
        try:
            dim = int(parts[0])
            birth = float(parts[1])
            death = math.inf if parts[2].lower() in ("inf", "+inf") else float(parts[2])
        except ValueError as exc:
            raise BarcodeError(f"line {lineno}: {exc}") from None
        intervals.setdefault(dim, []).append((birth, death))
    if horizon is None:
        horizon = file_horizon
    try:
        return Barcode.from_intervals(intervals, horizon=horizon, essential=essential)
    except BarcodeError as exc:
        raise BarcodeError(f"{getattr(source, 'name', '<barcode>')}: {exc}") from None


def save_barcode(b: Barcode, sink: IO[str]) -> None:
    """Write ``b`` in the text format, header line first."""
    sink.write(f"{FORMAT_HEADER} horizon={_fmt(b.horizon)}\n")
    for dim in b.dims:
        for iv in b.intervals(dim):
            sink.write(f"{dim} {_fmt(iv.birth)} {_fmt(iv.death)}\n")


def dumps_barcode(b: Barcode) -> str:
    buf = io.StringIO()
    save_barcode(b, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# counting


def betti_count(b: Barcode, dim: int, t: float) -> int:
    """Number of intervals of dimension ``dim`` containing ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    arr = b.array(dim)
    return int(np.count_nonzero((arr[:, 0] <= t) & (t < arr[:, 1])))


def rank_count(b: Barcode, dim: int, s: float, t: float) -> int:
    """Number of intervals of dimension ``dim`` containing ``[s, t]``."""
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    arr = b.array(dim)
    return int(np.count_nonzero((arr[:, 0] <= s) & (t < arr[:, 1])))


def max_betti(b: Barcode, dim: int) -> int:
    """Largest number of simultaneously alive intervals."""
    arr = b.array(dim)
    if len(arr) == 0:
        return 0
    # deaths sort before births at equal times: intervals are half-open
    events = sorted([(d, -1) for d in arr[:, 1]] + [(s, 1) for s in arr[:, 0]])
    alive = best = 0
    for _, step in events:
        alive += step
        best = max(best, alive)
    return best


# ---------------------------------------------------------------------------
# bottleneck distance


def _max_matching(adj: list[list[int]], n_right: int) -> int:
    """Size of a maximum bipartite matching (augmenting paths, Kuhn)."""
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        stack = [(u, iter(adj[u]))]
        path: list[tuple[int, int]] = []
        while stack:
            node, it = stack[-1]
            advanced = False
            for v in it:
                if seen[v]:
                    continue
                seen[v] = True
                path.append((node, v))
                owner = match_right[v]
                if owner == -1:
                    # flip the alternating path
                    for a, w in path:
                        match_right[w] = a
                    return True
                stack.append((owner, iter(adj[owner])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if path:
                    path.pop()
        return False

    size = 0
    for u in range(len(adj)):
        if augment(u, [False] * n_right):
            size += 1
    return size


def _pair_costs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.empty((len(a), len(b)))
    return np.maximum(
        np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
    )


def _feasible(cost: np.ndarray, half_a: np.ndarray, half_b: np.ndarray, eps: float) -> bool:
    # left: intervals of A, then diagonal slots for B; right: intervals of B,
    # then diagonal slots for A. Diagonal-to-diagonal pairs are free.
    na, nb = len(half_a), len(half_b)
    adj: list[list[int]] = []
    for i in range(na):
        row = [int(j) for j in np.flatnonzero(cost[i] <= eps)] if nb else []
        if half_a[i] <= eps:
            row.append(nb + i)
        adj.append(row)
    for j in range(nb):
        row = [j] if half_b[j] <= eps else []
        row.extend(nb + i for i in range(na))
        adj.append(row)
    return _max_matching(adj, nb + na) == na + nb


def bottleneck_distance(b1: Barcode, b2: Barcode, dim: int) -> float:
    """Exact bottleneck distance between the ``dim``-intervals of two barcodes.

    Matched pairs cost the l-infinity distance of endpoints; an unmatched
    interval costs half its length. The optimum is found by binary search over
    the finite set of candidate costs with a perfect-matching test at each step.
    """
    a, b = b1.array(dim), b2.array(dim)
    half_a = (a[:, 1] - a[:, 0]) / 2
    half_b = (b[:, 1] - b[:, 0]) / 2
    cost = _pair_costs(a, b)
    candidates = np.unique(np.concatenate([cost.ravel(), half_a, half_b, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, half_a, half_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])
