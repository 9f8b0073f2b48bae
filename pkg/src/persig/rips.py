"""Vietoris-Rips persistence over the two-element field, at desk scale."""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .barcode import Barcode
from .paths import PiecewiseLinearPath


class ComplexError(ValueError):
    pass


def distance_matrix(points) -> np.ndarray:
    """Euclidean distance matrix of a ``(m, d)`` point cloud."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def check_distance_matrix(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ComplexError(f"distance matrix must be square, got shape {d.shape}")
    if d.shape[0] == 0:
        raise ComplexError("distance matrix is empty")
    if not np.all(np.isfinite(d)):
        raise ComplexError("distance matrix has non-finite entries")
    if np.max(np.abs(d - d.T)) > 1e-12:
        raise ComplexError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0):
        raise ComplexError("distance matrix must have a zero diagonal")
    if np.any(d < 0):
        raise ComplexError("distances must be non-negative")
    return d


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Rips complex with simplices in filtration order.

    ``simplices[j]`` is an ascending vertex tuple entering at ``values[j]``.
    Order is by (filtration value, dimension, vertices).
    """

    simplices: tuple[tuple[int, ...], ...]
    values: np.ndarray
    n_points: int
    max_dim: int
    max_scale: float

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dims(self) -> np.ndarray:
        return np.fromiter((len(s) - 1 for s in self.simplices), dtype=int, count=len(self.simplices))

    def count_by_dim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.simplices:
            out[len(s) - 1] = out.get(len(s) - 1, 0) + 1
        return out


def build_rips(d, max_dim: int = 1, max_scale: float = np.inf) -> FilteredComplex:
    """Rips filtration up to dimension ``max_dim + 1``, truncated at ``max_scale``.

    Simplices of dimension ``max_dim + 1`` are included so that every
    ``max_dim``-cycle that dies before ``max_scale`` is killed.
    """
    d = check_distance_matrix(d)
    if max_dim < 0:
        raise ComplexError("max_dim must be >= 0")
    if not max_scale > 0:
        raise ComplexError("max_scale must be > 0")
    m = len(d)
    top = max_dim + 1
    adj = d <= max_scale
    # neighbours with a larger index, as int bitmasks
    upper = []
    for i in range(m):
        mask = 0
        for j in np.flatnonzero(adj[i, i + 1:]) + i + 1:
            mask |= 1 << int(j)
        upper.append(mask)

    dl = d.tolist()
    entries: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (i,)) for i in range(m)]
    # depth-first clique expansion; candidates stay adjacent to every vertex so far
    stack = [((i,), upper[i], 0.0) for i in range(m)]
    while stack:
        simplex, cand, value = stack.pop()
        k = len(simplex)
        if k > top:
            continue
        while cand:
            low = cand & -cand
            j = low.bit_length() - 1
            cand ^= low
            row = dl[j]
            v = max(value, max(row[i] for i in simplex))
            face = simplex + (j,)
            entries.append((v, k, face))
            if k < top:
                stack.append((face, cand & upper[j], v))
    entries.sort()
    simplices = tuple(e[2] for e in entries)
    values = np.array([e[0] for e in entries])
    values.setflags(write=False)
    return FilteredComplex(simplices, values, m, max_dim, float(max_scale))


def _boundary_columns(k: FilteredComplex):
    """Per-dimension list of (filtration value, row-index list) columns.

    Row indices refer to the position of a face among simplices of one lower
    dimension, in filtration order.
    """
    index: dict[tuple[int, ...], int] = {}
    per_dim: dict[int, list[int]] = {}
    for j, s in enumerate(k.simplices):
        dim = len(s) - 1
        pos = per_dim.setdefault(dim, [])
        index[s] = len(pos)
        pos.append(j)
    columns: dict[int, list[list[int]]] = {}
    for dim, positions in per_dim.items():
        if dim == 0:
            continue
        cols = []
        for j in positions:
            s = k.simplices[j]
            cols.append([index[s[:r] + s[r + 1:]] for r in range(len(s))])
        columns[dim] = cols
    return per_dim, columns


def reduce_pairs(k: FilteredComplex) -> dict[int, list[tuple[int, int | None]]]:
    """Persistence pairs by standard column reduction, one dimension at a time.

    Returns ``{dim: [(creator, destroyer or None), ...]}`` with global simplex
    indices. Columns are Python ints used as F2 bit vectors.
    """
    per_dim, columns = _boundary_columns(k)
    top = max(per_dim)
    paired_creators: dict[int, dict[int, int]] = {}
    for dim in range(1, top + 1):
        pivots: dict[int, int] = {}  # lowest row -> reduced column
        owner: dict[int, int] = {}  # lowest row -> local column index
        for c, rows in enumerate(columns.get(dim, [])):
            col = 0
            for r in rows:
                col ^= 1 << r
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    owner[low] = c
                    break
                col ^= other
        paired_creators[dim - 1] = owner

    pairs: dict[int, list[tuple[int, int | None]]] = {}
    for dim in range(0, top + 1):
        created = paired_creators.get(dim, {})
        destroyers = set(paired_creators.get(dim - 1, {}).values()) if dim > 0 else set()
        out = []
        pos = per_dim.get(dim, [])
        for local, j in enumerate(pos):
            if local in destroyers:
                continue
            partner = created.get(local)
            out.append((j, None if partner is None else per_dim[dim + 1][partner]))
        pairs[dim] = out
    return pairs


def persistence(k: FilteredComplex, dims: Sequence[int] | None = None) -> Barcode:
    """Barcode of the filtration in dimensions ``0..max_dim``.

    Zero-length pairs are dropped; essential classes are clamped to the
    complex's ``max_scale`` (or to the largest filtration value when the scale
    is unbounded).
    """
    pairs = reduce_pairs(k)
    horizon = k.max_scale if np.isfinite(k.max_scale) else float(k.values.max()) if len(k) else 0.0
    wanted = range(k.max_dim + 1) if dims is None else dims
    intervals: dict[int, list[tuple[float, float]]] = {}
    for dim in wanted:
        out = []
        for creator, destroyer in pairs.get(dim, []):
            b = float(k.values[creator])
            dv = horizon if destroyer is None else float(k.values[destroyer])
            if b < dv:
                out.append((b, dv))
        intervals[dim] = out
    return Barcode.from_intervals(intervals, horizon=horizon)


def rips_barcode(points=None, *, distances=None, max_dim: int = 1, max_scale: float = np.inf) -> Barcode:
    """Point cloud (or distance matrix) to barcode in one call."""
    if distances is None:
        if points is None:
            raise ValueError("need points or distances")
        distances = distance_matrix(points)
    if max_dim <= 1:
        return rips_persistence_low(distances, max_dim=max_dim, max_scale=max_scale)
    return persistence(build_rips(distances, max_dim=max_dim, max_scale=max_scale))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root


def _sorted_edges(d: np.ndarray, max_scale: float):
    """Edges up to ``max_scale`` in filtration order (value, then vertices)."""
    m = len(d)
    iu, ju = np.triu_indices(m, 1)
    w = d[iu, ju]
    keep = w <= max_scale
    iu, ju, w = iu[keep], ju[keep], w[keep]
    order = np.lexsort((ju, iu, w))
    return iu[order], ju[order], w[order]


def h0_union_find(d, max_scale: float = np.inf) -> list[tuple[float, float]]:
    """Zero-dimensional intervals by single linkage (Kruskal with union-find).

    The surviving components are reported with death ``inf``.
    """
    d = check_distance_matrix(d)
    iu, ju, w = _sorted_edges(d, max_scale)
    merging, values = _h0_merges(len(d), iu, ju, w)
    return [(0.0, v) for v in values] + [(0.0, np.inf)] * (len(d) - len(merging))


def _h0_merges(m: int, iu, ju, w):
    """Indices (into the sorted edge list) and values of component-merging edges."""
    uf = _UnionFind(m)
    merging, values = [], []
    for e, (i, j) in enumerate(zip(iu.tolist(), ju.tolist())):
        ri, rj = uf.find(i), uf.find(j)
        if ri == rj:
            continue
        uf.parent[max(ri, rj)] = min(ri, rj)
        merging.append(e)
        values.append(float(w[e]))
        if len(merging) == m - 1:
            break
    return merging, values


def _h1_cohomology(d: np.ndarray, iu, ju, w, negative: set[int], max_scale: float):
    """One-dimensional persistence pairs by reducing edge coboundaries.

    Edges are processed from last to first. Edges already paired in degree
    zero are skipped (clearing). A column whose earliest cofacet has this edge
    as its latest facet is an apparent pair: no later edge has that cofacet,
    so the column is stored without reduction.
    Triangles are keyed by ``(filtration rank, vertex code)`` packed in int64,
    so coboundaries are computed on demand instead of enumerating triangles.

    Returns a list of ``(birth, death or None)``.
    """
    m = len(d)
    n_edges = len(w)
    if n_edges == 0:
        return []
    # filtration rank of every pair; pairs above the scale get a sentinel
    rank = np.full((m, m), -1, dtype=np.int64)
    _, edge_rank = np.unique(w, return_inverse=True)
    rank[iu, ju] = edge_rank
    rank[ju, iu] = edge_rank
    # position of each edge in filtration order, for the apparent-pair test
    position = np.full((m, m), -1, dtype=np.int64)
    position[iu, ju] = np.arange(n_edges)
    position[ju, iu] = np.arange(n_edges)
    m3 = np.int64(m) ** 3
    others = np.arange(m)

    def coboundary(i: int, j: int) -> np.ndarray:
        ri, rj = rank[i], rank[j]
        ok = (ri >= 0) & (rj >= 0)
        ok[i] = ok[j] = False
        k = others[ok]
        top = np.maximum(np.maximum(ri[k], rj[k]), rank[i, j])
        lo = np.minimum(i, k)
        hi = np.maximum(j, k)
        mid = i + j + k - lo - hi
        keys = top * m3 + (lo * m + mid) * m + hi
        keys.sort()
        return keys

    def latest_facet(key: int) -> int:
        code = int(key % m3)
        a, rem = divmod(code, m * m)
        b, c = divmod(rem, m)
        return max(position[a, b], position[a, c], position[b, c])

    pivots: dict[int, np.ndarray] = {}
    pairs = []
    tri_values = np.unique(w)
    for e in range(n_edges - 1, -1, -1):
        if e in negative:
            continue
        i, j = int(iu[e]), int(ju[e])
        col = coboundary(i, j)
        apparent = len(col) > 0 and latest_facet(col[0]) == e
        while len(col) and not apparent:
            other = pivots.get(int(col[0]))
            if other is None:
                break
            col = np.setxor1d(col, other, assume_unique=True)
        if len(col):
            pivots[int(col[0])] = col
            pairs.append((float(w[e]), float(tri_values[col[0] // m3])))
        else:
            pairs.append((float(w[e]), None))
    return pairs


def rips_persistence_low(d, max_dim: int = 1, max_scale: float = np.inf) -> Barcode:
    """Barcode in dimensions 0 and 1 without building the complex.

    Gives the same intervals as ``persistence(build_rips(d, max_dim, max_scale))``
    for ``max_dim <= 1``.
    """
    d = check_distance_matrix(d)
    if max_dim not in (0, 1):
        raise ComplexError("the low-dimensional route supports max_dim 0 or 1")
    m = len(d)
    iu, ju, w = _sorted_edges(d, max_scale)
    horizon = float(max_scale) if np.isfinite(max_scale) else float(w.max()) if len(w) else 0.0
    merging, values = _h0_merges(m, iu, ju, w)
    h0 = [(0.0, v) for v in values if v > 0] + [(0.0, horizon)] * (m - len(merging))
    intervals = {0: [p for p in h0 if p[0] < p[1]]}
    if max_dim == 1:
        h1 = []
        for b, dv in _h1_cohomology(d, iu, ju, w, set(merging), max_scale):
            dv = horizon if dv is None else dv
            if b < dv:
                h1.append((b, dv))
        intervals[1] = h1
    return Barcode.from_intervals(intervals, horizon=horizon)


# ---------------------------------------------------------------------------
# simplex-count curves


def _count_table(k: FilteredComplex) -> tuple[np.ndarray, np.ndarray]:
    """Knots (distinct filtration values) and cumulative simplex counts per dim."""
    knots, inverse = np.unique(k.values, return_inverse=True)
    dims = k.dims
    top = int(dims.max()) if len(dims) else 0
    counts = np.zeros((len(knots), top + 1))
    np.add.at(counts, (inverse, dims), 1.0)
    return knots, np.cumsum(counts, axis=0)


def simplex_embedding(k: FilteredComplex, coeffs) -> PiecewiseLinearPath:
    """Path whose ``r``-th coordinate at each knot is ``sum_i coeffs[r][i] * #i-simplices``."""
    a = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if a.size == 0:
        raise ValueError("empty coefficient table")
    knots, counts = _count_table(k)
    width = max(a.shape[1], counts.shape[1])
    a = np.pad(a, ((0, 0), (0, width - a.shape[1])))
    counts = np.pad(counts, ((0, 0), (0, width - counts.shape[1])))
    return PiecewiseLinearPath(knots, counts @ a.T)


def euler_curve_counts(k: FilteredComplex) -> PiecewiseLinearPath:
    """Euler characteristic by alternating simplex counts at every filtration value."""
    _, counts = _count_table(k)
    signs = (-1.0) ** np.arange(counts.shape[1])
    return simplex_embedding(k, signs[None, :])


# ---------------------------------------------------------------------------
# point cloud CSV


def load_points(source: IO[str] | str) -> np.ndarray:
    """Read a CSV with one point per row (no header; ``#`` comments allowed)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    for line in source.read().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError("no points in input")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError("rows have differing numbers of columns")
    return np.array(rows, dtype=float)


POINTS_HEADER = "# persig points v1"


def save_points(points: np.ndarray, sink: IO[str]) -> None:
    sink.write(POINTS_HEADER + "\n")
    for row in np.atleast_2d(points):
        sink.write(",".join(repr(float(v)) for v in row) + "\n")
