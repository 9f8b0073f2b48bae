"""Slow, independent reference computations used as test oracles."""
from __future__ import annotations

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# bottleneck distance by exhaustive matching


def brute_bottleneck(a, b) -> float:
    """Min over all partial matchings of the max cost; unmatched bars cost half their length."""
    a = [tuple(map(float, p)) for p in a]
    b = [tuple(map(float, p)) for p in b]
    best = math.inf

    def half(p):
        return (p[1] - p[0]) / 2

    def rec(i, used, worst):
        nonlocal best
        if worst >= best:
            return
        if i == len(a):
            rest = [half(q) for j, q in enumerate(b) if j not in used]
            best = min(best, max([worst] + rest))
            return
        p = a[i]
        rec(i + 1, used, max(worst, half(p)))
        for j, q in enumerate(b):
            if j not in used:
                cost = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
                rec(i + 1, used | {j}, max(worst, cost))

    rec(0, frozenset(), 0.0)
    return best


# ---------------------------------------------------------------------------
# rank invariant of a Rips filtration by linear algebra over F2


def _rank_f2(rows: list[int]) -> int:
    """Rank of a set of F2 vectors given as int bitmasks."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _nullspace_f2(columns: list[int], n_cols: int) -> list[int]:
    """Basis of ``{c : sum c_j columns[j] = 0}``, each vector a bitmask over column indices."""
    pivots: dict[int, tuple[int, int]] = {}
    null = []
    for j in range(n_cols):
        v, combo = columns[j], 1 << j
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = (v, combo)
                break
            pv, pc = pivots[top]
            v ^= pv
            combo ^= pc
        if not v:
            null.append(combo)
    return null


def rips_simplices(d: np.ndarray, top_dim: int):
    """All simplices up to ``top_dim`` with their Rips values (no scale cut)."""
    m = len(d)
    out = []
    for k in range(top_dim + 1):
        for s in itertools.combinations(range(m), k + 1):
            value = max((d[i, j] for i, j in itertools.combinations(s, 2)), default=0.0)
            out.append((s, float(value)))
    return out


def rank_invariant(d: np.ndarray, dim: int, s: float, t: float) -> int:
    """Rank of the map ``H_dim(K(s)) -> H_dim(K(t))`` for the Rips complex of ``d``.

    Computed as ``dim Z(s) - dim(Z(s) ∩ B(t))`` with cycle and boundary
    spaces found by Gaussian elimination over F2.
    """
    simplices = rips_simplices(d, dim + 1)
    faces = [(sm, v) for sm, v in simplices if len(sm) == dim + 1 and v <= t]
    cofaces = [(sm, v) for sm, v in simplices if len(sm) == dim + 2 and v <= t]
    index = {sm: i for i, (sm, _) in enumerate(faces)}
    in_s = [j for j, (_, v) in enumerate(faces) if v <= s]

    def boundary(sm):
        mask = 0
        for k in range(len(sm)):
            mask ^= 1 << index[sm[:k] + sm[k + 1:]]
        return mask

    # cycles of K(s): kernel of the boundary restricted to dim-simplices in K(s)
    if dim == 0:
        cycles = [1 << j for j in in_s]
    else:
        lower = [sm for sm, v in simplices if len(sm) == dim and v <= t]
        lower_index = {sm: i for i, sm in enumerate(lower)}
        cols = []
        for j in in_s:
            sm = faces[j][0]
            mask = 0
            for k in range(len(sm)):
                mask ^= 1 << lower_index[sm[:k] + sm[k + 1:]]
            cols.append(mask)
        cycles = []
        for combo in _nullspace_f2(cols, len(cols)):
            vec = 0
            for pos, j in enumerate(in_s):
                if combo >> pos & 1:
                    vec |= 1 << j
            cycles.append(vec)
    bounds = [boundary(sm) for sm, _ in cofaces]
    z = _rank_f2(cycles)
    b = _rank_f2(bounds)
    z_plus_b = _rank_f2(cycles + bounds)
    return z - (z + b - z_plus_b)


# ---------------------------------------------------------------------------
# landscapes straight from the rank-count definition


def landscape_grid_all(intervals: np.ndarray, K: int, t_grid: np.ndarray, step: float) -> np.ndarray:
    """``sup{s >= 0 : #{[b,d) : b <= t - s, t + s < d} >= k}`` for ``k = 1..K``, ``s`` on a grid.

    Returns an array of shape ``(len(t_grid), K)``.
    """
    arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
    span = float(arr[:, 1].max() - arr[:, 0].min()) if len(arr) else 0.0
    s_grid = np.arange(0.0, span / 2 + 2 * step, step)
    ks = np.arange(1, K + 1)
    out = np.zeros((len(t_grid), K))
    for idx, t in enumerate(t_grid):
        lo, hi = t - s_grid, t + s_grid
        counts = ((arr[None, :, 0] <= lo[:, None]) & (hi[:, None] < arr[None, :, 1])).sum(axis=1)
        # the count can only drop as s grows, so the qualifying s form a prefix
        n_ok = (counts[:, None] >= ks[None, :]).sum(axis=0)
        out[idx] = np.where(n_ok > 0, s_grid[np.maximum(n_ok - 1, 0)], 0.0)
    return out


def landscape_grid(intervals: np.ndarray, k: int, t_grid: np.ndarray, step: float) -> np.ndarray:
    return landscape_grid_all(intervals, k, t_grid, step)[:, k - 1]


# ---------------------------------------------------------------------------
# signatures by summing over segment index sequences


def signature_coefficient(increments: np.ndarray, word) -> float:
    """Signature coefficient of a piecewise-linear path for a 1-based word.

    Sums over nondecreasing sequences of segment indices, each term being
    the product of the chosen increment components divided by the factorials
    of the run lengths.
    """
    inc = np.asarray(increments, dtype=float)
    m = len(word)
    if m == 0:
        return 1.0
    total = 0.0
    for seq in itertools.combinations_with_replacement(range(len(inc)), m):
        term = 1.0
        for pos, letter in zip(seq, word):
            term *= inc[pos, letter - 1]
        for _, run in itertools.groupby(seq):
            term /= math.factorial(len(list(run)))
        total += term
    return total
