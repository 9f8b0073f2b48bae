"""Truncated signatures of piecewise-linear paths in the tensor algebra.

Level ``m`` of a :class:`TruncatedTensor` over ``R^n`` is a flat array of
``n**m`` coefficients in word-lexicographic (row-major) order. Words are
tuples of 1-based letters, so word ``(1, 2)`` indexes the coefficient of
``e_1 ⊗ e_2``.
"""
from __future__ import annotations

import csv
import io
import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from .paths import PiecewiseLinearPath

DEFAULT_BUDGET = 10**7
FEATURES_HEADER = "# persig features v1"

Word = tuple[int, ...]
Functional = Union[Word, Mapping[Word, float]]


class TensorBudgetError(MemoryError):
    """The requested truncated tensor has too many coefficients."""


def n_coefficients(n: int, depth: int) -> int:
    """Number of coefficients in levels ``1..depth`` over ``R^n``."""
    if n == 1:
        return depth
    return n * (n**depth - 1) // (n - 1)


def check_budget(n: int, depth: int, budget: int = DEFAULT_BUDGET) -> None:
    size = n_coefficients(n, depth)
    if size > budget:
        raise TensorBudgetError(
            f"signature of a {n}-dimensional path at level {depth} needs {size} coefficients "
            f"(budget {budget}); use the signature kernel instead"
        )


@dataclass(frozen=True, eq=False)
class TruncatedTensor:
    """Element of the tensor algebra over ``R^n`` truncated after level ``depth``."""

    n: int
    levels: tuple[np.ndarray, ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @classmethod
    def identity(cls, n: int, depth: int) -> "TruncatedTensor":
        levels = [np.ones(1)] + [np.zeros(n**m) for m in range(1, depth + 1)]
        return cls(n, tuple(levels))

    @classmethod
    def from_flat(cls, n: int, depth: int, flat: np.ndarray) -> "TruncatedTensor":
        flat = np.asarray(flat, dtype=float)
        levels, pos = [], 0
        for m in range(depth + 1):
            levels.append(flat[pos:pos + n**m].copy())
            pos += n**m
        if pos != len(flat):
            raise ValueError(f"expected {pos} coefficients, got {len(flat)}")
        return cls(n, tuple(levels))

    def level(self, m: int, shape: bool = False) -> np.ndarray:
        arr = self.levels[m]
        return arr.reshape((self.n,) * m) if shape else arr

    def __getitem__(self, word: Sequence[int]) -> float:
        word = tuple(word)
        m = len(word)
        if m > self.depth:
            raise KeyError(f"word {word} longer than truncation level {self.depth}")
        return float(self.levels[m][_word_index(word, self.n)])

    def flatten(self, include_level0: bool = True) -> np.ndarray:
        parts = self.levels if include_level0 else self.levels[1:]
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def truncate(self, depth: int) -> "TruncatedTensor":
        if depth > self.depth:
            raise ValueError(f"cannot raise truncation level from {self.depth} to {depth}")
        return TruncatedTensor(self.n, self.levels[: depth + 1])

    def __mul__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        return chen_product(self, other)

    def __repr__(self) -> str:
        return f"TruncatedTensor(n={self.n}, depth={self.depth})"


def _word_index(word: Word, n: int) -> int:
    idx = 0
    for letter in word:
        if not 1 <= letter <= n:
            raise ValueError(f"letter {letter} outside alphabet 1..{n}")
        idx = idx * n + (letter - 1)
    return idx


def words(n: int, m: int) -> Iterable[Word]:
    """All words of length ``m`` in storage order."""
    return itertools.product(range(1, n + 1), repeat=m)


def _check_compatible(s: TruncatedTensor, t: TruncatedTensor) -> None:
    if s.n != t.n or s.depth != t.depth:
        raise ValueError(
            f"incompatible tensors: n={s.n}, depth={s.depth} vs n={t.n}, depth={t.depth}"
        )


def segment_signature(increment, depth: int) -> TruncatedTensor:
    """Signature of a straight segment: level ``m`` is ``v^{⊗m} / m!``."""
    if depth < 0:
        raise ValueError("truncation level must be >= 0")
    v = np.asarray(increment, dtype=float).reshape(-1)
    levels = [np.ones(1)]
    for m in range(1, depth + 1):
        levels.append(np.outer(levels[-1], v).ravel() / m)
    return TruncatedTensor(len(v), tuple(levels))


def chen_product(s: TruncatedTensor, t: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor product: level ``m`` is ``sum_{a+b=m} s_a ⊗ t_b``."""
    _check_compatible(s, t)
    out = []
    for m in range(s.depth + 1):
        acc = np.zeros(s.n**m)
        for a in range(m + 1):
            acc += np.outer(s.levels[a], t.levels[m - a]).ravel()
        out.append(acc)
    return TruncatedTensor(s.n, tuple(out))


def _mul_segment(levels: list[np.ndarray], v: np.ndarray, depth: int) -> list[np.ndarray]:
    """``levels ⊗ exp(v)`` in place of a full product, Horner style.

    Uses ``(s ⊗ exp(v))_m = sum_k s_{m-k} ⊗ v^{⊗k}/k!`` evaluated as
    ``((s_0 v/m + s_1) v/(m-1) + s_2) ... v/1 + s_m``.
    """
    out = list(levels)
    for m in range(depth, 0, -1):
        acc = levels[0] * 1.0
        for k in range(1, m + 1):
            acc = np.outer(acc, v).ravel() / (m - k + 1) + levels[k]
        out[m] = acc
    return out


def signature(x: PiecewiseLinearPath, depth: int, budget: int = DEFAULT_BUDGET) -> TruncatedTensor:
    """Truncated signature of a piecewise-linear path.

    The signature is the ordered product of the segment signatures; stationary
    segments contribute the identity and are skipped.
    """
    if depth < 0:
        raise ValueError("truncation level must be >= 0")
    n = x.dim
    check_budget(n, depth, budget)
    levels = list(TruncatedTensor.identity(n, depth).levels)
    for v in x.increments:
        if not np.any(v):
            continue
        levels = _mul_segment(levels, v, depth)
    return TruncatedTensor(n, tuple(levels))


def shuffle_product(u: Sequence[int], v: Sequence[int]) -> Counter:
    """Shuffle of two words as a multiset ``{word: multiplicity}``."""
    return Counter(_shuffle(tuple(u), tuple(v)))


@lru_cache(maxsize=4096)
def _shuffle(u: Word, v: Word) -> dict:
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: Counter = Counter()
    for w, c in _shuffle(u[:-1], v).items():
        out[w + (u[-1],)] += c
    for w, c in _shuffle(u, v[:-1]).items():
        out[w + (v[-1],)] += c
    return dict(out)


def eval_functional(ell: Functional, s: TruncatedTensor) -> float:
    """Pair a linear functional (a word or a weighted sum of words) with ``s``."""
    if isinstance(ell, Mapping):
        return float(sum(c * s[w] for w, c in ell.items()))
    return s[tuple(ell)]


def tensor_inner_product(s: TruncatedTensor, t: TruncatedTensor) -> float:
    """Sum over levels of the Euclidean inner product of coefficient arrays."""
    _check_compatible(s, t)
    return float(sum(np.dot(a, b) for a, b in zip(s.levels, t.levels)))


def feature_header(n: int, depth: int, include_level0: bool = True) -> list[str]:
    cols = ["()"] if include_level0 else []
    for m in range(1, depth + 1):
        cols.extend("(" + ",".join(map(str, w)) + ")" for w in words(n, m))
    return cols


def save_features(rows: Sequence[TruncatedTensor], sink: IO[str], include_level0: bool = True) -> None:
    """Flattened coefficients, one tensor per row, with a header row of words."""
    if not rows:
        return
    n, depth = rows[0].n, rows[0].depth
    sink.write(FEATURES_HEADER + "\n")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(feature_header(n, depth, include_level0))
    for s in rows:
        writer.writerow([repr(float(v)) for v in s.flatten(include_level0)])


def features_matrix(rows: Sequence[TruncatedTensor], include_level0: bool = False) -> np.ndarray:
    return np.vstack([s.flatten(include_level0) for s in rows])


def dumps_features(rows: Sequence[TruncatedTensor], include_level0: bool = True) -> str:
    buf = io.StringIO()
    save_features(rows, buf, include_level0)
    return buf.getvalue()

