import io
import itertools
import math

import numpy as np
import pytest

from oracles import signature_coefficient
from persig.paths import PiecewiseLinearPath, concatenate, time_reverse
from persig.signature import (
    TensorBudgetError,
    TruncatedTensor,
    chen_product,
    eval_functional,
    feature_header,
    n_coefficients,
    save_features,
    segment_signature,
    shuffle_product,
    signature,
    tensor_inner_product,
    words,
)


def random_path(rng, n=None, length=None):
    n = n or int(rng.integers(1, 4))
    length = length or int(rng.integers(2, 7))
    times = np.cumsum(rng.uniform(0.1, 1.0, size=length))
    return PiecewiseLinearPath(times, rng.normal(size=(length, n)))


def test_coefficient_count():
    assert n_coefficients(3, 2) == 3 + 9
    assert n_coefficients(1, 4) == 4


def test_line_signature_is_tensor_power_over_factorial():
    v = np.array([1.0, -2.0, 0.5])
    s = signature(PiecewiseLinearPath.from_values([np.zeros(3), v]), 4)
    for m in range(5):
        expected = np.ones(1)
        for _ in range(m):
            expected = np.outer(expected, v).ravel()
        assert np.allclose(s.level(m), expected / math.factorial(m), rtol=1e-13)


def test_words_are_one_based():
    s = signature(PiecewiseLinearPath.from_values([[0, 0], [1, 2]]), 2)
    assert s[()] == 1
    assert s[(2,)] == 2
    assert s[(1, 2)] == 1
    with pytest.raises(KeyError):
        s[(1, 1, 1)]
    with pytest.raises(ValueError):
        s[(3,)]


def test_signature_matches_enumeration_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = random_path(rng)
        s = signature(x, 3)
        inc = x.increments
        for m in range(4):
            for w in words(x.dim, m):
                assert s[w] == pytest.approx(signature_coefficient(inc, w), rel=1e-10, abs=1e-12)


def test_level_two_antisymmetric_part_is_signed_area():
    # closed unit square traversed counter-clockwise encloses area 1
    x = PiecewiseLinearPath.from_values([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]])
    s = signature(x, 2)
    assert 0.5 * (s[(1, 2)] - s[(2, 1)]) == pytest.approx(1.0)


def test_chen_identity():
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = random_path(rng, n=2)
        y = random_path(rng, n=2)
        lhs = signature(concatenate(x, y), 4)
        rhs = chen_product(signature(x, 4), signature(y, 4))
        assert np.allclose(lhs.flatten(), rhs.flatten(), rtol=1e-10, atol=1e-12)


def test_path_followed_by_its_reverse_has_trivial_signature():
    rng = np.random.default_rng(3)
    x = random_path(rng, n=3)
    s = signature(concatenate(x, time_reverse(x)), 4)
    assert np.allclose(s.flatten(), TruncatedTensor.identity(3, 4).flatten(), atol=1e-10)


def test_reparametrization_and_stationary_segments_do_not_matter():
    x = PiecewiseLinearPath([0, 1, 2], [[0, 0], [1, 2], [3, 1]])
    y = PiecewiseLinearPath([0, 0.1, 0.2, 5, 9], [[0, 0], [0.5, 1], [1, 2], [1, 2], [3, 1]])
    assert np.allclose(signature(x, 4).flatten(), signature(y, 4).flatten(), atol=1e-12)


def test_shuffle_product_multiplicities():
    assert shuffle_product((1,), (2,)) == {(1, 2): 1, (2, 1): 1}
    assert shuffle_product((1,), (1,)) == {(1, 1): 2}
    assert sum(shuffle_product((1, 2), (3, 4)).values()) == math.comb(4, 2)


def test_shuffle_identity_on_signatures():
    rng = np.random.default_rng(4)
    x = random_path(rng, n=2)
    s = signature(x, 4)
    for u, v in itertools.product([w for m in range(3) for w in words(2, m)], repeat=2):
        if len(u) + len(v) <= 4:
            assert s[u] * s[v] == pytest.approx(eval_functional(shuffle_product(u, v), s), rel=1e-9, abs=1e-12)


def test_segment_signature_product_equals_path_signature():
    v1, v2 = np.array([1.0, 0.5]), np.array([-0.3, 2.0])
    x = PiecewiseLinearPath.from_values([[0, 0], v1, v1 + v2])
    s = segment_signature(v1, 3) * segment_signature(v2, 3)
    assert np.allclose(s.flatten(), signature(x, 3).flatten())


def test_budget_guard():
    with pytest.raises(TensorBudgetError):
        signature(PiecewiseLinearPath.from_values(np.zeros((2, 10))), 8, budget=10**6)


def test_inner_product_requires_matching_shapes():
    with pytest.raises(ValueError):
        tensor_inner_product(TruncatedTensor.identity(2, 2), TruncatedTensor.identity(2, 3))


def test_flat_round_trip():
    s = signature(PiecewiseLinearPath.from_values([[0, 0], [1, 2], [0, 3]]), 3)
    back = TruncatedTensor.from_flat(2, 3, s.flatten())
    assert np.array_equal(back.flatten(), s.flatten())


def test_feature_csv_has_word_header():
    assert feature_header(2, 1) == ["()", "(1)", "(2)"]
    s = signature(PiecewiseLinearPath.from_values([[0, 0], [1, 2]]), 2)
    buf = io.StringIO()
    save_features([s, s], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# persig features v1"
    assert lines[1] == '(),(1),(2),"(1,1)","(1,2)","(2,1)","(2,2)"'
    assert len(lines) == 4
