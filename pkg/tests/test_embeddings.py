import numpy as np
import pytest

from oracles import landscape_grid
from persig.barcode import Barcode, betti_count, bottleneck_distance, max_betti
from persig.embeddings import (
    betti_embed,
    embed,
    envelope_embed,
    euler_embed,
    generalized_betti_embed,
    integrated_landscape,
    integrated_landscape_embed,
    landscape,
    landscape_embed,
    load_coefficients,
    naive_embed,
    restricted_envelope_embed,
)
from persig.paths import holder1_distance, holder1_norm
from persig.rips import build_rips, euler_curve_counts, persistence
from persig.signature import signature


def bars(*pairs, horizon=None, dim=0):
    return Barcode.from_intervals({dim: pairs}, horizon=horizon)


def random_barcode(rng, max_intervals=12, horizon=10.0):
    n = int(rng.integers(0, max_intervals + 1))
    b = np.round(rng.uniform(0, horizon - 1, size=n), 2)
    d = np.minimum(b + np.round(rng.uniform(0.05, horizon / 2, size=n), 2), horizon)
    return Barcode.from_intervals({0: list(zip(b, d))}, horizon=horizon)


def tents_kth(arr, t, k):
    """k-th largest tent height at each t (0 when fewer than k intervals)."""
    if len(arr) < k:
        return np.zeros(len(t))
    h = np.maximum(0, np.minimum(t[:, None] - arr[None, :, 0], arr[None, :, 1] - t[:, None]))
    return -np.sort(-h, axis=1)[:, k - 1]


# ---------------------------------------------------------------------------
# landscapes


def test_single_interval_landscape_is_a_tent():
    lam = landscape(bars((0, 2)), 0, K=2)
    assert lam.times.tolist() == [0, 1, 2]
    assert lam.values[:, 0].tolist() == [0, 1, 0]
    assert np.all(lam.values[:, 1] == 0)


def test_empty_barcode_landscape_is_zero():
    lam = landscape(Barcode.from_intervals({}, horizon=3), 0, K=3)
    assert np.all(lam.values == 0)


def test_default_K_is_max_betti():
    b = bars((0, 4), (1, 3), (2, 6))
    assert landscape(b, 0).K == max_betti(b, 0) == 3


def test_three_interval_landscape_matches_grid_oracle():
    b = bars((0, 4), (1, 3), (2, 6))
    lam = landscape(b, 0, K=2)
    t = np.arange(0, 6.0005, 1e-3)
    for k in (1, 2):
        oracle = landscape_grid(b.array(0), k, t, 1e-3)
        assert np.max(np.abs(lam(t)[:, k - 1] - oracle)) <= 2e-3


def test_landscapes_are_ordered_and_nonnegative():
    rng = np.random.default_rng(0)
    for _ in range(30):
        lam = landscape(random_barcode(rng), 0, K=4)
        assert np.all(lam.values >= 0)
        assert np.all(np.diff(lam.values, axis=1) <= 1e-12)


def test_landscape_path_is_exact_between_knots():
    rng = np.random.default_rng(1)
    for _ in range(20):
        b = random_barcode(rng)
        x = landscape_embed(b, 0, K=3)
        t = np.linspace(0, b.horizon, 1001)
        for k in range(1, 4):
            assert np.allclose(x(t)[:, k - 1], tents_kth(b.array(0), t, k), atol=1e-12)


# ---------------------------------------------------------------------------
# integrated landscapes


def test_integrated_tent_has_unit_area():
    q = integrated_landscape(bars((0, 2)), 0)
    assert q(2.0)[0, 0] == pytest.approx(1.0)
    x = integrated_landscape_embed(bars((0, 2)), 0)
    assert x.values[-1, 0] == pytest.approx(1.0)


def test_integrated_landscape_is_nondecreasing_from_zero():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = integrated_landscape_embed(random_barcode(rng), 0, K=3, refine=3)
        assert np.all(x.values[0] == 0)
        assert np.all(np.diff(x.values, axis=0) >= -1e-12)


def test_linearized_integral_matches_exact_values_at_samples():
    b = bars((0, 4), (1, 3), (2, 6))
    exact = integrated_landscape(b, 0)
    x = integrated_landscape_embed(b, 0, refine=5)
    assert np.allclose(x.values, exact(x.times), atol=1e-12)


def _sup_landscape_difference(b1, b2, K):
    a1, a2 = b1.array(0), b2.array(0)
    both = np.vstack([a1, a2])
    pts = np.concatenate(
        [[0.0, b1.horizon, b2.horizon], both.ravel(), ((both[:, None, 0] + both[None, :, 1]) / 2).ravel()]
    )
    pts = np.unique(pts[pts >= 0])
    return max(np.max(np.abs(tents_kth(a1, pts, k) - tents_kth(a2, pts, k))) for k in range(1, K + 1))


def test_integrated_landscape_difference_norm_is_sup_of_landscape_difference():
    rng = np.random.default_rng(3)
    for _ in range(30):
        b1, b2 = random_barcode(rng), random_barcode(rng)
        K = max(max_betti(b1, 0), max_betti(b2, 0), 1)
        lhs = holder1_norm(integrated_landscape(b1, 0, K) - integrated_landscape(b2, 0, K))
        assert lhs == pytest.approx(_sup_landscape_difference(b1, b2, K), abs=1e-9)


def test_integrated_landscape_is_bottleneck_lipschitz():
    rng = np.random.default_rng(4)
    for _ in range(30):
        b1, b2 = random_barcode(rng, 6), random_barcode(rng, 6)
        K = max(max_betti(b1, 0), max_betti(b2, 0), 1)
        lhs = holder1_norm(integrated_landscape(b1, 0, K) - integrated_landscape(b2, 0, K))
        assert lhs <= bottleneck_distance(b1, b2, 0) + 1e-9


# ---------------------------------------------------------------------------
# envelopes and the naive embedding


def test_envelope_knots():
    x = envelope_embed(bars((1, 2), (0, 3)), 0)
    assert x.times.tolist() == [0, 1, 2]
    assert x.values.tolist() == [[0, 0], [0, 3], [1, 2]]


def test_envelope_of_empty_barcode_is_constant_origin():
    x = envelope_embed(Barcode.from_intervals({}), 0)
    assert x.values.tolist() == [[0, 0]]


def test_envelope_keeps_duplicates_as_stationary_segment():
    x = envelope_embed(bars((0, 1), (0, 1)), 0)
    assert x.values.tolist() == [[0, 0], [0, 1], [0, 1]]


def test_envelope_tie_break_by_birth_then_death():
    x = envelope_embed(bars((2, 4), (1, 3), (0, 2)), 0)
    assert x.values[1:].tolist() == [[0, 2], [1, 3], [2, 4]]


def test_envelope_upper_coordinate_dominates_lower():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = envelope_embed(random_barcode(rng), 0)
        t = np.linspace(0, x.end, 200)
        v = x(t)
        assert np.all(v[:, 1] >= v[:, 0])


def test_restricted_envelope():
    b = bars((0, 3), (1, 2))
    assert restricted_envelope_embed(b, 0, 5) == envelope_embed(b, 0)
    x = restricted_envelope_embed(b, 0, 1)
    assert x.times.tolist() == [0, 1, 2]
    assert x.values.tolist() == [[0, 0], [0, 3], [0, 3]]
    with pytest.raises(ValueError):
        restricted_envelope_embed(b, 0, 0)


def test_restricted_envelope_signature_depends_on_longest_intervals_only():
    a = bars((0, 5), (1, 4), (2, 2.5))
    b = bars((0, 5), (1, 4), (3, 3.1), (0.2, 0.4))
    sa = signature(restricted_envelope_embed(a, 0, 2), 4)
    sb = signature(restricted_envelope_embed(b, 0, 2), 4)
    assert np.allclose(sa.flatten(), sb.flatten())


def test_naive_embedding():
    x = naive_embed(bars((0, 2), horizon=3), 0)
    assert x.times.tolist() == [0, 2, 3]
    assert x.values[:, 0].tolist() == [0, 2, 2]
    e = naive_embed(Barcode.from_intervals({}, horizon=1), 0)
    assert e.dim == 1 and np.all(e.values == 0)


def test_naive_final_values_are_lengths():
    b = bars((1, 4), (0, 1), (2, 2.5), horizon=5)
    x = naive_embed(b, 0)
    assert x.values[-1].tolist() == [3, 1, 0.5]


# ---------------------------------------------------------------------------
# Betti and Euler curves


def test_betti_curve_values():
    x = betti_embed(bars((0, 2), (0, 1)), 1)
    assert x.times.tolist() == [0, 1, 2]
    assert x.values[:, 0].tolist() == [2, 1, 0]


def test_betti_curve_reproduces_betti_counts_at_knots():
    rng = np.random.default_rng(6)
    for _ in range(20):
        b = Barcode.from_intervals(
            {0: random_barcode(rng).intervals(0), 1: random_barcode(rng).intervals(0)}, horizon=10
        )
        x = betti_embed(b, 2)
        for t, row in zip(x.times, x.values):
            assert row.tolist() == [betti_count(b, 0, t), betti_count(b, 1, t)]


def test_euler_embed_is_alternating_betti_sum():
    b = Barcode.from_intervals({0: [(0, 3), (0, 1)], 1: [(1, 2)]}, horizon=3)
    assert euler_embed(b) == generalized_betti_embed(b, [[1, -1]])
    assert euler_embed(b).values[:, 0].tolist() == [2, 0, 1, 0]


def test_empty_barcode_curves_are_zero():
    b = Barcode.from_intervals({}, horizon=2)
    assert np.all(euler_embed(b).values == 0)
    assert np.all(betti_embed(b, 1).values == 0)


def test_euler_curve_of_three_equilateral_points():
    d = np.ones((3, 3))
    np.fill_diagonal(d, 0)
    k = build_rips(d, max_dim=1, max_scale=2)
    from_homology = euler_embed(persistence(k))
    from_counts = euler_curve_counts(k)
    assert np.array_equal(from_homology(from_counts.times), from_counts.values)


def test_generalized_betti_needs_a_nonzero_table():
    with pytest.raises(ValueError):
        generalized_betti_embed(bars((0, 1)), [[0, 0]])


def test_envelope_is_not_bottleneck_stable():
    base = bars((0, 1), horizon=10)
    eps = 1e-3
    bumped = bars((0, 1), (5 - eps, 5), horizon=10)
    ratio = holder1_distance(envelope_embed(base, 0), envelope_embed(bumped, 0)) / bottleneck_distance(
        base, bumped, 0
    )
    assert ratio > 10


# ---------------------------------------------------------------------------
# dispatch


def test_embed_dispatch():
    b = bars((0, 2), (0.5, 1))
    assert embed(b, "envelope") == envelope_embed(b, 0)
    assert embed(b, "envelope", N=1) == restricted_envelope_embed(b, 0, 1)
    assert embed(b, "euler") == euler_embed(b)
    assert embed(b, "gbetti", coeffs=[[2.0]]).values[0, 0] == 2
    with pytest.raises(ValueError):
        embed(b, "gbetti")
    with pytest.raises(ValueError):
        embed(b, "images")


def test_load_coefficients_pads_rows():
    a = load_coefficients("# table\n1,-1,1\n0,1\n")
    assert a.tolist() == [[1, -1, 1], [0, 1, 0]]
