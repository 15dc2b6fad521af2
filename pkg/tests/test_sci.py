import numpy as np
import pytest

from tailmean import (
    InfeasibleCutoffError,
    InvalidParameterError,
    NoSolutionError,
    TruncationSpec,
    build_sci,
    huber_estimate,
    score_function,
    solve_level,
)
from tailmean import test_mean as sup_norm_test


def brute_score(column, kappa, y):
    """Direct clamp-and-sum evaluation, kept independent of the package path."""
    return float(np.sum(np.minimum(np.maximum(np.asarray(column) - y, -kappa), kappa)))


def bisect_boundary(predicate, lo, hi, iters=200):
    """Boundary of a monotone False-to-True predicate on [lo, hi]."""
    assert not predicate(lo) and predicate(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def oracle_solve(column, kappa, level, side):
    """Bisection oracle for the boundary of {f <= level} / {f >= level}."""
    column = np.asarray(column, dtype=float)
    lo = column.min() - kappa - 1.0
    hi = column.max() + kappa + 1.0
    if side == "smallest":
        return bisect_boundary(lambda y: brute_score(column, kappa, y) <= level, lo, hi)
    return bisect_boundary(lambda y: brute_score(column, kappa, y) < level, lo, hi)


def test_score_function_hand_values():
    assert score_function([0.0, 2.0], 1.0, 1.0) == 0.0
    # saturation on both sides
    assert score_function([0.0, 2.0], 1.0, -5.0) == 2.0
    assert score_function([0.0, 2.0], 1.0, 9.0) == -2.0
    assert score_function([0.3, 0.3, 0.3], 1.0, 0.3) == 0.0


def test_score_function_vectorized_and_monotone():
    rng = np.random.default_rng(0)
    column = rng.standard_cauchy(25)
    ys = np.linspace(column.min() - 3, column.max() + 3, 301)
    values = score_function(column, 0.7, ys)
    assert values.shape == ys.shape
    assert np.all(np.diff(values) <= 1e-12)
    assert np.all(np.abs(values) <= 25 * 0.7 + 1e-12)


def test_solve_level_hand_examples():
    assert solve_level([0.0, 2.0], 1.0, 1.0, "smallest") == pytest.approx(0.0, abs=1e-12)
    assert solve_level([-3.0, 3.0], 1.0, 0.0, "smallest") == pytest.approx(-2.0)
    assert solve_level([-3.0, 3.0], 1.0, 0.0, "largest") == pytest.approx(2.0)
    assert solve_level([0.0], 1.0, 0.0, "smallest") == pytest.approx(0.0)
    assert solve_level([0.0], 1.0, 0.0, "largest") == pytest.approx(0.0)


def test_solve_level_errors():
    with pytest.raises(NoSolutionError):
        solve_level([0.0, 2.0], 1.0, 2.0, "smallest")
    with pytest.raises(NoSolutionError):
        solve_level([0.0, 2.0], 1.0, -5.0, "largest")
    with pytest.raises(InvalidParameterError):
        solve_level([0.0, 2.0], 1.0, 0.5, "leftmost")


def _random_instances(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 40))
        mix = rng.choice(["normal", "cauchy", "lumpy"])
        if mix == "normal":
            column = rng.standard_normal(n) * rng.uniform(0.5, 5.0)
        elif mix == "cauchy":
            column = rng.standard_cauchy(n) * rng.uniform(0.5, 3.0)
        else:
            column = np.round(rng.standard_normal(n) * 2.0)  # ties and flats
        kappa = rng.uniform(0.2, 4.0)
        level = rng.uniform(-0.98, 0.98) * n * kappa
        yield column, kappa, level


def test_solver_matches_bisection_oracle():
    checked = 0
    for column, kappa, level in _random_instances(400, seed=42):
        scale = max(1.0, np.abs(column).max() + kappa)
        for side in ("smallest", "largest"):
            got = solve_level(column, kappa, level, side)
            want = oracle_solve(column, kappa, level, side)
            assert got == pytest.approx(want, abs=1e-9 * scale)
            checked += 1
    assert checked == 800


def test_solver_on_flat_segments_approached_from_both_sides():
    # Two clusters separated by more than 2*kappa create an exactly flat
    # segment; probe levels 1e-6 above and below the attained value. The
    # exact value itself is ill-posed in floats: a one-ulp evaluation
    # difference legitimately moves the boundary across the whole segment.
    rng = np.random.default_rng(99)
    for _ in range(50):
        kappa = rng.uniform(0.3, 2.0)
        left = rng.standard_normal(int(rng.integers(1, 6)))
        right = rng.standard_normal(int(rng.integers(1, 6))) + 10.0
        column = np.concatenate([left, right])
        n = column.size
        mid = 0.5 * (left.max() + right.min())
        flat_value = brute_score(column, kappa, mid)
        scale = max(1.0, np.abs(column).max() + kappa)
        for level in (flat_value - 1e-6, flat_value + 1e-6):
            if abs(level) >= n * kappa:
                continue
            for side in ("smallest", "largest"):
                got = solve_level(column, kappa, level, side)
                want = oracle_solve(column, kappa, level, side)
                assert got == pytest.approx(want, abs=1e-9 * scale)


def test_solver_on_exactly_representable_flat_levels():
    # Integer data with integer kappa keeps every score value exact, so the
    # attained flat value itself is a fair probe; the solver must return the
    # segment edges.
    column = np.array([-4.0, -4.0, 6.0])
    kappa = 2.0
    # Flat segment between the clusters: f = kappa * (1 - 2) = -2 there.
    assert brute_score(column, kappa, 0.0) == -2.0
    assert solve_level(column, kappa, -2.0, "smallest") == pytest.approx(-2.0)
    assert solve_level(column, kappa, -2.0, "largest") == pytest.approx(4.0)


def test_build_sci_zero_cutoff_is_huber_root_set():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((30, 5))
    spec = TruncationSpec(kappa=1.0)
    result = build_sci(X, spec, 0.0, 0.5)
    mid = huber_estimate(X, spec).vector
    np.testing.assert_allclose(0.5 * (result.lower + result.upper), mid, atol=1e-12)
    assert np.all(result.lower <= result.upper)


def test_intervals_contain_the_whole_root_set():
    # the zero set of each score, not just its midpoint, sits inside the box
    rng = np.random.default_rng(14)
    X = rng.standard_cauchy((25, 4))
    spec = TruncationSpec(kappa=1.2)
    result = build_sci(X, spec, 0.7, 0.1)
    for j in range(4):
        left = solve_level(X[:, j], 1.2, 0.0, "smallest")
        right = solve_level(X[:, j], 1.2, 0.0, "largest")
        assert result.lower[j] <= left <= right <= result.upper[j]


def test_build_sci_nested_in_cutoff():
    rng = np.random.default_rng(5)
    X = rng.standard_cauchy((40, 4))
    spec = TruncationSpec(kappa=2.0)
    small = build_sci(X, spec, 0.4, 0.1)
    large = build_sci(X, spec, 1.1, 0.1)
    assert np.all(large.lower <= small.lower)
    assert np.all(small.upper <= large.upper)


def test_build_sci_inactive_truncation_reduces_to_mean_interval():
    # kappa beyond the data range makes every score linear with slope -n, so
    # the interval is mean +- cutoff/sqrt(n); verified against the oracle.
    column = np.array([0.0, 2.0])
    X = column[:, None]
    spec = TruncationSpec(kappa=10.0)
    cutoff = np.sqrt(2.0) * 1.96
    result = build_sci(X, spec, cutoff, 0.05)
    assert result.lower[0] == pytest.approx(1.0 - 1.96, abs=1e-12)
    assert result.upper[0] == pytest.approx(1.0 + 1.96, abs=1e-12)
    level = np.sqrt(2.0) * cutoff
    assert result.lower[0] == pytest.approx(
        oracle_solve(column, 10.0, +level, "smallest"), abs=1e-9
    )
    assert result.upper[0] == pytest.approx(
        oracle_solve(column, 10.0, -level, "largest"), abs=1e-9
    )


def test_build_sci_infeasible_cutoff_names_kappa():
    X = np.zeros((4, 2)) + np.arange(2)
    spec = TruncationSpec(kappa=0.5)
    with pytest.raises(InfeasibleCutoffError, match="kappa = 0.5"):
        build_sci(X, spec, cutoff=1.1, alpha=0.1)


def test_huber_estimate_examples():
    spec = TruncationSpec(kappa=1.0)
    assert huber_estimate(np.array([[-3.0], [3.0]]), spec).vector[0] == pytest.approx(0.0)
    assert huber_estimate(np.array([[0.0], [0.0], [100.0]]), spec).vector[0] == pytest.approx(0.5)
    rng = np.random.default_rng(6)
    X = rng.standard_normal((25, 3))
    wide = TruncationSpec(kappa=float(np.abs(X).max()) * 3.0)
    np.testing.assert_allclose(huber_estimate(X, wide).vector, X.mean(axis=0), atol=1e-10)
    kind = huber_estimate(X, wide).kind
    assert kind == "huber_root"


def test_translation_equivariance():
    rng = np.random.default_rng(8)
    X = rng.standard_cauchy((30, 3))
    shift = np.array([10.0, -4.0, 0.5])
    spec = TruncationSpec(kappa=1.5)
    base = build_sci(X, spec, 0.8, 0.1)
    moved = build_sci(X + shift, spec, 0.8, 0.1)
    np.testing.assert_allclose(moved.lower, base.lower + shift, atol=1e-9)
    np.testing.assert_allclose(moved.upper, base.upper + shift, atol=1e-9)
    np.testing.assert_allclose(
        huber_estimate(X + shift, spec).vector,
        huber_estimate(X, spec).vector + shift,
        atol=1e-9,
    )


def test_test_mean_basics():
    rng = np.random.default_rng(10)
    X = rng.standard_normal((20, 4))
    spec = TruncationSpec(kappa=2.0)
    center = huber_estimate(X, spec).vector
    decision = sup_norm_test(X, spec, center, cutoff=0.5)
    assert decision.statistic == pytest.approx(0.0, abs=1e-9)
    assert not decision.reject
    # cutoff zero rejects anything with a nonzero statistic
    assert sup_norm_test(X, spec, center + 1.0, cutoff=0.0).reject
    with pytest.raises(InvalidParameterError):
        sup_norm_test(X, spec, np.zeros(5), cutoff=0.5)


def test_decision_uses_closed_inequality():
    #

    X = np.array([[0.0], [1.0]])
    spec = TruncationSpec(kappa=5.0)
    decision = sup_norm_test(X, spec, np.array([0.0]), cutoff=0.0)
    assert decision.threshold == 0.0
    assert decision.reject  # statistic 1.0 >= 0
    # statistic exactly at the threshold rejects: n = 4 keeps sqrt(n) exact
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    stat = sup_norm_test(X, spec, np.zeros(1), cutoff=1.0).statistic
    decision = sup_norm_test(X, spec, np.zeros(1), cutoff=stat / 2.0)
    assert decision.statistic == decision.threshold
    assert decision.reject


def test_duality_between_test_and_intervals():
    rng = np.random.default_rng(12)
    for _ in range(30):
        n = int(rng.integers(4, 30))
        p = int(rng.integers(1, 6))
        X = rng.standard_cauchy((n, p))
        kappa = rng.uniform(0.5, 3.0)
        spec = TruncationSpec(kappa=kappa)
        cutoff = rng.uniform(0.0, 0.9) * np.sqrt(n) * kappa
        result = build_sci(X, spec, cutoff, 0.1)
        for _ in range(20):
            mu0 = rng.uniform(X.min() - 1, X.max() + 1, size=p)
            decision = sup_norm_test(X, spec, mu0, cutoff)
            assert decision.reject == (not result.contains(mu0))
