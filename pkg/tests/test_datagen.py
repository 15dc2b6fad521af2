import math

import numpy as np
import pytest
from scipy.stats import kstest, norm

from tailmean import (
    CovarianceModel,
    DistributionSpec,
    InvalidParameterError,
    generate,
    ks_two_sample,
    pareto_log_variance,
    true_covariance_model,
)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        DistributionSpec(family="uniform", n=10, p=2, seed=0)
    with pytest.raises(InvalidParameterError):
        DistributionSpec(family="student_t", n=10, p=2, seed=0, dof=2.0)
    with pytest.raises(InvalidParameterError):
        DistributionSpec(family="pareto_log", n=10, p=2, seed=0, tail_exponent=2.0)
    with pytest.raises(InvalidParameterError):
        DistributionSpec(
            family="pareto_log", n=10, p=2, seed=0, tail_exponent=3.0, tail_start=1.0
        )
    with pytest.raises(InvalidParameterError):
        DistributionSpec(
            family="gaussian", n=10, p=2, seed=0, cov=CovarianceModel.identity(3)
        )


def test_gaussian_defaults_to_identity():
    spec = DistributionSpec(family="gaussian", n=10, p=3, seed=0)
    assert spec.cov.kind == "identity"
    assert generate(spec).shape == (10, 3)


def test_determinism_and_seed_sensitivity():
    spec = DistributionSpec(family="gaussian", n=500, p=4, seed=11)
    a = generate(spec)
    b = generate(spec)
    np.testing.assert_array_equal(a, b)
    c = generate(spec.with_seed(12))
    assert not np.array_equal(a, c)


def test_block_boundaries_do_not_change_rows():
    # Rows are produced block by block; the first rows of a longer sample
    # must equal the shorter sample (same substream per block).
    spec_small = DistributionSpec(family="gaussian", n=100, p=3, seed=5)
    spec_large = DistributionSpec(family="gaussian", n=300, p=3, seed=5)
    small = generate(spec_small)
    large = generate(spec_large)
    np.testing.assert_array_equal(large[:100], small)


def test_gaussian_moments_at_scale():
    spec = DistributionSpec(family="gaussian", n=10**5, p=5, seed=3)
    X = generate(spec)
    assert np.max(np.abs(X.mean(axis=0))) < 0.02
    assert np.max(np.abs(X.var(axis=0) - 1.0)) < 0.02


def test_gaussian_ar1_lag_correlation():
    rho = 0.6
    spec = DistributionSpec(
        family="gaussian", n=10**5, p=6, seed=4, cov=CovarianceModel.ar1(6, rho)
    )
    X = generate(spec)
    for j in range(5):
        r = np.corrcoef(X[:, j], X[:, j + 1])[0, 1]
        assert abs(r - rho) < 0.02


def test_student_t_unit_variance_and_gaussian_limit():
    spec = DistributionSpec(family="student_t", n=10**5, p=3, seed=6, dof=5.0)
    X = generate(spec)
    assert np.max(np.abs(X.var(axis=0) - 1.0)) < 0.08
    # dof -> infinity behaves like a standard normal marginal
    nearly = DistributionSpec(family="student_t", n=10**5, p=1, seed=7, dof=10**4)
    sample = generate(nearly).ravel()
    assert kstest(sample, norm.cdf).statistic < 0.01


def test_student_t_heavier_tails_than_gaussian():
    spec = DistributionSpec(family="student_t", n=10**5, p=1, seed=8, dof=3.5)
    X = generate(spec).ravel()
    assert np.mean(np.abs(X) > 3.0) > 2.0 * (1.0 - norm.cdf(3.0))


def test_pareto_log_tail_matches_formula():
    # P(X >= x) = x**(-q) (log x)**(-2) for x >= tail_start; at x = e**2 with
    # q = 4 that is exp(-8)/4.
    spec = DistributionSpec(family="pareto_log", n=10**7, p=1, seed=9, tail_exponent=4.0)
    X = generate(spec).ravel()
    want = math.exp(-8.0) / 4.0
    got = np.mean(X >= math.e**2)
    assert got == pytest.approx(want, rel=0.15)
    # the same exactness deeper into the body edge
    assert np.mean(X >= math.e) == pytest.approx(math.exp(-4.0), rel=0.05)


def test_pareto_log_symmetry():
    spec = DistributionSpec(family="pareto_log", n=10**6, p=1, seed=10, tail_exponent=3.0)
    X = generate(spec).ravel()
    se = X.std() / math.sqrt(X.size)
    assert abs(X.mean()) < 4.0 * se
    assert np.mean(X < 0) == pytest.approx(0.5, abs=0.002)


def test_pareto_log_variance_quadrature_vs_sample():
    spec = DistributionSpec(family="pareto_log", n=10**6, p=1, seed=12, tail_exponent=4.0)
    X = generate(spec).ravel()
    want = pareto_log_variance(4.0, math.e)
    assert X.var() == pytest.approx(want, rel=0.02)


def test_pareto_log_magnitudes_start_uniform():
    spec = DistributionSpec(family="pareto_log", n=10**5, p=1, seed=13, tail_exponent=3.0)
    X = np.abs(generate(spec).ravel())
    body = X[X < math.e]
    assert kstest(body / math.e, "uniform").pvalue > 1e-3


def test_true_covariance_model():
    cov = CovarianceModel.ar1(4, 0.3)
    spec = DistributionSpec(family="gaussian", n=10, p=4, seed=0, cov=cov)
    assert true_covariance_model(spec) is cov
    tspec = DistributionSpec(family="student_t", n=10, p=4, seed=0, dof=6.0, cov=cov)
    assert true_covariance_model(tspec) is cov
    pspec = DistributionSpec(family="pareto_log", n=10, p=3, seed=0, tail_exponent=3.0)
    model = true_covariance_model(pspec)
    want = pareto_log_variance(3.0, math.e) * np.eye(3)
    np.testing.assert_allclose(model.materialize(), want)


def test_student_t_matches_gaussian_copula_structure():
    # same correlation model: empirical correlation close to the target
    rho = 0.5
    spec = DistributionSpec(
        family="student_t",
        n=10**5,
        p=2,
        seed=14,
        dof=8.0,
        cov=CovarianceModel.equicorrelated(2, rho),
    )
    X = generate(spec)
    assert np.corrcoef(X[:, 0], X[:, 1])[0, 1] == pytest.approx(rho, abs=0.02)


def test_families_disagree():
    n, p = 2000, 2
    g = generate(DistributionSpec(family="gaussian", n=n, p=p, seed=1))
    t = generate(DistributionSpec(family="student_t", n=n, p=p, seed=1, dof=3.0))
    pl = generate(DistributionSpec(family="pareto_log", n=n, p=p, seed=1, tail_exponent=3.0))
    assert ks_two_sample(g.ravel(), t.ravel()) > 0.01
    assert ks_two_sample(g.ravel(), pl.ravel()) > 0.05
