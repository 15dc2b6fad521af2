"""Scikit-learn style front end for the interval construction pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._rng import derive_seed
from ._validation import check_alpha, check_count, check_data_matrix, check_seed
from .resampling import ResamplePlan, empirical_quantile, resample_distribution
from .sci import SciResult, TestDecision, build_sci, huber_estimate, test_mean
from .truncation import TruncationSpec, truncated_mean


class TruncatedMeanSCI(BaseEstimator):
    """Simultaneous confidence intervals for a high dimensional mean vector.

    ``fit`` truncates the data at a level chosen from a plug-in moment
    estimate, calibrates the sup-norm cutoff by permutation half-sampling,
    and solves each coordinate's score equation exactly for the interval
    endpoints. Suited to heavy-tailed rows where only low-order polynomial
    moments exist.

    Parameters
    ----------
    alpha : float, default=0.1
        Simultaneous miscoverage level in (0, 1).
    theta : float, default=1.0
        Moment order offset in (0, 1]; the plug-in moment has order
        ``2 + theta``.
    selection_constant : float, default=1.0
        Multiplier of the truncation level rule.
    kappa : float or None, default=None
        Explicit truncation level; overrides the selection rule.
    n_permutations : int, default=1000
        Number of half-sampling replicates used to calibrate the cutoff.
    random_state : int, default=0
        Seed for the resampling streams (integer only; reproducibility is a
        contract here, not a convenience).
    workers : int, default=1
        Thread count for the resampling batches. Never changes the numbers.

    Attributes
    ----------
    n_samples_, n_features_in_ : int
        Shape of the fitted data.
    kappa_ : float
        Truncation level used.
    moment_bound_ : float
        Plug-in moment estimate behind the level rule.
    cutoff_ : float
        Calibrated cutoff (upper ``1 - alpha`` resampling quantile).
    lower_, upper_ : ndarray of shape (n_features,)
        Interval endpoints.
    estimate_ : ndarray of shape (n_features,)
        Per-coordinate robust point estimate (midpoint of the score zero set).
    truncated_mean_ : ndarray of shape (n_features,)
        Truncated sample mean.
    resample_stats_ : ndarray of shape (n_permutations,)
        Sorted resampled max statistics.
    dropped_row_ : int or None
        Row left out when the sample size is odd.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> X = rng.standard_normal((200, 10))
    >>> est = TruncatedMeanSCI(alpha=0.1, random_state=7).fit(X)
    >>> bool(np.all(est.lower_ <= est.upper_))
    True
    """

    def __init__(
        self,
        alpha: float = 0.1,
        theta: float = 1.0,
        selection_constant: float = 1.0,
        kappa: float | None = None,
        n_permutations: int = 1000,
        random_state: int = 0,
        workers: int = 1,
    ):
        self.alpha = alpha
        self.theta = theta
        self.selection_constant = selection_constant
        self.kappa = kappa
        self.n_permutations = n_permutations
        self.random_state = random_state
        self.workers = workers

    def fit(self, X, y=None):
        """Compute the intervals for the rows of ``X``; ``y`` is ignored."""
        X = check_data_matrix(X)
        alpha = check_alpha(self.alpha)
        seed = check_seed(self.random_state)
        check_count(self.n_permutations, "n_permutations")
        n, p = X.shape

        spec = TruncationSpec.from_data(
            X,
            theta=self.theta,
            selection_constant=self.selection_constant,
            kappa=self.kappa,
        )
        plan = ResamplePlan.for_sample_size(
            n, self.n_permutations, derive_seed(seed, 1)
        )
        dist = resample_distribution(X, spec, plan, workers=self.workers)
        cutoff = empirical_quantile(dist, alpha)
        result = build_sci(X, spec, cutoff, alpha)

        self.n_samples_ = n
        self.n_features_in_ = p
        self.spec_ = spec
        self.kappa_ = spec.kappa
        self.moment_bound_ = spec.moment_bound
        self.cutoff_ = cutoff
        self.sci_result_ = result
        self.lower_ = result.lower
        self.upper_ = result.upper
        self.estimate_ = huber_estimate(X, spec).vector
        self.truncated_mean_ = truncated_mean(X, spec).vector
        self.resample_stats_ = dist.stats
        self.dropped_row_ = plan.dropped_row
        self._X = X
        return self

    def intervals(self) -> np.ndarray:
        """Endpoints as an ``(n_features, 2)`` array."""
        check_is_fitted(self, "sci_result_")
        return np.column_stack((self.lower_, self.upper_))

    def test(self, mu0) -> TestDecision:
        """Sup-norm test of ``H0: mean == mu0`` at the fitted cutoff."""
        check_is_fitted(self, "sci_result_")
        return test_mean(self._X, self.spec_, mu0, self.cutoff_)

    def contains(self, mu0) -> bool:
        """Closed-box membership of ``mu0`` in the fitted intervals."""
        check_is_fitted(self, "sci_result_")
        return self.sci_result_.contains(mu0)

    def result(self) -> SciResult:
        check_is_fitted(self, "sci_result_")
        return self.sci_result_
