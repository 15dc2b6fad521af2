"""Half-sampling calibration of the sup-norm cutoff.

A random permutation splits the sample into two halves; scaled differences of
paired rows are mean-zero symmetric vectors with the same covariance as the
data, so the truncated max statistic of many such splits estimates the null
distribution of the data statistic without ever estimating the covariance
matrix. Each permutation replicate draws from its own substream keyed by
``(seed, replicate_index)``, which makes the resampled distribution
deterministic for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from ._validation import check_count, check_data_matrix, check_seed
from .exceptions import InvalidParameterError
from .quantiles import upper_quantile
from .truncation import TruncationSpec

# Replicates are evaluated in vectorized batches; the batch size only bounds
# memory, every replicate's numbers come from its own substream.
_BATCH = 128


@dataclass(frozen=True)
class ResamplePlan:
    """How many permutation replicates to draw and from which streams.

    ``half_size`` is ``floor(n / 2)``. Odd samples drop one uniformly chosen
    row (recorded in ``dropped_row``) so the remaining rows pair up exactly.
    """

    n_permutations: int
    half_size: int
    seed: int
    dropped_row: int | None = None

    def __post_init__(self):
        check_count(self.n_permutations, "n_permutations")
        check_count(self.half_size, "half_size")
        check_seed(self.seed)
        if self.dropped_row is not None and int(self.dropped_row) < 0:
            raise InvalidParameterError("dropped_row must be a row index")

    @classmethod
    def for_sample_size(
        cls,
        n: int,
        n_permutations: int,
        seed: int,
        dropped_row: int | None = None,
    ) -> "ResamplePlan":
        """Plan for a sample of ``n`` rows; substream 0 picks the dropped row."""
        n = check_count(n, "n", minimum=2)
        seed = check_seed(seed)
        half = n // 2
        if n % 2 == 0:
            if dropped_row is not None:
                raise InvalidParameterError("dropped_row only applies to odd n")
        elif dropped_row is None:
            dropped_row = int(substream(seed, 0).integers(n))
        elif not 0 <= int(dropped_row) < n:
            raise InvalidParameterError(f"dropped_row {dropped_row} outside 0..{n - 1}")
        return cls(
            n_permutations=n_permutations,
            half_size=half,
            seed=seed,
            dropped_row=None if dropped_row is None else int(dropped_row),
        )

    def retained_rows(self, n: int) -> np.ndarray:
        """Indices of the rows that participate, in increasing order."""
        if self.dropped_row is None:
            if n != 2 * self.half_size:
                raise InvalidParameterError(
                    f"plan with half_size {self.half_size} and no dropped row "
                    f"does not match n = {n}"
                )
            return np.arange(n)
        if n != 2 * self.half_size + 1:
            raise InvalidParameterError(
                f"plan with half_size {self.half_size} and a dropped row "
                f"does not match n = {n}"
            )
        if not 0 <= self.dropped_row < n:
            raise InvalidParameterError(f"dropped_row {self.dropped_row} outside 0..{n - 1}")
        return np.delete(np.arange(n), self.dropped_row)


@dataclass(frozen=True)
class ResampleDistribution:
    """Sorted max statistics of the permutation replicates."""

    stats: np.ndarray
    kappa_used: float
    half_size: int

    def __post_init__(self):
        stats = np.asarray(self.stats, dtype=float)
        if stats.ndim != 1 or stats.size == 0:
            raise InvalidParameterError("stats must be a non-empty 1-D array")
        if np.any(np.diff(stats) < 0):
            raise InvalidParameterError("stats must be sorted ascending")
        if stats[0] < 0:
            raise InvalidParameterError("stats must be non-negative")
        # Truncation caps every statistic at sqrt(half_size) * kappa; allow
        # accumulated rounding from the mean.
        bound = math.sqrt(self.half_size) * self.kappa_used
        if stats[-1] > bound * (1.0 + 1e-9):
            raise InvalidParameterError(
                f"stats exceed the truncation bound {bound:.6g}"
            )
        object.__setattr__(self, "stats", stats)


def half_sample_diffs(X, permutation, plan: ResamplePlan) -> np.ndarray:
    """Scaled paired differences ``(X[perm[i]] - X[perm[half + i]]) / sqrt(2)``.

    ``permutation`` must be a bijection on the rows the plan retains.
    """
    X = check_data_matrix(X)
    perm = np.asarray(permutation, dtype=int).ravel()
    retained = plan.retained_rows(X.shape[0])
    if perm.size != retained.size or not np.array_equal(np.sort(perm), retained):
        raise InvalidParameterError(
            "permutation must be a bijection on the retained row indices"
        )
    m = plan.half_size
    return (X[perm[:m]] - X[perm[m:]]) / math.sqrt(2.0)


def _batch_stats(X, retained, kappa, seed, start, stop, m):
    perms = np.stack(
        [substream(seed, j).permutation(retained) for j in range(start, stop)]
    )
    diffs = (X[perms[:, :m]] - X[perms[:, m:]]) / math.sqrt(2.0)
    means = np.clip(diffs, -kappa, kappa).mean(axis=1)
    return math.sqrt(m) * np.abs(means).max(axis=1)


def resample_distribution(
    X,
    spec: TruncationSpec,
    plan: ResamplePlan,
    workers: int = 1,
) -> ResampleDistribution:
    """Max statistics ``sqrt(m) * |truncated mean of the diffs|_inf`` over all replicates.

    Replicate ``j`` (1-based) draws its permutation from ``substream(seed, j)``,
    so the result depends only on ``(X, spec, plan)``. Batches may be evaluated
    concurrently; the merged statistics are sorted once at the end.
    """
    X = check_data_matrix(X)
    workers = check_count(workers, "workers")
    retained = plan.retained_rows(X.shape[0])
    m = plan.half_size
    count = plan.n_permutations
    stats = np.empty(count)

    spans = [(lo, min(lo + _BATCH, count)) for lo in range(0, count, _BATCH)]

    def run(span):
        lo, hi = span
        # Replicates are 1-based: substream 0 belongs to the plan setup.
        stats[lo:hi] = _batch_stats(X, retained, spec.kappa, plan.seed, lo + 1, hi + 1, m)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)

    return ResampleDistribution(
        stats=np.sort(stats), kappa_used=spec.kappa, half_size=m
    )


def empirical_quantile(dist: ResampleDistribution, alpha: float) -> float:
    """Cutoff ``inf{t : F(t) >= 1 - alpha}`` of the resampled distribution."""
    return upper_quantile(dist.stats, alpha)
