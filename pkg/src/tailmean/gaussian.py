"""Gaussian reference distribution of the sup-norm statistic and diagnostics.

When the covariance is known, the distribution of ``|Y|_inf`` for a centered
Gaussian vector ``Y`` with that covariance is the reference against which the
truncated max statistic is compared, both for the oracle cutoff and for
Kolmogorov-distance diagnostics of the approximation quality.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from ._validation import check_count, check_seed, check_theta
from .exceptions import InvalidCovarianceError, InvalidParameterError
from .quantiles import upper_quantile

_COV_KINDS = ("identity", "equicorrelated", "ar1", "explicit")
# Relative eigenvalue slack when deciding whether an explicit matrix is PSD.
_PSD_RTOL = 1e-8
# Fixed Monte Carlo block size; per-block substreams keep the draws identical
# for any worker count.
_BLOCK = 1 << 14


@dataclass(frozen=True)
class CovarianceModel:
    """Structured or explicit covariance of the reference Gaussian vector."""

    kind: str
    dim: int
    rho: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _COV_KINDS:
            raise InvalidParameterError(f"kind must be one of {_COV_KINDS}, got {self.kind!r}")
        check_count(self.dim, "dim")
        if self.kind in ("equicorrelated", "ar1"):
            if self.rho is None or not -1.0 <= float(self.rho) <= 1.0:
                raise InvalidParameterError(f"rho must lie in [-1, 1], got {self.rho}")
            object.__setattr__(self, "rho", float(self.rho))
        if self.kind == "explicit":
            if self.matrix is None:
                raise InvalidParameterError("explicit covariance needs a matrix")
            mat = np.asarray(self.matrix, dtype=float)
            if mat.shape != (self.dim, self.dim):
                raise InvalidCovarianceError(
                    f"matrix shape {mat.shape} does not match dim {self.dim}"
                )
            if not np.all(np.isfinite(mat)):
                raise InvalidCovarianceError("covariance contains non-finite entries")
            scale = np.max(np.abs(mat))
            if scale > 0 and np.max(np.abs(mat - mat.T)) > _PSD_RTOL * scale:
                raise InvalidCovarianceError("covariance matrix is not symmetric")
            object.__setattr__(self, "matrix", 0.5 * (mat + mat.T))

    @classmethod
    def identity(cls, dim: int) -> "CovarianceModel":
        return cls(kind="identity", dim=dim)

    @classmethod
    def equicorrelated(cls, dim: int, rho: float) -> "CovarianceModel":
        return cls(kind="equicorrelated", dim=dim, rho=rho)

    @classmethod
    def ar1(cls, dim: int, rho: float) -> "CovarianceModel":
        return cls(kind="ar1", dim=dim, rho=rho)

    @classmethod
    def explicit(cls, matrix) -> "CovarianceModel":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidCovarianceError(f"covariance must be square, got {matrix.shape}")
        return cls(kind="explicit", dim=matrix.shape[0], matrix=matrix)

    def materialize(self) -> np.ndarray:
        """Dense covariance matrix for this model."""
        p = self.dim
        if self.kind == "identity":
            return np.eye(p)
        if self.kind == "equicorrelated":
            return np.full((p, p), self.rho) + (1.0 - self.rho) * np.eye(p)
        if self.kind == "ar1":
            idx = np.arange(p)
            return np.asarray(self.rho, dtype=float) ** np.abs(idx[:, None] - idx[None, :])
        return np.array(self.matrix, dtype=float)

    def factor(self) -> np.ndarray:
        """Square root ``R`` with ``R @ R.T`` equal to the covariance.

        Cholesky when positive definite; otherwise a symmetric eigenvalue
        factorization with small negative eigenvalues clipped to zero, so
        degenerate (semidefinite) models such as perfect correlation are
        usable. Eigenvalues below ``-1e-8 * max|entry|`` are an error.
        """
        mat = self.materialize()
        try:
            return np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            pass
        eigvals, eigvecs = np.linalg.eigh(mat)
        tol = _PSD_RTOL * max(np.max(np.abs(mat)), 1e-300)
        if eigvals[0] < -tol:
            raise InvalidCovarianceError(
                f"covariance has negative eigenvalue {eigvals[0]:.3e} beyond tolerance"
            )
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_gaussian_max(
    cov: CovarianceModel,
    draws: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Sorted i.i.d. realizations of ``max_j |Y_j|`` for ``Y ~ N(0, cov)``.

    Block ``b`` of draws comes from ``substream(seed, b)``; blocks have a
    fixed size, so the sample is identical for any worker count.
    """
    draws = check_count(draws, "draws")
    seed = check_seed(seed)
    workers = check_count(workers, "workers")
    root = cov.factor()
    out = np.empty(draws)
    spans = [(b, lo, min(lo + _BLOCK, draws)) for b, lo in enumerate(range(0, draws, _BLOCK))]

    def run(span):
        block, lo, hi = span
        normals = substream(seed, block).standard_normal((hi - lo, root.shape[1]))
        out[lo:hi] = np.abs(normals @ root.T).max(axis=1)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)
    return np.sort(out)


def oracle_cutoff(samples, alpha: float) -> float:
    """Upper ``1 - alpha`` quantile of a sample of max statistics.

    Shares the quantile rule with the resampled cutoff so the two are
    interchangeable.
    """
    return upper_quantile(samples, alpha)


def ks_two_sample(a, b) -> float:
    """Exact sup distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise InvalidParameterError("both samples must be non-empty")
    pooled = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True)
class GaDiagnostics:
    """Distance estimate plus the growth-condition ratios behind it.

    ``ga_condition_ratio`` is ``(log p)^(4 + 3*theta) * M^2 / n^theta``: the
    approximation for the truncated mean is trustworthy when it is small.
    ``bound_proxy`` is ``1/n + 3 * ga_condition_ratio^(1 / (6 + 3*theta))``, a
    qualitative rate proxy (the absolute constant is unknown).
    ``plain_mean_condition_ratio`` is ``p * (log p)^(3q/2 - 1) / n^(q/2 - 1)``
    for data with finite ``q``-th moments: the regime where the plain sample
    mean itself admits the approximation.
    """

    ks_distance: float | None
    bound_proxy: float
    ga_condition_ratio: float
    plain_mean_condition_ratio: float | None = None


def theory_diagnostics(
    n: int,
    p: int,
    theta: float,
    moment_bound: float,
    tail_moment_order: float | None = None,
) -> GaDiagnostics:
    """Growth-condition ratios for sample size ``n`` and dimension ``p``.

    ``tail_moment_order`` (``q``), when given, adds the polynomial-regime
    ratio for the plain mean. The distance field is left unset; it is an
    empirical quantity, not a formula.
    """
    n = check_count(n, "n", minimum=2)
    p = check_count(p, "p", minimum=2)
    theta = check_theta(theta)
    if moment_bound < 0:
        raise InvalidParameterError(f"moment_bound must be >= 0, got {moment_bound}")
    log_p = math.log(p)
    ratio = log_p ** (4.0 + 3.0 * theta) * moment_bound**2 / n**theta
    proxy = 1.0 / n + 3.0 * ratio ** (1.0 / (6.0 + 3.0 * theta))
    plain = None
    if tail_moment_order is not None:
        q = float(tail_moment_order)
        if q <= 2.0:
            raise InvalidParameterError(f"tail_moment_order must exceed 2, got {q}")
        plain = p * log_p ** (1.5 * q - 1.0) / n ** (0.5 * q - 1.0)
    return GaDiagnostics(
        ks_distance=None,
        bound_proxy=float(proxy),
        ga_condition_ratio=float(ratio),
        plain_mean_condition_ratio=None if plain is None else float(plain),
    )
