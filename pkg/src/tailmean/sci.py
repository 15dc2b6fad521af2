"""Simultaneous confidence intervals from the truncated score function.

For each coordinate ``j`` the score ``f_j(y) = sum_i clamp(X_ij - y)`` is a
continuous, non-increasing, piecewise-linear function of ``y`` ranging from
``+n*kappa`` down to ``-n*kappa``, with knots at ``X_ij +- kappa`` and slope
``-#{i : |X_ij - y| < kappa}`` between knots. Interval endpoints are the
exact boundary points of ``{y : |f_j(y)| <= sqrt(n) * cutoff}``, found by
scanning the sorted knots, so the reported box is exactly the acceptance
region of the corresponding sup-norm test.

Conventions: the test rejects when the statistic is ``>=`` the threshold and
box membership is closed (``<=``), so the two agree everywhere except on the
measure-zero exact boundary, where both hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_alpha, check_data_matrix, check_positive, check_vector
from .exceptions import InfeasibleCutoffError, InvalidParameterError, NoSolutionError
from .truncation import MeanEstimate, TruncationSpec


@dataclass(frozen=True)
class SciResult:
    """Per-coordinate interval endpoints plus the cutoff that produced them."""

    lower: np.ndarray
    upper: np.ndarray
    cutoff: float
    alpha: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, point) -> bool:
        """Closed-box membership of a candidate mean vector."""
        point = check_vector(point, self.lower.size, "point")
        return bool(np.all((point >= self.lower) & (point <= self.upper)))


@dataclass(frozen=True)
class TestDecision:
    """Sup-norm test outcome; rejection uses the closed inequality ``>=``."""

    statistic: float
    threshold: float

    @property
    def reject(self) -> bool:
        return self.statistic >= self.threshold


def score_function(column, kappa: float, y):
    """Evaluate ``f(y) = sum_i clamp(x_i - y, -kappa, kappa)``.

    ``y`` may be a scalar or an array; the result matches its shape. Values
    lie in ``[-n*kappa, n*kappa]``.
    """
    kappa = check_positive(kappa, "kappa")
    column = np.asarray(column, dtype=float).ravel()
    scalar = np.isscalar(y) or np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.clip(column[None, :] - y[..., None], -kappa, kappa).sum(axis=-1)
    return float(out[0]) if scalar else out


def _knot_values(xs_sorted: np.ndarray, prefix: np.ndarray, kappa: float, y: np.ndarray):
    # Exact score at query points via counts and prefix sums: entries at or
    # below y - kappa clamp to -kappa, entries at or above y + kappa clamp to
    # +kappa, the rest contribute x_i - y.
    n = xs_sorted.size
    lo = np.searchsorted(xs_sorted, y - kappa, side="right")
    hi = np.searchsorted(xs_sorted, y + kappa, side="left")
    inner = (prefix[hi] - prefix[lo]) - y * (hi - lo)
    return kappa * ((n - hi).astype(float) - lo) + inner


def solve_level(column, kappa: float, level: float, side: str) -> float:
    """Exact boundary of ``{y : f(y) <= level}`` or ``{y : f(y) >= level}``.

    ``side="smallest"`` returns ``inf{y : f(y) <= level}``; ``side="largest"``
    returns ``sup{y : f(y) >= level}``. Solution sets of ``f(y) = level`` can
    be whole intervals (flat segments), which is why the two sides are asked
    for separately. Computed by sorting the ``2n`` knots and interpolating on
    the crossing segment, with no iteration.
    """
    kappa = check_positive(kappa, "kappa")
    column = np.asarray(column, dtype=float).ravel()
    if column.size == 0:
        raise InvalidParameterError("column must be non-empty")
    if not np.all(np.isfinite(column)):
        raise InvalidParameterError("column contains NaN or infinite entries")
    level = float(level)
    n = column.size
    if abs(level) >= n * kappa:
        raise NoSolutionError(
            f"|level| = {abs(level)} is not below n*kappa = {n * kappa}; "
            "the solution set would be unbounded"
        )
    if side not in ("smallest", "largest"):
        raise InvalidParameterError(f"side must be 'smallest' or 'largest', got {side!r}")

    xs = np.sort(column)
    prefix = np.concatenate(([0.0], np.cumsum(xs)))
    knots = np.sort(np.concatenate((column - kappa, column + kappa)))
    values = _knot_values(xs, prefix, kappa, knots)
    # Mathematically non-increasing; enforce against last-ulp evaluation noise
    # so the index search below stays consistent.
    values = np.minimum.accumulate(values)

    if side == "smallest":
        # First knot with f <= level; f(knots[0]) = n*kappa > level, so t >= 1.
        t = int(np.searchsorted(-values, -level, side="left"))
        y0, y1 = knots[t - 1], knots[t]
        f0, f1 = values[t - 1], values[t]
    else:
        # Last knot with f >= level; f(knots[-1]) = -n*kappa < level.
        t = int(np.searchsorted(-values, -level, side="right")) - 1
        y0, y1 = knots[t], knots[t + 1]
        f0, f1 = values[t], values[t + 1]
    # The crossing segment has f0 > f1, hence nonzero slope.
    return float(y0 + (f0 - level) * (y1 - y0) / (f0 - f1))


def build_sci(X, spec: TruncationSpec, cutoff: float, alpha: float) -> SciResult:
    """Exact simultaneous intervals ``{nu : max_j |f_j(nu_j)| <= sqrt(n) * cutoff}``.

    Requires ``n * kappa > sqrt(n) * cutoff``: otherwise some score function
    could not reach the level and an interval would be unbounded.
    """
    X = check_data_matrix(X)
    alpha = check_alpha(alpha)
    cutoff = float(cutoff)
    if cutoff < 0 or not np.isfinite(cutoff):
        raise InvalidParameterError(f"cutoff must be finite and >= 0, got {cutoff}")
    n, p = X.shape
    level = np.sqrt(n) * cutoff
    if n * spec.kappa <= level:
        raise InfeasibleCutoffError(
            f"kappa = {spec.kappa:.6g} cannot support cutoff = {cutoff:.6g}: "
            f"need n*kappa > sqrt(n)*cutoff ({n * spec.kappa:.6g} <= {level:.6g}); "
            "increase the selection constant or the truncation level"
        )
    lower = np.empty(p)
    upper = np.empty(p)
    for j in range(p):
        lower[j] = solve_level(X[:, j], spec.kappa, +level, "smallest")
        upper[j] = solve_level(X[:, j], spec.kappa, -level, "largest")
    return SciResult(lower=lower, upper=upper, cutoff=cutoff, alpha=alpha, kappa=spec.kappa)


def huber_estimate(X, spec: TruncationSpec) -> MeanEstimate:
    """Midpoint of the zero set of each coordinate's score function.

    The zero set is never empty (the score spans ``[-n*kappa, n*kappa]``) but
    can be a flat interval; the midpoint is the reported convention.
    """
    X = check_data_matrix(X)
    p = X.shape[1]
    vector = np.empty(p)
    for j in range(p):
        left = solve_level(X[:, j], spec.kappa, 0.0, "smallest")
        right = solve_level(X[:, j], spec.kappa, 0.0, "largest")
        vector[j] = 0.5 * (left + right)
    return MeanEstimate(vector=vector, kind="huber_root")


def test_mean(X, spec: TruncationSpec, mu0, cutoff: float) -> TestDecision:
    """Sup-norm test of a candidate mean vector.

    The statistic is ``max_j |f_j(mu0_j)|`` and the null is rejected when it
    reaches ``sqrt(n) * cutoff``.
    """
    X = check_data_matrix(X)
    n, p = X.shape
    mu0 = check_vector(mu0, p, "mu0")
    cutoff = float(cutoff)
    if cutoff < 0 or not np.isfinite(cutoff):
        raise InvalidParameterError(f"cutoff must be finite and >= 0, got {cutoff}")
    scores = np.clip(X - mu0[None, :], -spec.kappa, spec.kappa).sum(axis=0)
    statistic = float(np.max(np.abs(scores)))
    threshold = float(np.sqrt(n) * cutoff)
    return TestDecision(statistic=statistic, threshold=threshold)
