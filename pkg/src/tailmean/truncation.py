"""Element-wise truncation, the truncated sample mean, and level selection.

The truncation operator clamps each entry of the data into ``[-kappa, kappa]``
before averaging, which tames heavy tails at the price of a small, controlled
bias. The level ``kappa`` is chosen from the sample size, the dimension and a
plug-in estimate of the uniform ``(2 + theta)``-th absolute moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_count,
    check_data_matrix,
    check_positive,
    check_theta,
)
from .exceptions import InvalidParameterError

MEAN_KINDS = ("truncated_mean", "plain_mean", "huber_root")


@dataclass(frozen=True)
class MeanEstimate:
    """Per-coordinate location estimate together with how it was produced."""

    vector: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in MEAN_KINDS:
            raise InvalidParameterError(
                f"kind must be one of {MEAN_KINDS}, got {self.kind!r}"
            )
        object.__setattr__(self, "vector", np.asarray(self.vector, dtype=float))


@dataclass(frozen=True)
class TruncationSpec:
    """Truncation level and the quantities that produced it.

    Attributes
    ----------
    kappa : float
        Truncation level, in the units of the data.
    theta : float
        Moment order offset in (0, 1]; the working moment order is
        ``2 + theta``.
    moment_bound : float
        Estimate (or assumed value) of the largest per-coordinate
        ``(2 + theta)``-th absolute central moment.
    selection_constant : float
        Multiplier in front of the selection rule; the rule fixes the level
        only up to a constant factor.
    """

    kappa: float
    theta: float = 1.0
    moment_bound: float = 1.0
    selection_constant: float = 1.0

    def __post_init__(self):
        check_positive(self.kappa, "kappa")
        check_theta(self.theta)
        check_positive(self.moment_bound, "moment_bound")
        check_positive(self.selection_constant, "selection_constant")

    @classmethod
    def from_data(
        cls,
        X,
        theta: float = 1.0,
        selection_constant: float = 1.0,
        kappa: float | None = None,
    ) -> "TruncationSpec":
        """Build a spec from data: plug-in moment bound, then the level rule.

        An explicit ``kappa`` overrides the selection rule but the moment
        bound is still estimated and recorded.
        """
        X = check_data_matrix(X)
        theta = check_theta(theta)
        selection_constant = check_positive(selection_constant, "selection_constant")
        n, p = X.shape
        moment_bound = estimate_moment_bound(X, theta)
        if kappa is None:
            kappa = select_kappa(n, p, theta, moment_bound, selection_constant)
        return cls(
            kappa=float(kappa),
            theta=theta,
            moment_bound=moment_bound,
            selection_constant=selection_constant,
        )


def truncate(x, kappa: float):
    """Clamp ``x`` element-wise into ``[-kappa, kappa]``.

    Accepts scalars or arrays; scalar input returns a float.
    """
    kappa = check_positive(kappa, "kappa")
    out = np.clip(x, -kappa, kappa)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def truncated_mean(X, spec: TruncationSpec) -> MeanEstimate:
    """Column means of the truncated data.

    Every entry of the result lies in ``[-kappa, kappa]``.
    """
    X = check_data_matrix(X)
    vector = np.clip(X, -spec.kappa, spec.kappa).mean(axis=0)
    return MeanEstimate(vector=vector, kind="truncated_mean")


def plain_mean(X) -> MeanEstimate:
    """Ordinary column means, for side-by-side comparisons."""
    X = check_data_matrix(X)
    return MeanEstimate(vector=X.mean(axis=0), kind="plain_mean")


def estimate_moment_bound(X, theta: float = 1.0) -> float:
    """Plug-in estimate of the largest per-coordinate ``(2 + theta)``-th moment.

    Columns are centered at their medians before taking absolute powers; the
    median stays stable under the heavy tails this estimator is meant for,
    whereas the column mean may not. Returns the max over columns of the
    average ``|X_ij - median_j| ** (2 + theta)``. Degenerate (constant)
    columns contribute zero; a zero result cannot seed the level selection
    rule and must be guarded by the caller.
    """
    X = check_data_matrix(X)
    theta = check_theta(theta)
    centered = np.abs(X - np.median(X, axis=0))
    if theta == 1.0:
        powered = centered * centered * centered
    else:
        powered = centered ** (2.0 + theta)
    return float(np.max(np.mean(powered, axis=0)))


def select_kappa(
    n: int,
    p: int,
    theta: float,
    moment_bound: float,
    constant: float = 1.0,
) -> float:
    """Truncation level rule ``constant * (n * moment_bound / log p) ** (1 / (2 + theta))``.

    Natural logarithm. For ``p = 1`` the rule would divide by ``log 1 = 0``;
    ``log 2`` is substituted, a documented convention since a one-dimensional
    problem is outside the regime this rule is designed for.
    """
    n = check_count(n, "n", minimum=2)
    p = check_count(p, "p", minimum=1)
    theta = check_theta(theta)
    moment_bound = check_positive(moment_bound, "moment_bound")
    constant = check_positive(constant, "selection constant")
    log_p = math.log(p) if p >= 2 else math.log(2.0)
    return float(constant * (n * moment_bound / log_p) ** (1.0 / (2.0 + theta)))
