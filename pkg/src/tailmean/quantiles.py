"""Upper empirical quantile with the inf convention.

Single source of truth for every cutoff in the package: the resampled cutoff
and the Gaussian reference cutoff must use the exact same rule so that they
are interchangeable in the interval construction.
"""

from __future__ import annotations

import math

import numpy as np

from ._validation import check_alpha
from .exceptions import InvalidParameterError

# Absolute slack when computing ceil((1 - alpha) * size): the product can land
# a few ulps above an exact integer rank, which would shift the quantile by a
# whole order statistic.
_RANK_EPS = 1e-9


def upper_quantile(values, alpha: float) -> float:
    """Smallest value whose empirical CDF weight reaches ``1 - alpha``.

    For a sample of size ``size`` this is the order statistic of rank
    ``ceil((1 - alpha) * size)`` (1-based), i.e. the infimum of all ``t`` with
    ``F(t) >= 1 - alpha``. The result is always an element of ``values``.
    """
    alpha = check_alpha(alpha)
    values = np.sort(np.asarray(values, dtype=float).ravel())
    if values.size == 0:
        raise InvalidParameterError("cannot take a quantile of an empty sample")
    rank = math.ceil((1.0 - alpha) * values.size - _RANK_EPS)
    rank = min(max(rank, 1), values.size)
    return float(values[rank - 1])
