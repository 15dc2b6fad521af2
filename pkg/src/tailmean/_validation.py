"""Input validation helpers shared by the functional API and the estimator."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidParameterError


def check_data_matrix(X) -> np.ndarray:
    """Coerce ``X`` to a float matrix of observations by rows.

    Requires a 2-D shape with at least two rows and one column, and rejects
    any non-finite entry.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidParameterError(
            f"expected a 2-D observation matrix, got shape {X.shape}"
        )
    n, p = X.shape
    if n < 2 or p < 1:
        raise InvalidParameterError(
            f"need at least 2 rows and 1 column, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("data matrix contains NaN or infinite entries")
    return X


def check_vector(v, length: int, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != length:
        raise InvalidParameterError(f"{name} has length {v.size}, expected {length}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError(f"{name} contains NaN or infinite entries")
    return v


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")
    return value


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_theta(theta) -> float:
    theta = float(theta)
    if not 0.0 < theta <= 1.0:
        raise InvalidParameterError(f"theta must lie in (0, 1], got {theta}")
    return theta


def check_count(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_seed(seed) -> int:
    if not isinstance(seed, numbers.Integral):
        raise InvalidParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if seed < 0:
        raise InvalidParameterError(f"seed must be non-negative, got {seed}")
    return seed
