"""Seeded synthetic data generators for experiments.

Three row-i.i.d. families, all with mean zero by construction so coverage
studies know the truth exactly:

* ``gaussian``: rows ``N(0, cov)``.
* ``student_t``: correlated Gaussian rows divided by a per-row chi-square
  factor, rescaled so each coordinate has unit variance (hence covariance
  equal to the correlation model exactly).
* ``pareto_log``: i.i.d. symmetric entries whose magnitude survival is
  ``2 * x**(-q) * (log x)**(-2)`` beyond ``tail_start``, with the remaining
  mass uniform on ``[-tail_start, tail_start]``. The one-sided tail therefore
  matches ``x**(-q) * (log x)**(-2)`` exactly for ``x >= tail_start``.

Rows are produced in fixed-size blocks, block ``b`` from ``substream(seed, b)``,
so a matrix is bitwise reproducible regardless of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from ._rng import substream
from ._validation import check_count, check_seed
from .exceptions import InvalidParameterError
from .gaussian import CovarianceModel

_FAMILIES = ("gaussian", "student_t", "pareto_log")
_ROW_BLOCK = 8192
# Relative accuracy at which the tail inversion stops.
_INV_RTOL = 1e-12


@dataclass(frozen=True)
class DistributionSpec:
    """Family, shape and seed of one synthetic dataset."""

    family: str
    n: int
    p: int
    seed: int
    cov: CovarianceModel | None = None
    dof: float | None = None
    tail_exponent: float | None = None
    tail_start: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidParameterError(
                f"family must be one of {_FAMILIES}, got {self.family!r}"
            )
        check_count(self.n, "n")
        check_count(self.p, "p")
        check_seed(self.seed)
        if self.family in ("gaussian", "student_t"):
            cov = self.cov if self.cov is not None else CovarianceModel.identity(self.p)
            if cov.dim != self.p:
                raise InvalidParameterError(
                    f"covariance dim {cov.dim} does not match p = {self.p}"
                )
            object.__setattr__(self, "cov", cov)
        if self.family == "student_t":
            if self.dof is None or float(self.dof) <= 2.0:
                raise InvalidParameterError(
                    f"student_t needs dof > 2 for finite variance, got {self.dof}"
                )
            object.__setattr__(self, "dof", float(self.dof))
        if self.family == "pareto_log":
            if self.tail_exponent is None or float(self.tail_exponent) <= 2.0:
                raise InvalidParameterError(
                    f"pareto_log needs tail_exponent > 2, got {self.tail_exponent}"
                )
            start = math.e if self.tail_start is None else float(self.tail_start)
            if start < math.e:
                raise InvalidParameterError(
                    f"tail_start must be >= e so the tail is monotone, got {start}"
                )
            object.__setattr__(self, "tail_exponent", float(self.tail_exponent))
            object.__setattr__(self, "tail_start", start)

    def with_seed(self, seed: int) -> "DistributionSpec":
        return replace(self, seed=check_seed(seed))


def _tail_survival(x, exponent: float):
    """One-sided tail ``x**(-q) * (log x)**(-2)``, valid for ``x > 1``."""
    x = np.asarray(x, dtype=float)
    return x ** (-exponent) * np.log(x) ** (-2.0)


def _invert_tail(targets: np.ndarray, exponent: float, start: float) -> np.ndarray:
    """Solve ``_tail_survival(x) = target`` on ``[start, inf)``.

    The survival function is strictly decreasing there, so each target in
    ``(0, survival(start)]`` has one solution. In ``w = log x`` coordinates
    the equation reads ``-q w - 2 log w = log target`` with a convex,
    decreasing left side; Newton from the no-log-term start
    ``w0 = -log(target) / q`` (never left of the root) overshoots at most
    once and is monotone afterwards, so no bracketing is required.
    Iterates to relative accuracy ``1e-12``.
    """
    q = exponent
    log_t = np.log(targets)
    floor = np.log(start)
    w = np.maximum(-log_t / q, floor)
    for _ in range(60):
        residual = (-q * w - 2.0 * np.log(w)) - log_t
        step = residual / (q + 2.0 / w)
        # Clamp to the domain edge; convexity keeps clamped iterates below
        # the root, so convergence stays monotone.
        w = np.maximum(w + step, floor)
        if np.max(np.abs(step)) <= _INV_RTOL:
            break
    # w approximates log x, so its absolute error is x's relative error.
    return np.maximum(np.exp(w), start)


def _pareto_log_block(rng: np.random.Generator, rows: int, p: int, spec) -> np.ndarray:
    q, start = spec.tail_exponent, spec.tail_start
    tail_mass = 2.0 * _tail_survival(start, q)
    # One uniform array per entry: the high bit is the sign, the rest is the
    # magnitude quantile (sign and quantile are independent by construction).
    u = rng.random((rows, p))
    negative = u >= 0.5
    quantile = np.maximum(2.0 * u - negative, 2.0**-53)
    magnitude = np.empty_like(u)
    # quantile < tail_mass lands in the tail; quantile/2 is then uniform on
    # (0, survival(start)].
    in_tail = quantile < tail_mass
    if np.any(in_tail):
        magnitude[in_tail] = _invert_tail(quantile[in_tail] / 2.0, q, start)
    body = ~in_tail
    magnitude[body] = start * (quantile[body] - tail_mass) / (1.0 - tail_mass)
    return np.where(negative, -magnitude, magnitude)


def generate(spec: DistributionSpec) -> np.ndarray:
    """Draw the ``n x p`` matrix described by ``spec``.

    Deterministic given the seed; identical output for any worker count since
    each fixed row block has its own substream.
    """
    root = spec.cov.factor() if spec.cov is not None else None
    blocks = []
    for block, lo in enumerate(range(0, spec.n, _ROW_BLOCK)):
        rows = min(_ROW_BLOCK, spec.n - lo)
        rng = substream(spec.seed, block)
        if spec.family == "gaussian":
            blocks.append(rng.standard_normal((rows, root.shape[1])) @ root.T)
        elif spec.family == "student_t":
            normals = rng.standard_normal((rows, root.shape[1])) @ root.T
            chisq = rng.chisquare(spec.dof, rows)
            scale = math.sqrt(spec.dof / (spec.dof - 2.0))
            blocks.append(normals / np.sqrt(chisq / spec.dof)[:, None] / scale)
        else:
            blocks.append(_pareto_log_block(rng, rows, spec.p, spec))
    return np.vstack(blocks)


def pareto_log_variance(tail_exponent: float, tail_start: float) -> float:
    """Exact entry variance of the ``pareto_log`` family, by quadrature.

    The magnitude is uniform on ``[0, tail_start]`` with probability
    ``1 - mass`` and follows the tail law beyond; the second moment of the
    tail part is ``start**2 + int_start^inf 2 x S(x) dx / S(start)``.
    """
    q, start = float(tail_exponent), float(tail_start)
    if q <= 2.0:
        raise InvalidParameterError(f"tail_exponent must exceed 2, got {q}")
    surv_start = float(_tail_survival(start, q))
    mass = 2.0 * surv_start
    tail_integral, _ = quad(lambda x: 2.0 * x * float(_tail_survival(x, q)), start, np.inf)
    second_moment_tail = start**2 + tail_integral / surv_start
    return (1.0 - mass) * start**2 / 3.0 + mass * second_moment_tail


def true_covariance_model(spec: DistributionSpec) -> CovarianceModel:
    """Population covariance of ``spec`` as a covariance model.

    Gaussian and (unit-scaled) student_t rows have exactly the configured
    model; pareto_log entries are i.i.d., so the covariance is the entry
    variance times the identity.
    """
    if spec.family in ("gaussian", "student_t"):
        return spec.cov
    variance = pareto_log_variance(spec.tail_exponent, spec.tail_start)
    return CovarianceModel.explicit(variance * np.eye(spec.p))
