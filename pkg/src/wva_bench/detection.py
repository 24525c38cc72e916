"""Likelihood-ratio detection of a nonzero coupling.

D compares the best-fit likelihood against the null x = 0. For the
Gaussian reading model D is an exact one-parameter quadratic form:
chi-square with one degree of freedom under the null, noncentrality
x^2 * ow^T Q ow under the alternative. The categorical split quantifies
how much of the statistic survives post-selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import gammainc

from .errors import BadAlpha, BadBins, BadParams, ZeroInformation
from .estimators import Dataset, _check_weights, mle
from .noise import NoiseCovariance
from .quantum import Observable, PureState, expected_O_squared


@dataclass(frozen=True)
class DetectionReport:
    """Detection statistic with both null-offset conventions on display.

    expected_d_alt_ndof carries the per-reading convention N + noncentrality
    (one degree of freedom for each of the N readings); the exact
    one-parameter model has E[D|x] = 1 + noncentrality.
    """

    d_statistic: float
    noncentrality: float
    expected_d_alt_ndof: float
    decision: str
    alpha: float
    dof: int = 1

    def __post_init__(self):
        if self.d_statistic < 0:
            raise BadParams(f"d_statistic must be >= 0, got {self.d_statistic!r}")
        if self.noncentrality < 0:
            raise BadParams(f"noncentrality must be >= 0, got {self.noncentrality!r}")


def lr_statistic(data: Dataset, ow, cov: NoiseCovariance, sigma: float) -> float:
    """D = rᵀQr − (r − x̂·ow)ᵀQ(r − x̂·ow) with x̂ the MLE, Q = (K+σ²1)⁻¹."""
    ow = _check_weights(data, ow)
    x_hat = mle(data, ow, cov, sigma).estimate
    chol = cov.shifted_cholesky(sigma)
    r = data.readings
    residual = r - x_hat * ow
    full = float(r @ cho_solve(chol, r))
    fitted = float(residual @ cho_solve(chol, residual))
    # Algebraically nonnegative; clamp the rounding residue.
    return max(full - fitted, 0.0)


def expected_d(x: float, ow, cov: NoiseCovariance, sigma: float):
    """(noncentrality, ndof_form) of E[D] at coupling x, fixed outcomes.

    noncentrality = x²·owᵀQow; ndof_form = N + noncentrality, the value
    under the convention that each reading contributes one degree of
    freedom to the null offset.
    """
    ow = np.asarray(ow, dtype=np.float64)
    if not np.any(ow != 0.0):
        raise ZeroInformation("all weak-value weights are zero")
    chol = cov.shifted_cholesky(sigma)
    quad = float(ow @ cho_solve(chol, ow))
    noncentrality = x**2 * quad
    return noncentrality, ow.shape[0] + noncentrality


def expected_d_total(
    x: float, n: int, initial: PureState, observable: Observable, sigma: float
) -> float:
    """Model-averaged noncentrality n·x²·⟨i|O²|i⟩/σ² over outcome strings."""
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    if sigma <= 0:
        raise BadParams(f"sigma must be positive, got {sigma}")
    return n * x**2 * expected_O_squared(initial, observable) / sigma**2


def expected_d_total_ndof(
    x: float, n: int, initial: PureState, observable: Observable, sigma: float
) -> float:
    """Per-reading-dof form n·(1 + x²·⟨i|O²|i⟩/σ²)."""
    return n + expected_d_total(x, n, initial, observable, sigma)


def categorical_lr_split(counts, p_null, p_mle, checkmark_set):
    """Split of the categorical statistic 2Σ n_k log(p_mle/p_null).

    Returns (d_total, d_check, d_cross) where d_check sums bins in
    checkmark_set (0-based indices) and d_cross the rest; d_total is
    their sum by construction. Bins with n_k = 0 contribute exactly 0.
    The nonnegativity of all three pieces holds when p_mle dominates
    p_null on every observed bin (the caller's precondition).
    """
    counts = np.asarray(counts, dtype=np.int64)
    p_null = np.asarray(p_null, dtype=np.float64)
    p_mle = np.asarray(p_mle, dtype=np.float64)
    if not (counts.shape == p_null.shape == p_mle.shape):
        raise BadParams("counts and probability vectors must have equal length")
    if counts.size and counts.min() < 0:
        raise BadParams("counts must be nonnegative")
    check = set(int(k) for k in checkmark_set)
    if any(k < 0 or k >= counts.size for k in check):
        raise BadParams(f"checkmark indices out of range [0, {counts.size})")
    d_check = 0.0
    d_cross = 0.0
    for k in range(counts.size):
        if counts[k] == 0:
            continue
        if p_null[k] == 0.0:
            raise BadBins(f"bin {k} observed {counts[k]} times but p_null is 0")
        if p_mle[k] == 0.0:
            raise ValueError(f"bin {k} observed {counts[k]} times but p_mle is 0")
        term = 2.0 * counts[k] * math.log(p_mle[k] / p_null[k])
        if k in check:
            d_check += term
        else:
            d_cross += term
    return d_check + d_cross, d_check, d_cross


@lru_cache(maxsize=128)
def chi2_quantile(dof: int, alpha: float) -> float:
    """Upper-alpha quantile of chi-square, by bisection on the
    regularized incomplete gamma function, accurate to 1e-8."""
    if dof < 1:
        raise BadParams(f"dof must be >= 1, got {dof}")
    if not (0.0 < alpha < 1.0):
        raise BadAlpha(f"alpha must lie in (0, 1), got {alpha!r}")
    target = 1.0 - alpha

    def cdf(q):
        return gammainc(dof / 2.0, q / 2.0)

    lo, hi = 0.0, float(max(dof, 1))
    while cdf(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise BadParams("chi-square quantile search did not bracket")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi2_test(d: float, dof: int = 1, alpha: float = 0.05) -> str:
    """Reject the null iff d exceeds the upper-alpha chi-square quantile.

    dof defaults to 1 (one fitted parameter); pass dof = N for the
    per-reading chi-square convention.
    """
    if d < 0:
        raise BadParams(f"statistic must be >= 0, got {d!r}")
    return "reject" if d > chi2_quantile(dof, alpha) else "retain"


def detect(
    data: Dataset,
    ow,
    cov: NoiseCovariance,
    sigma: float,
    x_alt: float,
    alpha: float = 0.05,
    dof: int = 1,
) -> DetectionReport:
    """Run the likelihood-ratio test on one dataset and fill a report."""
    d = lr_statistic(data, ow, cov, sigma)
    noncentrality, ndof_form = expected_d(x_alt, ow, cov, sigma)
    return DetectionReport(
        d_statistic=d,
        noncentrality=noncentrality,
        expected_d_alt_ndof=ndof_form,
        decision=chi2_test(d, dof, alpha),
        alpha=alpha,
        dof=dof,
    )
