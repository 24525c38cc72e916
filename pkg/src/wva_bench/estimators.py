"""Estimators for the coupling strength x and their analytic variances.

Three estimators act on one dataset of (outcome, reading) pairs with a
per-trial weak-value vector ow: the full generalized-least-squares MLE,
the simplified MLE that ignores the noise covariance, and the WVA
estimator that keeps only the post-selected outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import (
    BadParams,
    BadVariance,
    NoPostselectedEvents,
    ZeroInformation,
)
from .noise import NoiseCovariance
from .quantum import (
    Observable,
    OrthonormalBasis,
    PureState,
    expected_O_squared,
    outcome_probs,
    weak_value,
)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Paired ancilla outcomes (1-based indices) and meter readings."""

    outcomes: np.ndarray
    readings: np.ndarray

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=np.int64)
        readings = np.asarray(self.readings, dtype=np.float64)
        if outcomes.ndim != 1 or readings.ndim != 1:
            raise BadParams("outcomes and readings must be vectors")
        if outcomes.shape != readings.shape:
            raise BadParams(
                f"length mismatch: {outcomes.shape[0]} outcomes, "
                f"{readings.shape[0]} readings"
            )
        if outcomes.size and outcomes.min() < 1:
            raise BadParams("outcome indices are 1-based and must be >= 1")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "readings", readings)

    @property
    def n(self) -> int:
        return self.readings.shape[0]


@dataclass(frozen=True)
class EstimateReport:
    """One estimate with its analytic variance.

    exact_variance is populated for the WVA estimator only: its
    analytic_variance field is the leading term sigma^2/(N_check ow^2),
    while exact_variance is the full conditional quadratic form.
    """

    estimate: float
    analytic_variance: float
    estimator: str
    n_used: int
    exact_variance: float | None = None

    def __post_init__(self):
        if not (self.analytic_variance > 0):
            raise BadVariance(
                f"analytic variance must be positive, got {self.analytic_variance!r}"
            )


def _check_weights(data: Dataset, ow: np.ndarray) -> np.ndarray:
    ow = np.asarray(ow, dtype=np.float64)
    if ow.shape != (data.n,):
        raise BadParams(f"weak-value vector length {ow.shape} != data length {data.n}")
    if not np.any(ow != 0.0):
        raise ZeroInformation("all weak-value weights are zero")
    return ow


def mle(data: Dataset, ow, cov: NoiseCovariance, sigma: float) -> EstimateReport:
    """Generalized least squares: x̂ = owᵀQr / owᵀQow with Q = (K+σ²1)⁻¹."""
    ow = _check_weights(data, ow)
    if sigma <= 0:
        raise BadParams(f"sigma must be positive, got {sigma}")
    if cov.n != data.n:
        raise BadParams(f"covariance size {cov.n} != data length {data.n}")
    chol = cov.shifted_cholesky(sigma)
    q_ow = cho_solve(chol, ow)
    denominator = float(ow @ q_ow)
    estimate = float(q_ow @ data.readings) / denominator
    return EstimateReport(
        estimate=estimate,
        analytic_variance=1.0 / denominator,
        estimator="mle",
        n_used=data.n,
    )


def smle_variance(ow, cov: NoiseCovariance, sigma: float) -> float:
    """Exact variance owᵀ(K+σ²1)ow/‖ow‖⁴ of the simplified estimator."""
    ow = np.asarray(ow, dtype=np.float64)
    norm2 = float(ow @ ow)
    if norm2 == 0.0:
        raise ZeroInformation("all weak-value weights are zero")
    return (sigma**2 * norm2 + float(ow @ cov.matrix @ ow)) / norm2**2


def smle(data: Dataset, ow, cov: NoiseCovariance, sigma: float) -> EstimateReport:
    """Simplified MLE x̂ = owᵀr/‖ow‖² (optimal only for white noise)."""
    ow = _check_weights(data, ow)
    norm2 = float(ow @ ow)
    return EstimateReport(
        estimate=float(ow @ data.readings) / norm2,
        analytic_variance=smle_variance(ow, cov, sigma),
        estimator="smle",
        n_used=data.n,
    )


def wva(
    data: Dataset,
    check_outcome: int,
    ow_check: float,
    sigma: float,
    cov: NoiseCovariance,
) -> EstimateReport:
    """Post-selected estimator: average retained readings over N_✓·ow_✓.

    analytic_variance is the leading term σ²/(N_✓·ow_✓²); the exact
    conditional variance 𝟙ᵀ(K+σ²1)𝟙/(N_✓·ow_✓)² over the retained
    indicator 𝟙 is reported as exact_variance.
    """
    if ow_check == 0.0:
        raise ZeroInformation("post-selected weak value is zero")
    mask = data.outcomes == check_outcome
    n_check = int(mask.sum())
    if n_check == 0:
        raise NoPostselectedEvents(
            f"no trial landed in outcome {check_outcome} out of {data.n}"
        )
    estimate = float(data.readings[mask].sum()) / (n_check * ow_check)
    leading = sigma**2 / (n_check * ow_check**2)
    ones_k_ones = float(cov.matrix[np.ix_(mask, mask)].sum())
    exact = (n_check * sigma**2 + ones_k_ones) / (n_check * ow_check) ** 2
    return EstimateReport(
        estimate=estimate,
        analytic_variance=leading,
        estimator="wva",
        n_used=n_check,
        exact_variance=exact,
    )


def snr(x: float, variance: float) -> float:
    """Signal-to-noise ratio x/√variance."""
    if not (variance > 0):
        raise BadVariance(f"variance must be positive, got {variance!r}")
    return x / np.sqrt(variance)


def total_variance_prediction(
    n: int,
    initial: PureState,
    observable: Observable,
    basis: OrthonormalBasis,
    sigma: float,
) -> float:
    """Predicted unconditional estimator variance over outcome strings.

    Law-of-total-variance expansion: σ²/(n·⟨O²⟩) plus the fluctuation
    term σ²·Σ p_k(1−p_k)O_w⁴/(n²·⟨O²⟩³). Zero-probability outcomes
    (state orthogonal to a basis vector) carry no weak value and drop
    out of the sum.
    """
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    if sigma <= 0:
        raise BadParams(f"sigma must be positive, got {sigma}")
    probs = outcome_probs(initial, basis)
    o2 = expected_O_squared(initial, observable)
    fluctuation = 0.0
    for k, final in enumerate(basis.vectors):
        if probs[k] == 0.0:
            continue
        wv = weak_value(observable, initial, final)
        fluctuation += probs[k] * (1.0 - probs[k]) * wv**4
    return sigma**2 / (n * o2) + sigma**2 * fluctuation / (n**2 * o2**3)
