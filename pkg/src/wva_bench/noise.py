"""Technical-noise covariances: builders, correlated sampling, calibration.

Readings pick up an additive Gaussian noise vector with covariance K on
top of the meter spread. K may be singular (the constant kind is rank
one), so sampling factorizes by eigendecomposition with negative
eigenvalues clipped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, NotPSD, TooFewSamples

_SYM_TOL = 1e-12
_EIG_FLOOR = -1e-10

KINDS = ("white", "constant", "ar1", "custom")


@dataclass(eq=False)
class NoiseCovariance:
    """N×N symmetric PSD covariance with a builder tag."""

    matrix: np.ndarray
    kind: str
    _factor: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _shifted: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise BadParams(f"covariance must be square, got shape {arr.shape}")
        if self.kind not in KINDS:
            raise BadParams(f"unknown covariance kind {self.kind!r}")
        dev = np.abs(arr - arr.T).max() if arr.size else 0.0
        if dev > _SYM_TOL:
            raise BadParams(f"covariance is not symmetric: max deviation {dev:.3e}")
        min_eig = float(np.linalg.eigvalsh(arr).min())
        if min_eig < _EIG_FLOOR:
            raise NotPSD(f"smallest eigenvalue {min_eig:.3e} below {_EIG_FLOOR}")
        arr.setflags(write=False)
        self.matrix = arr

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def factor(self) -> np.ndarray:
        """Symmetric square root with negative eigenvalues clipped to 0.

        Cached after first use; recomputation is idempotent so the cache
        is safe under concurrent access.
        """
        if self._factor is None:
            eigvals, eigvecs = np.linalg.eigh(self.matrix)
            root = np.sqrt(np.clip(eigvals, 0.0, None))
            self._factor = eigvecs * root
        return self._factor

    def shifted_cholesky(self, sigma: float):
        """Cholesky factor of K + sigma^2*I (positive definite for sigma > 0)."""
        key = float(sigma)
        if key not in self._shifted:
            import scipy.linalg

            shifted = self.matrix + key**2 * np.eye(self.n)
            self._shifted[key] = scipy.linalg.cho_factor(shifted, lower=True)
        return self._shifted[key]


def build_covariance(kind: str, params, n: int) -> NoiseCovariance:
    """Build an N×N covariance of one of the supported kinds.

    white: (variance,) -> variance*I, constant: (eta2,) -> eta2*ones,
    ar1: (variance, rho) -> variance*rho^|j-k|, custom: row-major matrix
    entries (n*n values).
    """
    if n < 1:
        raise BadParams(f"covariance size must be >= 1, got {n}")
    params = tuple(float(p) for p in np.atleast_1d(np.asarray(params, dtype=np.float64)))
    if kind == "white":
        if len(params) != 1:
            raise BadParams("white covariance takes exactly one parameter (variance)")
        (variance,) = params
        if variance < 0:
            raise BadParams(f"variance must be nonnegative, got {variance}")
        matrix = variance * np.eye(n)
    elif kind == "constant":
        if len(params) != 1:
            raise BadParams("constant covariance takes exactly one parameter (eta_bar^2)")
        (eta2,) = params
        if eta2 < 0:
            raise BadParams(f"eta_bar^2 must be nonnegative, got {eta2}")
        matrix = eta2 * np.ones((n, n))
    elif kind == "ar1":
        if len(params) != 2:
            raise BadParams("ar1 covariance takes (variance, rho)")
        variance, rho = params
        if variance < 0:
            raise BadParams(f"variance must be nonnegative, got {variance}")
        if not abs(rho) < 1:
            raise BadParams(f"ar1 correlation must satisfy |rho| < 1, got {rho}")
        idx = np.arange(n)
        matrix = variance * rho ** np.abs(idx[:, None] - idx[None, :])
    elif kind == "custom":
        if len(params) != n * n:
            raise BadParams(
                f"custom covariance needs {n * n} row-major entries, got {len(params)}"
            )
        matrix = np.array(params, dtype=np.float64).reshape(n, n)
    else:
        raise BadParams(f"unknown covariance kind {kind!r}")
    return NoiseCovariance(matrix, kind)


def sample_noise(cov: NoiseCovariance, rng: np.random.Generator, size: int | None = None):
    """Draw zero-mean Gaussian noise with covariance cov.

    Returns a length-N vector, or a (size, N) array when size is given.
    """
    factor = cov.factor()
    if size is None:
        return factor @ rng.standard_normal(cov.n)
    return rng.standard_normal((size, cov.n)) @ factor.T


def sample_covariance_estimate(noise_samples) -> NoiseCovariance:
    """Sample covariance Σ η ηᵀ/(M−1) of zero-mean calibration vectors.

    Entries are accumulated with correctly rounded summation, so the
    estimate is exactly invariant under reordering of the sample list.
    """
    samples = np.atleast_2d(np.asarray(noise_samples, dtype=np.float64))
    m, n = samples.shape
    if m < 2:
        raise TooFewSamples(f"need at least 2 samples, got {m}")
    est = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            s = math.fsum((samples[:, i] * samples[:, j]).tolist()) / (m - 1)
            est[i, j] = s
            est[j, i] = s
    return NoiseCovariance(est, "custom")
