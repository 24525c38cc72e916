"""Finite-dimensional states, observables, weak values, and joint sampling.

The measurement model is first-order: an ancilla outcome f occurs with
probability |<f|i>|^2 and the meter reading is Gaussian with mean
x * O_w(f) and standard deviation sigma, where O_w(f) is the (real)
weak value of the observable between |i> and |f>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, ComplexWeakValue, DegenerateOverlap, NotNormalized

OVERLAP_FLOOR = 1e-10
WEAK_REGIME_LIMIT = 0.1

_HERM_TOL = 1e-12
_NORM_TOL = 1e-12
_BASIS_TOL = 1e-10
_IMAG_RATIO_TOL = 1e-8
# Absolute floor in the imaginary-part ratio so rounding-level residues on
# near-zero weak values do not trip the realness check.
_IMAG_ABS_FLOOR = 1e-6


def _complex_matrix(m) -> np.ndarray:
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise BadParams(f"expected a square matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _complex_vector(v) -> np.ndarray:
    arr = np.array(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise BadParams(f"expected a vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix on the system, dimension >= 2."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _complex_matrix(self.matrix))
        if self.matrix.shape[0] < 2:
            raise BadParams("observable dimension must be at least 2")
        dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if dev > _HERM_TOL:
            raise BadParams(f"matrix is not Hermitian: max deviation {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def max_abs_eigenvalue(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.matrix)).max())


@dataclass(frozen=True, eq=False)
class PureState:
    """Complex unit vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _complex_vector(self.amplitudes))
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > _NORM_TOL:
            raise NotNormalized(f"state norm is {norm!r}, expected 1 within {_NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Complete orthonormal measurement basis: d states of dimension d."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(self.vectors)
        if not vecs or not all(isinstance(v, PureState) for v in vecs):
            raise BadParams("basis must be a sequence of PureState values")
        d = vecs[0].dim
        if len(vecs) != d or any(v.dim != d for v in vecs):
            raise BadParams("basis must contain exactly d states of dimension d")
        stack = np.stack([v.amplitudes for v in vecs])
        gram = stack @ stack.conj().T
        dev = np.abs(gram - np.eye(d)).max()
        if dev > _BASIS_TOL:
            raise BadParams(f"basis is not orthonormal: max Gram deviation {dev:.3e}")
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def stack(self) -> np.ndarray:
        """Basis as a d×d array, row k = amplitudes of basis state k."""
        out = np.stack([v.amplitudes for v in self.vectors])
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class MeterSpec:
    """Gaussian meter profile; sigma is the reading standard deviation."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise BadParams(f"meter sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True, eq=False)
class CouplingConfig:
    """One measurement arrangement: observable, states, meter, and coupling x.

    The weak-regime ratio x_true*max|eig(O)|/sigma is recorded on
    construction; the first-order model is advisory-only outside
    ratio <= 0.1 (warning flag, not an error).
    """

    observable: Observable
    initial_state: PureState
    basis: OrthonormalBasis
    meter: MeterSpec
    x_true: float
    weak_regime_ratio: float = field(init=False)
    weak_regime_warning: bool = field(init=False)

    def __post_init__(self):
        d = self.observable.dim
        if self.initial_state.dim != d or self.basis.dim != d:
            raise BadParams(
                f"dimension mismatch: observable {d}, state {self.initial_state.dim}, "
                f"basis {self.basis.dim}"
            )
        ratio = abs(self.x_true) * self.observable.max_abs_eigenvalue() / self.meter.sigma
        object.__setattr__(self, "weak_regime_ratio", ratio)
        object.__setattr__(self, "weak_regime_warning", ratio > WEAK_REGIME_LIMIT)

    @property
    def dim(self) -> int:
        return self.observable.dim


def weak_value(observable: Observable, initial: PureState, final: PureState) -> float:
    """Real weak value Re[<f|O|i>/<f|i>].

    Raises DegenerateOverlap when the post-selection overlap is at or
    below the floor, and ComplexWeakValue when the imaginary part is not
    negligible relative to the real part (the model assumes real weak
    values).
    """
    if not (observable.dim == initial.dim == final.dim):
        raise BadParams("dimension mismatch between observable and states")
    overlap = np.vdot(final.amplitudes, initial.amplitudes)
    if abs(overlap) <= OVERLAP_FLOOR:
        raise DegenerateOverlap(
            f"|<f|i>| = {abs(overlap):.3e} is at or below the floor {OVERLAP_FLOOR}"
        )
    wv = np.vdot(final.amplitudes, observable.matrix @ initial.amplitudes) / overlap
    if abs(wv.imag) / (abs(wv.real) + _IMAG_ABS_FLOOR) > _IMAG_RATIO_TOL:
        raise ComplexWeakValue(
            f"weak value {wv!r} has a non-negligible imaginary part"
        )
    return float(wv.real)


def weak_value_vector(
    observable: Observable, initial: PureState, basis: OrthonormalBasis
) -> np.ndarray:
    """Weak values for every basis outcome, as a real vector of length d.

    Outcome indices in error messages are 1-based.
    """
    out = np.empty(basis.dim)
    for k, final in enumerate(basis.vectors):
        try:
            out[k] = weak_value(observable, initial, final)
        except (DegenerateOverlap, ComplexWeakValue) as exc:
            raise type(exc)(f"outcome {k + 1}: {exc}") from exc
    return out


def outcome_probs(initial: PureState, basis: OrthonormalBasis) -> np.ndarray:
    """Outcome probabilities |<f_k|i>|^2; sums to 1 for a complete basis."""
    if initial.dim != basis.dim:
        raise BadParams("dimension mismatch between state and basis")
    amps = basis.stack() @ initial.amplitudes.conj()
    return np.abs(amps) ** 2


def expected_O_squared(initial: PureState, observable: Observable) -> float:
    """<i|O^2|i>, the per-draw mean of the squared weak value."""
    if initial.dim != observable.dim:
        raise BadParams("dimension mismatch between state and observable")
    v = observable.matrix @ initial.amplitudes
    return float(np.real(np.vdot(v, v)))


class JointSampler:
    """Prepared sampler for the first-order joint likelihood.

    Computes outcome probabilities and weak values once so repeated
    sampling (the Monte Carlo harness) does not redo the linear algebra.
    Outcomes with exactly zero overlap are unreachable and carry no weak
    value; outcomes with overlap in (0, floor] make the config invalid.
    """

    def __init__(self, config: CouplingConfig):
        self.config = config
        probs = outcome_probs(config.initial_state, config.basis)
        wv = np.zeros(config.dim)
        for k, final in enumerate(config.basis.vectors):
            overlap = np.vdot(final.amplitudes, config.initial_state.amplitudes)
            if abs(overlap) == 0.0:
                probs[k] = 0.0
                continue
            try:
                wv[k] = weak_value(config.observable, config.initial_state, final)
            except (DegenerateOverlap, ComplexWeakValue) as exc:
                raise type(exc)(f"outcome {k + 1}: {exc}") from exc
        total = probs.sum()
        self.probs = probs / total
        self.weak_values = wv
        self.sigma = config.meter.sigma
        self.x_true = config.x_true

    def sample(self, n: int, rng: np.random.Generator, x: float | None = None):
        """Draw n (outcome, reading) pairs; outcomes are 1-based.

        Draw order is fixed (outcomes first, then meter noise) so results
        are deterministic given the stream state.
        """
        if n < 1:
            raise BadParams(f"sample count must be >= 1, got {n}")
        x_eff = self.x_true if x is None else x
        idx = rng.choice(self.config.dim, size=n, p=self.probs)
        q = x_eff * self.weak_values[idx] + self.sigma * rng.standard_normal(n)
        return idx + 1, q


def sample_joint(config: CouplingConfig, n: int, rng: np.random.Generator):
    """Sample n trials of (ancilla outcome, meter reading) from the model."""
    return JointSampler(config).sample(n, rng)
