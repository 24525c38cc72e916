"""Fisher-information accounting for a joint system-meter model.

The system A couples to a finite-dimensional meter B through
U(x) = exp(-ixH). Measuring A in a basis leaves Kraus-conditioned meter
states; this module computes the joint QFI, the per-outcome conditional
QFI, the classical information in the outcome distribution, and the
inequality chain tying them together, plus the Chernoff tail bound for
post-selection counts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BadParams, NegligibleProbability, NotNormalized
from .quantum import Observable, OrthonormalBasis, PureState, _complex_matrix

P_FLOOR = 1e-12
FD_STEP = 1e-5

_HERM_TOL = 1e-12
_logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class JointModel:
    """Joint A⊗B model: generator H, product initial state, A-side basis."""

    hamiltonian: np.ndarray
    initial_a: PureState
    initial_b: PureState
    basis_a: OrthonormalBasis
    x: float

    def __post_init__(self):
        h = _complex_matrix(self.hamiltonian)
        dev = np.abs(h - h.conj().T).max()
        if dev > _HERM_TOL:
            raise BadParams(f"H is not Hermitian: max deviation {dev:.3e}")
        d_a, d_b = self.initial_a.dim, self.initial_b.dim
        if h.shape[0] != d_a * d_b:
            raise BadParams(
                f"H acts on dimension {h.shape[0]}, expected {d_a}*{d_b}"
            )
        if self.basis_a.dim != d_a:
            raise BadParams("A-side basis dimension mismatch")
        object.__setattr__(self, "hamiltonian", h)

    @property
    def dim_a(self) -> int:
        return self.initial_a.dim

    @property
    def dim_b(self) -> int:
        return self.initial_b.dim


@dataclass(frozen=True, eq=False)
class QfiReport:
    """Information budget of one model instance."""

    i_ab: float
    p_f: np.ndarray
    i_cond: np.ndarray
    i_classical: float
    i_rho: float

    def to_dict(self) -> dict:
        return {
            "i_ab": float(self.i_ab),
            "p_f": [float(p) for p in self.p_f],
            "i_cond": [float(v) for v in self.i_cond],
            "i_classical": float(self.i_classical),
            "i_rho": float(self.i_rho),
        }


def _joint_initial(model: JointModel) -> np.ndarray:
    return np.kron(model.initial_a.amplitudes, model.initial_b.amplitudes)


def _unitary(model: JointModel) -> np.ndarray:
    # scipy's expm is scaling-and-squaring with backward error near
    # machine precision, well inside the 1e-12 budget.
    return scipy.linalg.expm(-1j * model.x * model.hamiltonian)


def evolve_joint(model: JointModel):
    """(state, derivative) of |ψ(x)⟩ = exp(−ixH)|i,φ⟩; derivative = −iH|ψ⟩."""
    psi = _unitary(model) @ _joint_initial(model)
    dpsi = -1j * (model.hamiltonian @ psi)
    return PureState(psi), dpsi


def qfi_pure(state, derivative) -> float:
    """Pure-state QFI 4(⟨∂ψ|∂ψ⟩ − |⟨∂ψ|ψ⟩|²)."""
    psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalized(f"state norm is {norm!r}")
    dpsi = np.asarray(derivative, dtype=np.complex128)
    overlap = np.vdot(dpsi, psi)
    return float(4.0 * (np.real(np.vdot(dpsi, dpsi)) - abs(overlap) ** 2))


def kraus_family(model: JointModel):
    """Per-outcome (M_f, dM_f, p_f): meter-side Kraus operators and
    outcome probabilities. Σ M†M = identity on B."""
    d_a, d_b = model.dim_a, model.dim_b
    u = _unitary(model)
    g = -1j * (model.hamiltonian @ u)
    u4 = u.reshape(d_a, d_b, d_a, d_b)
    g4 = g.reshape(d_a, d_b, d_a, d_b)
    i_a = model.initial_a.amplitudes
    phi = model.initial_b.amplitudes
    out = []
    for final in model.basis_a.vectors:
        f = final.amplitudes.conj()
        m = np.einsum("a,abcd,c->bd", f, u4, i_a)
        dm = np.einsum("a,abcd,c->bd", f, g4, i_a)
        p = float(np.real(np.vdot(phi, m.conj().T @ m @ phi)))
        out.append((m, dm, p))
    return out


def postselected_qfi(m, dm, phi: PureState):
    """(i_f, p_f) of the normalized conditional meter state M|φ⟩/√p.

    i_f = 4(⟨φ|dM†dM|φ⟩/p − |⟨φ|dM†M|φ⟩|²/p²).
    """
    m = np.asarray(m, dtype=np.complex128)
    dm = np.asarray(dm, dtype=np.complex128)
    v = phi.amplitudes
    p = float(np.real(np.vdot(m @ v, m @ v)))
    if p <= P_FLOOR:
        raise NegligibleProbability(f"outcome probability {p:.3e} <= {P_FLOOR}")
    dmv = dm @ v
    mv = m @ v
    term1 = float(np.real(np.vdot(dmv, dmv))) / p
    term2 = abs(np.vdot(dmv, mv)) ** 2 / p**2
    return 4.0 * (term1 - term2), p


def fi_decomposition(model: JointModel) -> QfiReport:
    """Full information budget with the chain p_✓I_✓ ≤ I_ρ ≤ I_AB.

    Outcomes with probability at or below the floor are excluded from
    the sums; their total mass is logged.
    """
    state, dpsi = evolve_joint(model)
    i_ab = qfi_pure(state, dpsi)
    family = kraus_family(model)
    phi = model.initial_b.amplitudes
    d = len(family)
    p_f = np.empty(d)
    i_cond = np.zeros(d)
    i_classical = 0.0
    excluded_mass = 0.0
    for k, (m, dm, p) in enumerate(family):
        p_f[k] = p
        if p <= P_FLOOR:
            excluded_mass += max(p, 0.0)
            continue
        i_cond[k], _ = postselected_qfi(m, dm, PureState(phi))
        mv = m @ phi
        dmv = dm @ phi
        dp = 2.0 * float(np.real(np.vdot(mv, dmv)))
        i_classical += dp**2 / p
    if excluded_mass > 0.0:
        _logger.warning(
            "excluded %.3e probability mass below the p-floor", excluded_mass
        )
    i_rho = i_classical + float(np.sum(p_f * i_cond))
    for k in range(d):
        if p_f[k] * i_cond[k] > i_rho + 1e-9:
            raise ArithmeticError(
                f"outcome {k + 1}: p*I_cond exceeds I_rho beyond tolerance"
            )
    if i_rho > i_ab + 1e-9:
        raise ArithmeticError("I_rho exceeds I_AB beyond tolerance")
    return QfiReport(
        i_ab=i_ab, p_f=p_f, i_cond=i_cond, i_classical=i_classical, i_rho=i_rho
    )


def chernoff_bound(n: int, p_check: float, delta: float) -> float:
    """Tail bound exp(−n·p·δ²/(2+δ)) on the post-selection count
    exceeding (1+δ) times its mean."""
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    if not (0.0 < p_check <= 1.0):
        raise BadParams(f"p_check must lie in (0, 1], got {p_check!r}")
    if delta < 0:
        raise BadParams(f"delta must be >= 0, got {delta!r}")
    return math.exp(-n * p_check * delta**2 / (2.0 + delta))
