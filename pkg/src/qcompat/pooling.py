"""Measurement-based pooling of two compatible state assignments.

Starting from a maximally mixed prior, a four-outcome positive-operator
measurement {E_00, E_01, E_10, E_11} is built so that Alice conditioning on
her bit reproduces rho_A, Bob reproduces rho_B, and the joint outcome
(0, 0) is as likely as possible.  The (0, 0) block is c * R with R the BFM
maximizer, the joint assignment is rho_AB = R / Tr[R], and

    p00 = Tr[E_00] / D = c * K_BFM(rho_A, rho_B) / D.

The constant c is the largest value keeping E_11 = I - c (rho_A + rho_B - R)
positive.  When the pair bound 1 - D(rho_A, rho_B) is attained it equals the
closed form 1 / c = max eigenvalue of (rho_A + rho_B + |rho_A - rho_B|) / 2,
which is reported alongside as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import compat, qmat
from .qmat import DensityMatrix


class IncompatibleStatesError(ValueError):
    """Pooling requested for states with disjoint supports (K = 0)."""


@dataclass
class PoolingResult:
    joint_state: DensityMatrix
    c: float
    r_operator: np.ndarray
    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray
    p00: float
    k_value: float
    state_a: DensityMatrix
    state_b: DensityMatrix
    c_trace_bound: float
    support_overlap: float
    disjoint_support_ok: bool

    @property
    def blocks(self):
        return (self.e00, self.e01, self.e10, self.e11)


@dataclass(frozen=True)
class RMaximalityReport:
    trials: int
    violations: int
    min_feasibility_breach: float
    max_trace_gain: float


def _support_basis(mat, atol=1e-7):
    vals, vecs = np.linalg.eigh(qmat.hermitian_part(mat))
    return vecs[:, vals > atol]


def pool_measurement(a, b, tol: float = 1e-8,
                     rank_tol: float = qmat.RANK_TOL) -> PoolingResult:
    """Probability-maximizing pooling measurement and joint state for a pair."""
    a = a if isinstance(a, DensityMatrix) else DensityMatrix(a)
    b = b if isinstance(b, DensityMatrix) else DensityMatrix(b)
    pair = compat.StateSet((a, b))
    if not compat.is_compatible(pair, rank_tol):
        raise IncompatibleStatesError(
            "states have disjoint supports; no joint assignment exists"
        )
    report = compat.k_bfm(pair, tol)
    k_value = report.value
    if k_value <= 1e-10:
        raise IncompatibleStatesError(
            f"compatibility measure is numerically zero ({k_value:.2e})"
        )
    am, bm = a.matrix, b.matrix
    dim = a.dim
    r_op = qmat.hermitian_part(report.primal_witness)

    one_over_c = float(np.linalg.eigvalsh(am + bm - r_op)[-1])
    c = 1.0 / one_over_c
    c_trace_bound = 2.0 / float(
        np.linalg.eigvalsh(am + bm + qmat.matrix_abs(am - bm))[-1]
    )

    eye = np.eye(dim, dtype=complex)
    e00 = c * r_op
    e01 = c * (am - r_op)
    e10 = c * (bm - r_op)
    e11 = eye - c * (am + bm - r_op)
    joint = DensityMatrix(r_op / np.trace(r_op).real)
    p00 = float(np.trace(e00).real) / dim

    # at the exact optimum the leftover Alice/Bob slacks cannot share a
    # support direction (any shared direction could be moved into E00)
    va = _support_basis(e01)
    vb = _support_basis(e10)
    if va.shape[1] == 0 or vb.shape[1] == 0:
        overlap = 0.0
    else:
        overlap = float(np.linalg.svd(va.conj().T @ vb, compute_uv=False)[0])
    return PoolingResult(
        joint_state=joint,
        c=c,
        r_operator=r_op,
        e00=e00, e01=e01, e10=e10, e11=e11,
        p00=p00,
        k_value=k_value,
        state_a=a,
        state_b=b,
        c_trace_bound=c_trace_bound,
        support_overlap=overlap,
        disjoint_support_ok=overlap < 1.0 - 1e-6,
    )


def verify_r_maximality(result: PoolingResult, trials: int = 100,
                        rng_seed: int = 0) -> RMaximalityReport:
    """Probe local maximality of Tr[R] under random upward PSD perturbations.

    Each trial proposes R' = R + eps * G with G a random PSD direction of
    unit trace.  Since Tr[R'] > Tr[R], a correct maximizer forces R' to
    break R' <= rho_A or R' <= rho_B; a trial counts as a violation when
    the perturbed operator stays feasible while gaining trace.
    """
    rng = np.random.default_rng(rng_seed)
    am = result.state_a.matrix
    bm = result.state_b.matrix
    dim = am.shape[0]
    eps = 1e-4
    violations = 0
    min_breach = np.inf
    max_gain = 0.0
    for _ in range(trials):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        g = g @ g.conj().T
        g = g / np.trace(g).real
        perturbed = result.r_operator + eps * g
        gain = float(np.trace(perturbed - result.r_operator).real)
        breach = min(
            float(np.linalg.eigvalsh(am - perturbed)[0]),
            float(np.linalg.eigvalsh(bm - perturbed)[0]),
        )
        min_breach = min(min_breach, breach)
        max_gain = max(max_gain, gain)
        feasible = breach >= -1e-9
        if feasible and gain > 1e-7:
            violations += 1
    return RMaximalityReport(trials, violations, float(min_breach), max_gain)
