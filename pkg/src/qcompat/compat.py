"""Compatibility measures for sets of state assignments.

Three criteria, each quantified by a semidefinite program over the set
P = {rho_1, ..., rho_k}:

* BFM   -- largest Tr[R] over PSD R with R <= rho_i for every i; positive
           exactly when the supports share a common direction.
* PP    -- largest Tr[N] over Hermitian (not necessarily PSD) N with
           N <= rho_i; equals one minus the least achievable error when a
           measurement tries to exclude one preparation.
* ES    -- largest lam >= 0 with lam * sum_j rho_j <= rho_i for every i;
           positive exactly when all supports coincide.

Every measure returns a :class:`CompatibilityReport` carrying the optimal
witness, a dual certificate (feasible for the dual program, hence an
independently checkable upper bound), and the duality gap.  Closed-form
oracles for special cases (commuting sets, pairs, eigenvalue form of ES,
Bloch-ball geometry for qubit pairs) live here too; they are validation
routes and are tested against the SDPs, never the reverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat, sdp
from .qmat import DensityMatrix, DimensionMismatchError


class NotCommutingError(ValueError):
    """Commuting-case oracle called on a non-commuting set."""


class SolverFailureError(RuntimeError):
    """The SDP solve did not reach certificate accuracy."""


# ---------------------------------------------------------------------------
# State sets and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateSet:
    """An ordered set of k >= 2 equal-dimension density matrices."""

    states: tuple
    labels: tuple = ()

    def __post_init__(self):
        states = tuple(
            s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.states
        )
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise ValueError("a StateSet needs at least two states")
        dim = states[0].dim
        for s in states:
            if s.dim != dim:
                raise DimensionMismatchError(
                    f"states of dimension {s.dim} and {dim} in one set"
                )
        labels = tuple(self.labels) or tuple(f"state-{i}" for i in range(len(states)))
        if len(labels) != len(states):
            raise ValueError("labels do not match states")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def matrices(self) -> list[np.ndarray]:
        return [s.matrix for s in self.states]


@dataclass
class CompatibilityReport:
    criterion: str
    value: float
    raw_value: float
    primal_witness: np.ndarray
    dual_certificate: list
    gap: float
    dual_alphas: np.ndarray | None = None
    upper_bound_trace_distance: float | None = None
    bound_attained: bool | None = None
    solution: sdp.SdpSolution | None = field(default=None, repr=False)


@dataclass(frozen=True)
class PairBound:
    """1 - D(a, b) plus whether the candidate (a + b - |a - b|)/2 attains it."""

    value: float
    attained: bool
    candidate: np.ndarray


# ---------------------------------------------------------------------------
# SDP instances
# ---------------------------------------------------------------------------

def build_bfm_problem(mats) -> sdp.SdpProblem:
    """maximize Tr[R] s.t. R <= rho_i, R >= 0."""
    dim = mats[0].shape[0]
    eye = np.eye(dim, dtype=complex)
    terms = [sdp.ConjugationTerm(0, j, 1.0, eye) for j in range(len(mats))]
    return sdp.SdpProblem(
        var_dims=(dim,), con_dims=(dim,) * len(mats),
        objective=(eye,), bound=tuple(mats), terms=terms, name="bfm",
    )


def build_pp_split_problem(mats) -> sdp.SdpProblem:
    """maximize Tr[N] s.t. N <= rho_i with free Hermitian N = N_plus - N_minus.

    The two PSD variable blocks are flagged as a free pair, so the
    mechanical dual exposes the measurement normalization sum M_i = I as a
    paired constraint.
    """
    dim = mats[0].shape[0]
    eye = np.eye(dim, dtype=complex)
    terms = []
    for j in range(len(mats)):
        terms.append(sdp.ConjugationTerm(0, j, 1.0, eye))
        terms.append(sdp.ConjugationTerm(1, j, -1.0, eye))
    return sdp.SdpProblem(
        var_dims=(dim, dim), con_dims=(dim,) * len(mats),
        objective=(eye, -eye), bound=tuple(mats), terms=terms,
        free_variable_pairs=((0, 1),), name="pp-split",
    )


def build_pp_shifted_problem(mats):
    """Equivalent single-block PP formulation: P := N + (D+1) I >= 0.

    Any N with Tr[N] >= 0 and N <= rho_i has eigenvalues in [-(D-1), 1], so
    constraining N >= -(D+1) I does not change the optimum while giving the
    problem a strictly feasible interior on both sides (the split-variable
    form has an unbounded optimal face that path-following handles badly).
    Returns (problem, offset) with K_PP = optimum - offset.
    """
    dim = mats[0].shape[0]
    eye = np.eye(dim, dtype=complex)
    shift = float(dim + 1)
    terms = [sdp.ConjugationTerm(0, j, 1.0, eye) for j in range(len(mats))]
    problem = sdp.SdpProblem(
        var_dims=(dim,), con_dims=(dim,) * len(mats),
        objective=(eye,), bound=tuple(m + shift * eye for m in mats),
        terms=terms, name="pp-shifted",
    )
    return problem, shift * dim


def build_es_problem(mats) -> sdp.SdpProblem:
    """maximize lam s.t. lam * S <= rho_i, lam >= 0, with S = sum_j rho_j."""
    total = sum(mats)
    terms = [sdp.DiagToMatTerm(0, j, 1.0, (total,)) for j in range(len(mats))]
    return sdp.SdpProblem(
        var_dims=(1,), con_dims=(mats[0].shape[0],) * len(mats),
        objective=(np.eye(1, dtype=complex),), bound=tuple(mats),
        terms=terms, name="es",
    )


def build_es_diagonal_form_problem(mats) -> sdp.SdpProblem:
    """ES re-encoded with one (D+1)-diagonal variable block and selectors.

    The variable carries (lam, lam_1, ..., lam_D); scalar constraints force
    lam <= lam_d and matrix constraints force diag(lam_1..lam_D) S below
    each rho_i.  Everything is expressed in the eigenbasis of S, where the
    diagonal-selector product is Hermitian as written and the rewrite is
    exact: there diag(lam) S >= lam S for lam_d >= lam, so the auxiliary
    slots cannot outrun lam.  In any other basis the Hermitian-symmetrized
    reading of the product is a strict relaxation on some instances.

    Mechanically dualizing this form produces the alpha_d scalars plus
    measurement blocks M_i with the coupled constraints sum alpha_d >= 1
    and diag(S sum M_i) >= alpha.
    """
    dim = mats[0].shape[0]
    total = sum(mats)
    s_vals, s_vecs = qmat.eig_hermitian(total)
    rotated = tuple(s_vecs.conj().T @ m @ s_vecs for m in mats)
    big = np.zeros((dim + 1, dim + 1), dtype=complex)
    big[0, 0] = 1.0
    sel_lam = np.zeros((dim + 1, dim + 1), dtype=complex)
    sel_lam[0, 0] = 1.0
    terms = []
    for d in range(1, dim + 1):
        sel_d = np.zeros((dim + 1, dim + 1), dtype=complex)
        sel_d[d, d] = 1.0
        terms.append(sdp.MatToDiagTerm(0, d - 1, 1.0, (sel_lam,)))
        terms.append(sdp.MatToDiagTerm(0, d - 1, -1.0, (sel_d,)))
    selectors = [None]
    for d in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[d, d] = s_vals[d]
        selectors.append(e)
    for i in range(len(mats)):
        terms.append(sdp.DiagToMatTerm(0, dim + i, 1.0, tuple(selectors)))
    bound = tuple(np.zeros((1, 1), dtype=complex) for _ in range(dim)) + rotated
    return sdp.SdpProblem(
        var_dims=(dim + 1,), con_dims=(1,) * dim + (dim,) * len(mats),
        objective=(big,), bound=bound, terms=terms, name="es-diagonal-form",
    )


REPORT_GAP_TOL = 1e-7


def _solved(problem, tol, max_iter=200):
    """Solve and enforce the report contract.

    An iterate that missed the requested tolerance but still certifies the
    value to the report accuracy (absolute gap and residuals within 1e-7)
    is accepted; anything worse raises.
    """
    sol = sdp.solve(problem, tol=tol, max_iter=max_iter)
    if sol.status is sdp.SolveStatus.OPTIMAL:
        return sol
    norm_b = max([float(np.linalg.norm(b)) for b in problem.bound] + [1.0])
    norm_a = max([float(np.linalg.norm(a)) for a in problem.objective] + [1.0])
    if (sol.status is sdp.SolveStatus.NUMERICAL_LIMIT
            and abs(sol.gap) <= REPORT_GAP_TOL
            and sol.primal_residual <= REPORT_GAP_TOL * (1.0 + norm_b)
            and sol.dual_residual <= REPORT_GAP_TOL * (1.0 + norm_a)):
        return sol
    raise SolverFailureError(
        f"{problem.name or 'sdp'} solve ended with status {sol.status.value} "
        f"(gap {sol.gap:.2e}, residuals {sol.primal_residual:.2e}/{sol.dual_residual:.2e})"
    )


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def k_bfm(state_set: StateSet, tol: float = 1e-8) -> CompatibilityReport:
    """BFM compatibility measure with witness and dual certificate."""
    mats = state_set.matrices()
    sol = _solved(build_bfm_problem(mats), tol)
    report = CompatibilityReport(
        criterion="BFM",
        value=max(sol.primal_value, 0.0),
        raw_value=sol.primal_value,
        primal_witness=sol.primal_blocks[0],
        dual_certificate=list(sol.dual_blocks),
        gap=sol.gap,
        solution=sol,
    )
    if state_set.k == 2:
        bound = bfm_pair_upper_bound(state_set.states[0], state_set.states[1])
        report.upper_bound_trace_distance = bound.value
        report.bound_attained = bound.attained
    return report


def k_pp(state_set: StateSet, tol: float = 1e-8) -> CompatibilityReport:
    """PP compatibility measure; dual certificate is a k-outcome measurement."""
    mats = state_set.matrices()
    problem, offset = build_pp_shifted_problem(mats)
    sol = _solved(problem, tol / (1.0 + offset))
    shift = offset / state_set.dim
    witness = sol.primal_blocks[0] - shift * np.eye(state_set.dim)
    return CompatibilityReport(
        criterion="PP",
        value=max(sol.primal_value - offset, 0.0),
        raw_value=sol.primal_value - offset,
        primal_witness=witness,
        dual_certificate=list(sol.dual_blocks),
        gap=sol.gap,
        solution=sol,
    )


def k_es(state_set: StateSet, tol: float = 1e-8) -> CompatibilityReport:
    """ES compatibility measure, solved on the support of S = sum_j rho_j.

    Directions outside supp(S) contain the support of no rho_i, so they
    constrain nothing; the compression is exact and the certificate lifts
    back with unchanged value (the dual constraint Tr[S sum M_i] >= 1 and
    objective only see supp(S)).
    """
    mats = state_set.matrices()
    total = sum(mats)
    vals, vecs = qmat.eig_hermitian(total)
    keep = vecs[:, vals > qmat.RANK_TOL * max(vals[-1], 0.0)]
    compressed = [keep.conj().T @ m @ keep for m in mats]
    sol = _solved(build_es_problem(compressed), tol)
    lam = sol.primal_value
    certificate = [keep @ m @ keep.conj().T for m in sol.dual_blocks]
    summed = sum(certificate)
    alphas = np.diag(0.5 * (total @ summed + summed @ total)).real.copy()
    return CompatibilityReport(
        criterion="ES",
        value=max(lam, 0.0),
        raw_value=lam,
        primal_witness=np.array([[lam]], dtype=complex),
        dual_certificate=certificate,
        dual_alphas=alphas,
        gap=sol.gap,
        solution=sol,
    )


def bfm_pair_upper_bound(a, b) -> PairBound:
    """1 - D(a, b), with a tightness diagnostic.

    The bound is attained by the BFM measure exactly when the candidate
    R = (a + b - |a - b|)/2 is PSD.
    """
    am = qmat._as_array(a)
    bm = qmat._as_array(b)
    if am.shape != bm.shape:
        raise DimensionMismatchError(f"shapes {am.shape} and {bm.shape} differ")
    candidate = 0.5 * (am + bm - qmat.matrix_abs(am - bm))
    attained = bool(np.linalg.eigvalsh(candidate)[0] >= -1e-10)
    return PairBound(1.0 - qmat.trace_distance(am, bm), attained, candidate)


def is_compatible(state_set: StateSet, rank_tol: float = qmat.RANK_TOL) -> bool:
    """True when the supports share at least one common direction."""
    return qmat.supports_intersection_dim(state_set.matrices(), rank_tol) > 0


# ---------------------------------------------------------------------------
# Closed-form oracles
# ---------------------------------------------------------------------------

def _joint_eigenbasis(mats, dim, cluster_tol=1e-7):
    """Common eigenbasis of a commuting Hermitian family by eigenspace refinement."""
    basis = np.eye(dim, dtype=complex)
    groups = [np.arange(dim)]
    for m in mats:
        refined = []
        for g in groups:
            sub = basis[:, g]
            w, u = np.linalg.eigh(sub.conj().T @ m @ sub)
            basis[:, g] = sub @ u
            start = 0
            for i in range(1, len(w) + 1):
                if i == len(w) or w[i] - w[i - 1] > cluster_tol:
                    refined.append(g[start:i])
                    start = i
        groups = refined
    return basis


def oracle_bfm_commuting(state_set: StateSet) -> float:
    """Classical overlap sum_d min_i p_i(d) for pairwise-commuting sets."""
    mats = state_set.matrices()
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            if np.linalg.norm(comm) > 1e-9:
                raise NotCommutingError(
                    f"states {i} and {j} do not commute (||[.,.]|| = {np.linalg.norm(comm):.2e})"
                )
    basis = _joint_eigenbasis(mats, state_set.dim)
    probs = np.array([np.diag(basis.conj().T @ m @ basis).real for m in mats])
    return float(np.sum(np.min(probs, axis=0)))


def oracle_pp_pair(a, b) -> float:
    """Two-state PP closed form 1 - D(a, b)."""
    return 1.0 - qmat.trace_distance(a, b)


def oracle_es(state_set: StateSet) -> float:
    """ES value min_i lambda_min(S^{-1/2} rho_i S^{-1/2}) on supp(S); 0 if supports differ."""
    mats = state_set.matrices()
    total = sum(mats)
    total_rank = qmat.support_projector(total).rank
    for m in mats:
        if qmat.support_projector(m).rank != total_rank:
            return 0.0
    vals, vecs = qmat.eig_hermitian(total)
    keep = vals > qmat.RANK_TOL * max(vals[-1], 0.0)
    inv_sqrt = (vecs[:, keep] * (vals[keep] ** -0.5)) @ vecs[:, keep].conj().T
    best = np.inf
    support = vecs[:, keep]
    for m in mats:
        reduced = support.conj().T @ (inv_sqrt @ m @ inv_sqrt) @ support
        best = min(best, float(np.linalg.eigvalsh(0.5 * (reduced + reduced.conj().T))[0]))
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# Qubit pair geometry
# ---------------------------------------------------------------------------
#
# For qubits, R = (t I + r.sigma)/2 is feasible iff |r| <= t and
# |r - alpha_i| <= 1 - t for each Bloch vector alpha_i, so the BFM value is
# the largest t for which the ball B(0, t) meets the lens
# B(alpha, 1 - t) & B(beta, 1 - t).  Feasible t's form an interval, so a
# bisection on the lens-to-origin distance is exact.  Used as a second
# solution route for pairs and as the fast evaluator for Monte Carlo sweeps.

def qubit_pair_values(alpha: np.ndarray, beta: np.ndarray, iters: int = 90) -> np.ndarray:
    """Vectorized pair BFM values from Bloch vectors of shape (..., 3)."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    shape = alpha.shape[:-1]

    def feasible(t):
        r1 = 1.0 - t
        diff = alpha - beta
        delta = np.linalg.norm(diff, axis=-1)
        exists = delta <= 2.0 * r1 + 1e-15

        def ball_proj(center):
            n = np.linalg.norm(center, axis=-1)
            fac = np.where(n > r1, 1.0 - r1 / np.where(n > 0, n, 1.0), 0.0)
            return center * fac[..., None]

        p1 = ball_proj(alpha)
        p2 = ball_proj(beta)
        ok1 = np.linalg.norm(p1 - beta, axis=-1) <= r1 + 1e-15
        ok2 = np.linalg.norm(p2 - alpha, axis=-1) <= r1 + 1e-15

        safe = np.where(delta > 0, delta, 1.0)
        u = diff / safe[..., None]
        mid = 0.5 * (alpha + beta)
        mpar = np.sum(mid * u, axis=-1)[..., None] * u
        mperp = mid - mpar
        nperp = np.linalg.norm(mperp, axis=-1)
        rim_rad = np.sqrt(np.maximum(r1 * r1 - 0.25 * delta * delta, 0.0))
        rim_dist = np.sqrt(np.sum(mpar * mpar, axis=-1) + (nperp - rim_rad) ** 2)

        dist = np.where(ok1, np.linalg.norm(p1, axis=-1),
                        np.where(ok2, np.linalg.norm(p2, axis=-1), rim_dist))
        return exists & (dist <= t + 1e-15)

    k = np.zeros(shape)
    top = feasible(np.ones(shape))
    k[top] = 1.0
    lo = np.zeros(shape)
    hi = np.ones(shape)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        good = feasible(mid)
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    out = 0.5 * (lo + hi)
    out[top] = 1.0
    return out


def bloch_vector(rho) -> np.ndarray:
    m = qmat._as_array(rho)
    if m.shape != (2, 2):
        raise DimensionMismatchError("Bloch vectors are defined for qubits only")
    return np.array([
        np.trace(m @ qmat.PAULI_X).real,
        np.trace(m @ qmat.PAULI_Y).real,
        np.trace(m @ qmat.PAULI_Z).real,
    ])


def oracle_bfm_qubit_pair(a, b) -> float:
    """Exact pair BFM value for qubits from Bloch-ball geometry."""
    return float(qubit_pair_values(bloch_vector(a)[None, :], bloch_vector(b)[None, :])[0])
