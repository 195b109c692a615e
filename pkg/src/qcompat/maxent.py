"""Maximum-entropy state assignment from expectation-value constraints.

The entropy maximizer subject to Tr[O_i rho] = o_i and Tr[rho] = 1 has the
Gibbs form rho = exp(sum_i lam_i O_i) / Z.  The multipliers are found by
minimizing the convex dual

    g(lam) = log Z(lam) - lam . o,
    grad g = <O_i>_rho - o_i,
    hess g = Kubo-Mori covariance of the observables under rho,

with Newton steps and an Armijo line search.  Consistency of the
constraints is pre-checked by a small feasibility SDP (minimize the largest
constraint violation over all density matrices), so contradictory data is
reported as :class:`InfeasibleError` rather than as non-convergence.

Constraint sets whose only solutions are rank-deficient states (for example
an expectation pinned to an extreme eigenvalue) drive the multipliers to
infinity; this is detected and raised as :class:`BoundaryStateError`
carrying the current near-boundary estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat, sdp
from .qmat import DensityMatrix

FEASIBILITY_TOL = 1e-7
MULTIPLIER_LIMIT = 1e3
BOUNDARY_RANK_TOL = 1e-8


class InfeasibleError(ValueError):
    """No density matrix satisfies all the expectation constraints."""


class BoundaryStateError(RuntimeError):
    """The entropy maximizer is rank deficient; multipliers diverge.

    The ``result`` attribute carries the near-boundary estimate with its
    ``boundary`` flag set.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class ExpectationConstraint:
    """A known expectation value Tr[observable * rho] = value."""

    observable: np.ndarray
    value: float

    def __post_init__(self):
        obs = qmat.as_hermitian(self.observable)
        obs.setflags(write=False)
        object.__setattr__(self, "observable", obs)
        object.__setattr__(self, "value", float(self.value))
        vals = np.linalg.eigvalsh(obs)
        if not (vals[0] - 1e-9 <= self.value <= vals[-1] + 1e-9):
            raise InfeasibleError(
                f"expectation {self.value} outside the spectrum range "
                f"[{vals[0]:.6g}, {vals[-1]:.6g}] of the observable"
            )


@dataclass
class MaxEntResult:
    state: DensityMatrix
    multipliers: np.ndarray
    entropy: float
    residuals: np.ndarray
    boundary: bool = False
    diagnostics: dict = field(default_factory=dict)


def von_neumann_entropy(rho) -> float:
    """-Tr[rho log rho] in nats, with 0 log 0 = 0."""
    vals = np.linalg.eigvalsh(qmat.as_hermitian(qmat._as_array(rho)))
    vals = vals[vals > 0.0]
    return float(-np.sum(vals * np.log(vals)))


# ---------------------------------------------------------------------------
# Feasibility pre-check
# ---------------------------------------------------------------------------

def build_feasibility_problem(constraints, dim) -> sdp.SdpProblem:
    """minimize t  s.t.  |Tr[O_i rho] - o_i| <= t, |Tr rho - 1| <= t, rho >= 0.

    The optimum is the smallest achievable worst-case violation; the
    constraint set is consistent exactly when it is zero.
    """
    one = np.eye(1, dtype=complex)
    eye = np.eye(dim, dtype=complex)
    terms = []
    bound = []
    rows = [(c.observable, c.value) for c in constraints] + [(eye, 1.0)]
    for j, (obs, val) in enumerate(rows):
        plus, minus = 2 * j, 2 * j + 1
        terms.append(sdp.MatToDiagTerm(0, plus, 1.0, (obs,)))
        terms.append(sdp.ConjugationTerm(1, plus, -1.0, one))
        bound.append(val * one)
        terms.append(sdp.MatToDiagTerm(0, minus, -1.0, (obs,)))
        terms.append(sdp.ConjugationTerm(1, minus, -1.0, one))
        bound.append(-val * one)
    return sdp.SdpProblem(
        var_dims=(dim, 1), con_dims=(1,) * (2 * len(rows)),
        objective=(np.zeros((dim, dim), dtype=complex), -one),
        bound=tuple(bound), terms=terms, name="maxent-feasibility",
    )


def max_constraint_violation(constraints, dim) -> float:
    """Smallest worst-case violation achievable by any density matrix."""
    sol = sdp.solve(build_feasibility_problem(constraints, dim), tol=1e-9)
    if sol.status is sdp.SolveStatus.INFEASIBLE:  # pragma: no cover - cannot happen
        raise RuntimeError("feasibility program is itself infeasible")
    return float(-sol.primal_value)


# ---------------------------------------------------------------------------
# Dual Newton iteration
# ---------------------------------------------------------------------------

def _gibbs(multipliers, observables, dim):
    """Gibbs state, its eigen-data and log partition function, shift-stabilized."""
    gen = np.zeros((dim, dim), dtype=complex)
    for lam, obs in zip(multipliers, observables):
        gen += lam * obs
    vals, vecs = np.linalg.eigh(0.5 * (gen + gen.conj().T))
    shifted = vals - vals[-1]
    weights = np.exp(shifted)
    z_shifted = float(np.sum(weights))
    rho = (vecs * (weights / z_shifted)) @ vecs.conj().T
    log_z = float(vals[-1] + np.log(z_shifted))
    return 0.5 * (rho + rho.conj().T), vals, vecs, log_z


def _kubo_mori_hessian(rho_vals, rho_vecs, centered):
    """Hessian of log Z: H_ij = Tr[O_i D exp[O_j]] / Z with centered observables.

    In the eigenbasis of the exponent the derivative of the exponential is a
    Hadamard product with the divided-difference kernel of exp, so the
    entries reduce to weighted sums over eigenvalue pairs.
    """
    shifted = rho_vals - rho_vals[-1]
    x = shifted[:, None]
    y = shifted[None, :]
    diff = x - y
    near = np.abs(diff) < 1e-9
    kernel = np.where(near, np.exp(0.5 * (x + y)),
                      (np.exp(x) - np.exp(y)) / np.where(near, 1.0, diff))
    kernel = kernel / np.sum(np.exp(shifted))
    tilde = [rho_vecs.conj().T @ o @ rho_vecs for o in centered]
    n = len(centered)
    hess = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            hess[i, j] = np.sum(kernel * tilde[j] * tilde[i].T).real
            hess[j, i] = hess[i, j]
    return hess


def maxent_estimate(constraints, dim, grad_tol: float = 1e-9,
                    max_newton: int = 2000) -> MaxEntResult:
    """Entropy maximizer consistent with the given expectation values.

    With no constraints this is the uniform state.  Raises
    :class:`InfeasibleError` for contradictory constraints and
    :class:`BoundaryStateError` when the maximizer is rank deficient.
    """
    constraints = list(constraints)
    dim = int(dim)
    for c in constraints:
        if c.observable.shape != (dim, dim):
            raise qmat.DimensionMismatchError(
                f"observable shape {c.observable.shape} does not match dim {dim}"
            )
    if not constraints:
        state = DensityMatrix(np.eye(dim) / dim)
        return MaxEntResult(state, np.zeros(0), float(np.log(dim)), np.zeros(0))

    violation = max_constraint_violation(constraints, dim)
    if violation > FEASIBILITY_TOL:
        raise InfeasibleError(
            f"constraints are contradictory: best achievable max violation {violation:.3e}"
        )

    observables = [c.observable for c in constraints]
    targets = np.array([c.value for c in constraints])
    lam = np.zeros(len(constraints))

    def dual_value(l):
        _, _, _, log_z = _gibbs(l, observables, dim)
        return log_z - float(l @ targets)

    rho, vals, vecs, log_z = _gibbs(lam, observables, dim)
    g = log_z - float(lam @ targets)
    residual_history = []
    converged = False
    stalled = False
    for _ in range(max_newton):
        moments = np.array([np.trace(o @ rho).real for o in observables])
        grad = moments - targets
        grad_norm = float(np.max(np.abs(grad)))
        residual_history.append(grad_norm)
        if grad_norm <= grad_tol:
            converged = True
            break
        if np.linalg.norm(lam) > MULTIPLIER_LIMIT and _shrinking(residual_history):
            state, result = _near_boundary_result(lam, observables, targets, dim)
            raise BoundaryStateError(
                f"multipliers diverged (|lam| = {np.linalg.norm(lam):.3e}) "
                "with residuals still shrinking; the maximizer is rank deficient",
                result,
            )
        centered = [o - m * np.eye(dim) for o, m in zip(observables, moments)]
        hess = _kubo_mori_hessian(vals, vecs, centered)
        step = np.linalg.lstsq(hess + 1e-14 * np.eye(len(lam)), -grad, rcond=None)[0]
        # Armijo backtracking on the convex dual
        slope = float(grad @ step)
        t = 1.0
        improved = False
        for _ in range(60):
            trial = lam + t * step
            g_trial = dual_value(trial)
            if g_trial <= g + 1e-4 * t * slope:
                improved = True
                break
            t *= 0.5
        if not improved:
            # float rounding floor of the dual; the gradient decides below
            stalled = True
            break
        lam = lam + t * step
        rho, vals, vecs, log_z = _gibbs(lam, observables, dim)
        g = log_z - float(lam @ targets)
    if not converged:
        moments = np.array([np.trace(o @ rho).real for o in observables])
        grad_norm = float(np.max(np.abs(grad := moments - targets)))
        if grad_norm <= 1e-8:
            converged = True
        elif np.linalg.norm(lam) > 10.0 and _shrinking(residual_history):
            state, result = _near_boundary_result(lam, observables, targets, dim)
            raise BoundaryStateError(
                "Newton iteration stopped with shrinking residuals and growing "
                "multipliers; the maximizer is rank deficient", result)
        else:
            kind = "stalled" if stalled else "hit the iteration cap"
            raise RuntimeError(
                f"maxent Newton iteration {kind} at residual {grad_norm:.3e}")

    state = DensityMatrix(rho)
    moments = np.array([np.trace(o @ rho).real for o in observables])
    result = MaxEntResult(
        state=state,
        multipliers=lam,
        entropy=von_neumann_entropy(rho),
        residuals=moments - targets,
        diagnostics={"feasibility_violation": violation, "newton_iterations": len(residual_history)},
    )
    eigs = np.linalg.eigvalsh(rho)
    if eigs[0] < BOUNDARY_RANK_TOL * eigs[-1]:
        result.boundary = True
        raise BoundaryStateError(
            f"maximizer is rank deficient within tolerance (min/max eigenvalue "
            f"ratio {eigs[0] / eigs[-1]:.2e})", result)
    return result


def _shrinking(history, window: int = 10) -> bool:
    if len(history) < window + 1:
        return True
    return history[-1] < history[-1 - window]


def _near_boundary_result(lam, observables, targets, dim):
    rho, _, _, _ = _gibbs(lam, observables, dim)
    state = DensityMatrix(rho)
    moments = np.array([np.trace(o @ rho).real for o in observables])
    result = MaxEntResult(
        state=state, multipliers=lam.copy(), entropy=von_neumann_entropy(rho),
        residuals=moments - targets, boundary=True,
    )
    return state, result


def pool_classical(a_constraints, b_constraints, dim) -> MaxEntResult:
    """Maximum-entropy assignment from the union of two parties' constraints.

    The pooled entropy can never exceed either party's individual
    maximum-entropy value, since the union only adds constraints.
    """
    return maxent_estimate(list(a_constraints) + list(b_constraints), dim)
