"""Block-structured semidefinite programs with certificates.

A problem is held in the normal form

    maximize    <A, X>
    subject to  Phi(X) <= B,    X >= 0   (block-diagonal PSD),

whose mechanical dual is

    minimize    <B, Y>
    subject to  Phi*(Y) >= A,   Y >= 0,

with Phi* fixed by the trace identity <Y, Phi(X)> = <Phi*(Y), X>.  The map
Phi is a finite list of Hermiticity-preserving terms (conjugations and
diagonal selectors), so the dual is obtained purely by transposing the term
list; no problem-specific derivation is involved.

The solver is an infeasible-start primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra-style adaptive centering parameter.
It keeps all cone iterates strictly interior, drives the affine residuals
to zero, and returns the primal/dual pair together with its duality gap and
feasibility residuals.  Equality constraints are carried as paired
inequality blocks; the pairing metadata survives dualization so the paired
dual variables can be read as one free multiplier.

Set the environment variable QCOMPAT_SDP_TRACE to a file path to append one
JSON line per iteration of every solve.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import block_diag

# ---------------------------------------------------------------------------
# Hermitian coordinates
# ---------------------------------------------------------------------------

_BASIS_CACHE: dict[int, np.ndarray] = {}


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal (Frobenius) basis of d x d Hermitian matrices, stacked (d^2, d, d)."""
    if dim in _BASIS_CACHE:
        return _BASIS_CACHE[dim]
    mats = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1.0
        mats.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = s
            e[j, i] = s
            mats.append(e)
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            mats.append(e)
    stack = np.stack(mats)
    stack.setflags(write=False)
    _BASIS_CACHE[dim] = stack
    return stack


def vec_blocks(blocks, dims) -> np.ndarray:
    parts = []
    for blk, d in zip(blocks, dims):
        basis = hermitian_basis(d)
        parts.append(np.einsum("pij,ji->p", basis, blk).real)
    return np.concatenate(parts) if parts else np.zeros(0)


def unvec_blocks(v: np.ndarray, dims) -> list[np.ndarray]:
    blocks, ofs = [], 0
    for d in dims:
        basis = hermitian_basis(d)
        n = d * d
        blocks.append(np.einsum("p,pij->ij", v[ofs:ofs + n], basis))
        ofs += n
    return blocks


# ---------------------------------------------------------------------------
# Problem data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugationTerm:
    """Adds ``weight * C X_in C^dagger`` to output block ``out_block``."""

    in_block: int
    out_block: int
    weight: float
    coeff: np.ndarray


@dataclass(frozen=True)
class DiagToMatTerm:
    """Adds ``weight * sum_d X_in[d, d] * mats[d]`` to the output block.

    ``mats`` entries must be Hermitian; ``None`` skips a diagonal slot.
    A 1x1 input block with a single matrix is the scalar-to-matrix case.
    """

    in_block: int
    out_block: int
    weight: float
    mats: tuple


@dataclass(frozen=True)
class MatToDiagTerm:
    """Adds ``weight * Tr[mats[d] X_in]`` to diagonal slot d of the output block."""

    in_block: int
    out_block: int
    weight: float
    mats: tuple


@dataclass
class SdpProblem:
    """Normal-form data {A, B, Phi} over block-diagonal Hermitian spaces.

    ``value_sign`` records the sign convention: the optimum in the problem's
    reported sense equals ``value_sign`` times the normal-form maximum (a
    dualized problem carries -1 because its reported sense is a minimum).
    ``eq_constraint_pairs`` marks (plus, minus) constraint-block pairs that
    jointly encode an equality; ``free_variable_pairs`` marks (plus, minus)
    variable-block pairs encoding one free Hermitian variable.
    """

    var_dims: tuple
    con_dims: tuple
    objective: tuple
    bound: tuple
    terms: tuple
    value_sign: int = 1
    eq_constraint_pairs: tuple = ()
    free_variable_pairs: tuple = ()
    name: str = ""

    def __post_init__(self):
        self.var_dims = tuple(int(d) for d in self.var_dims)
        self.con_dims = tuple(int(d) for d in self.con_dims)
        self.objective = tuple(np.asarray(a, dtype=complex) for a in self.objective)
        self.bound = tuple(np.asarray(b, dtype=complex) for b in self.bound)
        self.terms = tuple(self.terms)
        if len(self.objective) != len(self.var_dims):
            raise ValueError("objective blocks do not match var_dims")
        if len(self.bound) != len(self.con_dims):
            raise ValueError("bound blocks do not match con_dims")
        for a, d in zip(self.objective, self.var_dims):
            if a.shape != (d, d):
                raise ValueError(f"objective block shape {a.shape} != ({d}, {d})")
        for b, d in zip(self.bound, self.con_dims):
            if b.shape != (d, d):
                raise ValueError(f"bound block shape {b.shape} != ({d}, {d})")

    # -- the map and its adjoint ------------------------------------------

    def apply(self, X) -> list[np.ndarray]:
        out = [np.zeros((d, d), dtype=complex) for d in self.con_dims]
        for t in self.terms:
            xi = X[t.in_block]
            if isinstance(t, ConjugationTerm):
                out[t.out_block] += t.weight * (t.coeff @ xi @ t.coeff.conj().T)
            elif isinstance(t, DiagToMatTerm):
                for d, g in enumerate(t.mats):
                    if g is not None:
                        out[t.out_block] += (t.weight * xi[d, d].real) * g
            elif isinstance(t, MatToDiagTerm):
                for d, g in enumerate(t.mats):
                    if g is not None:
                        out[t.out_block][d, d] += t.weight * np.trace(g @ xi).real
            else:  # pragma: no cover - guarded by construction
                raise TypeError(f"unknown term {t!r}")
        return out

    def apply_adjoint(self, Y) -> list[np.ndarray]:
        out = [np.zeros((d, d), dtype=complex) for d in self.var_dims]
        for t in self.terms:
            yj = Y[t.out_block]
            if isinstance(t, ConjugationTerm):
                out[t.in_block] += t.weight * (t.coeff.conj().T @ yj @ t.coeff)
            elif isinstance(t, DiagToMatTerm):
                for d, g in enumerate(t.mats):
                    if g is not None:
                        out[t.in_block][d, d] += t.weight * np.trace(g @ yj).real
            elif isinstance(t, MatToDiagTerm):
                for d, g in enumerate(t.mats):
                    if g is not None:
                        out[t.in_block] += (t.weight * yj[d, d].real) * g
        return out

    def map_matrix(self) -> np.ndarray:
        """Real matrix of Phi between Hermitian coordinate spaces."""
        cols = []
        for bi, d in enumerate(self.var_dims):
            for f in hermitian_basis(d):
                probe = [np.zeros((dd, dd), dtype=complex) for dd in self.var_dims]
                probe[bi] = f
                cols.append(vec_blocks(self.apply(probe), self.con_dims))
        n_con = sum(d * d for d in self.con_dims)
        return np.array(cols).T if cols else np.zeros((n_con, 0))


def adjoint_identity_residual(problem: SdpProblem, probes: int = 8, seed: int = 0) -> float:
    """Max |<Y, Phi(X)> - <Phi*(Y), X>| over random Hermitian probe pairs."""
    rng = np.random.default_rng(seed)

    def rand_herm(d):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return 0.5 * (g + g.conj().T)

    worst = 0.0
    for _ in range(probes):
        X = [rand_herm(d) for d in problem.var_dims]
        Y = [rand_herm(d) for d in problem.con_dims]
        lhs = sum(np.trace(y @ f).real for y, f in zip(Y, problem.apply(X)))
        rhs = sum(np.trace(x @ g).real for x, g in zip(X, problem.apply_adjoint(Y)))
        worst = max(worst, abs(lhs - rhs))
    return worst


def hermiticity_preservation_residual(problem: SdpProblem, seed: int = 0) -> float:
    """Max anti-Hermitian deviation of Phi(X) and Phi*(Y) on random Hermitian probes."""
    rng = np.random.default_rng(seed)
    X = []
    for d in problem.var_dims:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        X.append(0.5 * (g + g.conj().T))
    worst = 0.0
    for blk in problem.apply(X):
        worst = max(worst, np.max(np.abs(blk - blk.conj().T)) if blk.size else 0.0)
    Y = []
    for d in problem.con_dims:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        Y.append(0.5 * (g + g.conj().T))
    for blk in problem.apply_adjoint(Y):
        worst = max(worst, np.max(np.abs(blk - blk.conj().T)) if blk.size else 0.0)
    return worst


def _adjoint_term(t):
    if isinstance(t, ConjugationTerm):
        return ConjugationTerm(t.out_block, t.in_block, t.weight, t.coeff.conj().T)
    if isinstance(t, DiagToMatTerm):
        return MatToDiagTerm(t.out_block, t.in_block, t.weight, t.mats)
    if isinstance(t, MatToDiagTerm):
        return DiagToMatTerm(t.out_block, t.in_block, t.weight, t.mats)
    raise TypeError(f"unknown term {t!r}")


def _negate_term(t):
    if isinstance(t, ConjugationTerm):
        return ConjugationTerm(t.in_block, t.out_block, -t.weight, t.coeff)
    if isinstance(t, DiagToMatTerm):
        return DiagToMatTerm(t.in_block, t.out_block, -t.weight, t.mats)
    return MatToDiagTerm(t.in_block, t.out_block, -t.weight, t.mats)


def dualize(problem: SdpProblem) -> SdpProblem:
    """Mechanical dual, re-expressed in primal normal form.

    The dual  min <B, Y>  s.t.  Phi*(Y) >= A, Y >= 0  is returned as

        maximize <-B, Y>  s.t.  -Phi*(Y) <= -A,  Y >= 0,

    so the dual optimum in its min sense is ``value_sign`` times the
    returned problem's normal-form maximum.  Paired equality constraints
    become paired (free) dual variables and vice versa.
    """
    terms = tuple(_negate_term(_adjoint_term(t)) for t in problem.terms)
    return SdpProblem(
        var_dims=problem.con_dims,
        con_dims=problem.var_dims,
        objective=tuple(-b for b in problem.bound),
        bound=tuple(-a for a in problem.objective),
        terms=terms,
        value_sign=-problem.value_sign,
        eq_constraint_pairs=problem.free_variable_pairs,
        free_variable_pairs=problem.eq_constraint_pairs,
        name=f"dual({problem.name})" if problem.name else "dual",
    )


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_LIMIT = "numerical_limit"


@dataclass
class SdpSolution:
    primal_blocks: list
    dual_blocks: list
    primal_slack: list
    dual_slack: list
    primal_value: float
    dual_value: float
    gap: float
    status: SolveStatus
    iterations: int
    primal_residual: float
    dual_residual: float
    improving_ray: list | None = None
    metadata: dict = field(default_factory=dict)


def verify_solution(problem: SdpProblem, sol: SdpSolution) -> dict:
    """Feasibility margins of a solution pair, for certificate checking.

    Margins are smallest eigenvalues, so values >= -tol certify feasibility
    within tol.  ``weak_duality`` is beta - alpha and must be >= -1e-8.
    """
    X, Y = sol.primal_blocks, sol.dual_blocks
    pf = min(
        (np.linalg.eigvalsh(b - f)[0].real for b, f in zip(problem.bound, problem.apply(X))),
        default=0.0,
    )
    df = min(
        (np.linalg.eigvalsh(f - a)[0].real for a, f in zip(problem.objective, problem.apply_adjoint(Y))),
        default=0.0,
    )
    x_min = min((np.linalg.eigvalsh(x)[0].real for x in X), default=0.0)
    y_min = min((np.linalg.eigvalsh(y)[0].real for y in Y), default=0.0)
    return {
        "primal_constraint_margin": float(pf),
        "dual_constraint_margin": float(df),
        "primal_psd_margin": float(x_min),
        "dual_psd_margin": float(y_min),
        "weak_duality": float(sol.dual_value - sol.primal_value),
    }


# ---------------------------------------------------------------------------
# Interior-point solver
# ---------------------------------------------------------------------------

def _sym(m):
    return 0.5 * (m + m.conj().T)


def _eigh_floor(mat, rel_floor=1e-14):
    """eigh with eigenvalues floored at rel_floor * max(|lambda|) (cone iterates only)."""
    vals, vecs = np.linalg.eigh(mat)
    top = max(abs(vals[0]), abs(vals[-1]), 1e-300)
    return np.maximum(vals, rel_floor * top), vecs


def _nt_scaling(x, z):
    """Nesterov-Todd scaling point W with W z W = x, plus inv(z)."""
    lx, ux = _eigh_floor(x)
    xh = (ux * np.sqrt(lx)) @ ux.conj().T
    mid = _sym(xh @ z @ xh)
    lm, um = _eigh_floor(mid)
    mih = (um * (lm ** -0.5)) @ um.conj().T
    w = _sym(xh @ mih @ xh)
    lz, uz = _eigh_floor(z)
    zi = _sym((uz * (1.0 / lz)) @ uz.conj().T)
    return w, zi


def _max_step(x, dx):
    """Largest alpha in (0, 1] keeping x + alpha dx in the PSD cone."""
    if not np.all(np.isfinite(dx)):
        return 0.0
    lx, ux = _eigh_floor(x)
    xih = (ux * (lx ** -0.5)) @ ux.conj().T
    m = _sym(xih @ dx @ xih)
    if not np.all(np.isfinite(m)):
        return 0.0
    lmin = np.linalg.eigvalsh(m)[0]
    if lmin >= 0.0:
        return 1.0
    return min(1.0, -1.0 / lmin)


def _scaling_matrix(w, dim):
    """Coordinate matrix of M -> W M W on the Hermitian space of the block."""
    basis = hermitian_basis(dim)
    wf = np.einsum("ij,pjk->pik", w, basis)
    wfw = np.einsum("pik,kl->pil", wf, w)
    return np.einsum("pij,qji->pq", basis, wfw).real


class _Tracer:
    """Line-delimited JSON iterate dump, enabled by QCOMPAT_SDP_TRACE."""

    def __init__(self, problem):
        path = os.environ.get("QCOMPAT_SDP_TRACE", "")
        self._fh = open(path, "a") if path else None
        if self._fh:
            self._write({
                "event": "solve_start",
                "name": problem.name,
                "var_dims": list(problem.var_dims),
                "con_dims": list(problem.con_dims),
            })

    def _write(self, obj):
        self._fh.write(json.dumps(obj) + "\n")

    def iterate(self, **kw):
        if self._fh:
            self._write({"event": "iterate", **kw})

    def close(self, status, iterations):
        if self._fh:
            self._write({"event": "solve_end", "status": status, "iterations": iterations})
            self._fh.close()
            self._fh = None


def _initial_point(problem):
    """Strictly feasible start Phi(X0) < B when a scaled identity achieves it
    with a comfortable margin, otherwise a plain infeasible start (a barely
    interior start is worse-centered than an infeasible one).  The choice is
    reported in metadata."""
    vd, cd = problem.var_dims, problem.con_dims
    scale = max([float(np.linalg.norm(b)) for b in problem.bound] + [1.0])
    for s in (1.0, 0.3, 0.1):
        X = [s * np.eye(d, dtype=complex) for d in vd]
        slack = [b - f for b, f in zip(problem.bound, problem.apply(X))]
        margins = [np.linalg.eigvalsh(sl)[0].real if sl.size else 1.0 for sl in slack]
        if min(margins, default=1.0) > 0.05 * scale:
            S = [_sym(sl) for sl in slack]
            return X, S, "strictly-feasible(s=%g)" % s
    X = [np.eye(d, dtype=complex) for d in vd]
    S = [scale * np.eye(d, dtype=complex) for d in cd]
    return X, S, "infeasible-start"


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 200) -> SdpSolution:
    """Solve the normal-form problem to relative duality gap ``tol``.

    Status ``OPTIMAL`` guarantees |beta - alpha| <= tol * max(1, |alpha|)
    and affine residuals below tol-level thresholds.  ``INFEASIBLE`` comes
    with a dual improving ray as evidence.  Hitting ``max_iter`` (or a
    numerical stall) returns the best iterate found, with honest residuals,
    as ``NUMERICAL_LIMIT``.  The method is deterministic: identical inputs
    produce bitwise-identical iterate sequences.
    """
    vd, cd = problem.var_dims, problem.con_dims
    if min(vd, default=1) < 1 or min(cd, default=1) < 1:
        raise ValueError("all blocks must have dimension >= 1")
    herm_res = hermiticity_preservation_residual(problem)
    if herm_res > 1e-10:
        raise ValueError(f"map is not Hermiticity-preserving (residual {herm_res:.2e})")

    tracer = _Tracer(problem)
    nu = sum(vd) + sum(cd)
    norm_a = max([float(np.linalg.norm(a)) for a in problem.objective] + [1.0])
    norm_b = max([float(np.linalg.norm(b)) for b in problem.bound] + [1.0])
    ftol = min(tol, 1e-8)

    X, S, init_mode = _initial_point(problem)
    Y = [np.eye(d, dtype=complex) for d in cd]
    Z = [np.eye(d, dtype=complex) for d in vd]

    m_phi = problem.map_matrix()

    def blk_dot(u, v):
        return float(sum(np.trace(a @ b).real for a, b in zip(u, v)))

    best = None          # (merit, iterate snapshot)
    stall_count = 0
    status = SolveStatus.NUMERICAL_LIMIT
    it = 0
    ray = None

    for it in range(max_iter + 1):
        phi_x = problem.apply(X)
        phi_adj_y = problem.apply_adjoint(Y)
        rp = [b - f - s for b, f, s in zip(problem.bound, phi_x, S)]
        rd = [a - f + z for a, f, z in zip(problem.objective, phi_adj_y, Z)]
        alpha = blk_dot(problem.objective, X)
        beta = blk_dot(problem.bound, Y)
        mu = (blk_dot(X, Z) + blk_dot(S, Y)) / nu
        rp_n = max((float(np.linalg.norm(r)) for r in rp), default=0.0)
        rd_n = max((float(np.linalg.norm(r)) for r in rd), default=0.0)
        relgap = abs(beta - alpha) / max(1.0, abs(alpha))
        merit = max(relgap, rp_n / (1.0 + norm_b), rd_n / (1.0 + norm_a))

        tracer.iterate(iter=it, mu=mu, alpha=alpha, beta=beta, rp=rp_n, rd=rd_n)

        if best is None or merit < best[0]:
            best = (merit, ([x.copy() for x in X], [s.copy() for s in S],
                            [y.copy() for y in Y], [z.copy() for z in Z],
                            alpha, beta, rp_n, rd_n, it))
            stall_count = 0
        else:
            stall_count += 1

        if (relgap <= tol and rp_n <= ftol * (1.0 + norm_b)
                and rd_n <= ftol * (1.0 + norm_a)):
            status = SolveStatus.OPTIMAL
            best = (merit, ([x.copy() for x in X], [s.copy() for s in S],
                            [y.copy() for y in Y], [z.copy() for z in Z],
                            alpha, beta, rp_n, rd_n, it))
            break

        # Farkas test: Y normalized is an improving ray when Phi*(Y) >= 0
        # and <B, Y> < 0, certifying primal infeasibility.
        y_scale = max((float(np.linalg.norm(y)) for y in Y), default=0.0)
        if y_scale > 1e3:
            y_hat = [y / y_scale for y in Y]
            adj = problem.apply_adjoint(y_hat)
            adj_min = min((np.linalg.eigvalsh(a)[0].real for a in adj), default=0.0)
            b_dot = blk_dot(problem.bound, y_hat)
            if adj_min >= -1e-9 and b_dot < -1e-7:
                status = SolveStatus.INFEASIBLE
                ray = y_hat
                break

        if it >= max_iter or stall_count >= 15:
            break
        # endgame guards: a collapsed central path or blown-up iterates will
        # only corrupt the best point found so far
        if mu < 1e-14 * max(1.0, abs(alpha)):
            break
        if best[0] < 1e-6 and merit > 1e3 * best[0]:
            break

        # NT scalings and the reduced normal-equation operator
        wx = [_nt_scaling(x, z) for x, z in zip(X, Z)]
        ws = [_nt_scaling(s, y) for s, y in zip(S, Y)]
        t_wx = block_diag(*(_scaling_matrix(w, d) for (w, _), d in zip(wx, vd)))
        t_ws = block_diag(*(_scaling_matrix(w, d) for (w, _), d in zip(ws, cd)))
        lmat = m_phi @ t_wx @ m_phi.T + t_ws
        lmat = 0.5 * (lmat + lmat.T) + 1e-13 * np.eye(lmat.shape[0])
        try:
            chol = np.linalg.cholesky(lmat)
        except np.linalg.LinAlgError:
            chol = None

        def lin_solve(b):
            # two rounds of iterative refinement; the normal equations square
            # the central-path conditioning, refinement buys the digits back
            if chol is not None:
                def base(rhs):
                    u = np.linalg.solve(chol, rhs)
                    return np.linalg.solve(chol.conj().T, u)
            else:
                def base(rhs):
                    return np.linalg.lstsq(lmat, rhs, rcond=None)[0]
            x = base(b)
            for _ in range(2):
                x = x + base(b - lmat @ x)
            return x

        def newton(mu_target):
            rhs_var = [mu_target * zi - x + w @ r @ w
                       for (w, zi), x, r in zip(wx, X, rd)]
            phi_rhs = problem.apply(rhs_var)
            rhs_con = [f + mu_target * yi - s - r
                       for f, (w, yi), s, r in zip(phi_rhs, ws, S, rp)]
            b = vec_blocks(rhs_con, cd)
            dyv = lin_solve(b)
            dy = unvec_blocks(dyv, cd)
            dz = [f - r for f, r in zip(problem.apply_adjoint(dy), rd)]
            dx = [mu_target * zi - x - w @ d @ w
                  for (w, zi), x, d in zip(wx, X, dz)]
            ds = [mu_target * yi - s - w @ d @ w
                  for (w, yi), s, d in zip(ws, S, dy)]
            return dx, ds, dy, dz

        # predictor fixes the centering parameter, corrector takes the step
        dx, ds, dy, dz = newton(0.0)
        ap = min([_max_step(x, d) for x, d in zip(X, dx)]
                 + [_max_step(s, d) for s, d in zip(S, ds)] + [1.0])
        ad = min([_max_step(y, d) for y, d in zip(Y, dy)]
                 + [_max_step(z, d) for z, d in zip(Z, dz)] + [1.0])
        a_aff = min(1.0, 0.99 * ap, 0.99 * ad)
        mu_aff = (blk_dot([x + a_aff * d for x, d in zip(X, dx)],
                          [z + a_aff * d for z, d in zip(Z, dz)])
                  + blk_dot([s + a_aff * d for s, d in zip(S, ds)],
                            [y + a_aff * d for y, d in zip(Y, dy)])) / nu
        sigma = min(0.9, max(1e-6, (max(mu_aff, 0.0) / mu) ** 3)) if mu > 0 else 0.1

        dx, ds, dy, dz = newton(sigma * mu)
        ap = min([_max_step(x, d) for x, d in zip(X, dx)]
                 + [_max_step(s, d) for s, d in zip(S, ds)] + [1.0])
        ad = min([_max_step(y, d) for y, d in zip(Y, dy)]
                 + [_max_step(z, d) for z, d in zip(Z, dz)] + [1.0])
        step_p = min(1.0, 0.98 * ap)
        step_d = min(1.0, 0.98 * ad)
        if step_p < 1e-10 and step_d < 1e-10:
            break

        x_new = [_sym(x + step_p * d) for x, d in zip(X, dx)]
        s_new = [_sym(s + step_p * d) for s, d in zip(S, ds)]
        y_new = [_sym(y + step_d * d) for y, d in zip(Y, dy)]
        z_new = [_sym(z + step_d * d) for z, d in zip(Z, dz)]
        if not all(np.all(np.isfinite(m)) for group in (x_new, s_new, y_new, z_new) for m in group):
            break
        X, S, Y, Z = x_new, s_new, y_new, z_new
        size = max([float(np.linalg.norm(m)) for m in X + Y] + [1.0])
        if size > 1e12:
            break

    _, (X, S, Y, Z, alpha, beta, rp_n, rd_n, best_it) = best
    tracer.close(status.value, it)
    return SdpSolution(
        primal_blocks=X,
        dual_blocks=Y,
        primal_slack=S,
        dual_slack=Z,
        primal_value=alpha,
        dual_value=beta,
        gap=beta - alpha,
        status=status,
        iterations=it,
        primal_residual=rp_n,
        dual_residual=rd_n,
        improving_ray=ray,
        metadata={"initialization": init_mode, "best_iterate": best_it},
    )
