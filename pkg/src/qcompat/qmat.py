"""Dense complex Hermitian linear algebra for small operators.

Eigendecomposition, PSD tests, matrix functions, support geometry and the
trace distance, plus the validated ``DensityMatrix`` / ``SupportProjector``
wrappers that the rest of the package builds on.  Everything here is a pure
function of its inputs; matrices are plain ``numpy`` arrays of shape (D, D).
"""

from __future__ import annotations

import numpy as np

HERMITICITY_TOL = 1e-8
RANK_TOL = 1e-9

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class NonHermitianError(ValueError):
    """Anti-Hermitian deviation of the input exceeds tolerance."""


class DimensionMismatchError(ValueError):
    """Operands act on spaces of different dimension."""


class SingularLogError(ValueError):
    """Matrix logarithm requested for an operator with an eigenvalue <= 0."""


def _as_array(op) -> np.ndarray:
    """Accept a bare ndarray or anything exposing a ``.matrix`` attribute."""
    m = getattr(op, "matrix", op)
    return np.asarray(m, dtype=complex)


def hermitian_part(mat) -> np.ndarray:
    mat = _as_array(mat)
    return 0.5 * (mat + mat.conj().T)


def as_hermitian(mat, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Symmetrize ``mat`` if its anti-Hermitian part is below ``tol * ||mat||``.

    Tolerates file-format rounding without silently accepting garbage;
    larger deviations raise :class:`NonHermitianError`.
    """
    mat = _as_array(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {mat.shape}")
    dev = np.max(np.abs(mat - mat.conj().T))
    scale = max(np.linalg.norm(mat), 1e-30)
    if dev > tol * scale:
        raise NonHermitianError(
            f"anti-Hermitian deviation {dev:.3e} exceeds {tol:.1e} * ||H|| = {tol * scale:.3e}"
        )
    return hermitian_part(mat)


def eig_hermitian(mat, tol: float = HERMITICITY_TOL):
    """Eigen-decompose a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as orthonormal columns.  Column phases are canonicalized
    (largest-magnitude entry made real positive) so repeated calls on equal
    inputs give identical output.
    """
    h = as_hermitian(mat, tol)
    vals, vecs = np.linalg.eigh(h)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        i = int(np.argmax(np.abs(col)))
        phase = col[i] / abs(col[i]) if abs(col[i]) > 0 else 1.0
        vecs[:, j] = col / phase
    return vals, vecs


def matrix_abs(mat) -> np.ndarray:
    """|H| = sqrt(H^2): same eigenbasis, eigenvalues replaced by |lambda|."""
    vals, vecs = eig_hermitian(mat)
    return hermitian_part((vecs * np.abs(vals)) @ vecs.conj().T)


def matrix_exp(mat) -> np.ndarray:
    vals, vecs = eig_hermitian(mat)
    return hermitian_part((vecs * np.exp(vals)) @ vecs.conj().T)


def matrix_log(mat) -> np.ndarray:
    """log of a positive definite Hermitian matrix via eigendecomposition."""
    vals, vecs = eig_hermitian(mat)
    if vals[0] <= 0.0:
        raise SingularLogError(f"matrix_log requires positive eigenvalues, got min {vals[0]:.3e}")
    return hermitian_part((vecs * np.log(vals)) @ vecs.conj().T)


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference of two states, in [0, 1]."""
    am, bm = _as_array(a), _as_array(b)
    if am.shape != bm.shape:
        raise DimensionMismatchError(f"shapes {am.shape} and {bm.shape} differ")
    vals, _ = eig_hermitian(am - bm)
    return float(0.5 * np.sum(np.abs(vals)))


class DensityMatrix:
    """A Hermitian, unit-trace, PSD operator (the state assignment type).

    Validation: trace within 1e-10 of one, smallest eigenvalue >= -1e-10,
    Hermiticity within the standard tolerance.
    """

    TRACE_TOL = 1e-10
    PSD_TOL = 1e-10

    def __init__(self, matrix):
        m = as_hermitian(matrix)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise ValueError(f"trace {tr!r} differs from 1 by more than {self.TRACE_TOL}")
        lmin = float(np.linalg.eigvalsh(m)[0])
        if lmin < -self.PSD_TOL:
            raise ValueError(f"matrix is not PSD: min eigenvalue {lmin:.3e}")
        m.setflags(write=False)
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class SupportProjector:
    """Idempotent Hermitian projector onto the support of a state."""

    def __init__(self, matrix: np.ndarray, rank: int):
        self.matrix = hermitian_part(matrix)
        self.matrix.setflags(write=False)
        self.rank = int(rank)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"SupportProjector(dim={self.dim}, rank={self.rank})"


def support_projector(rho, rank_tol: float = RANK_TOL) -> SupportProjector:
    """Projector onto the span of eigenvectors with eigenvalue > rank_tol * lambda_max."""
    vals, vecs = eig_hermitian(_as_array(rho))
    cut = rank_tol * max(vals[-1], 0.0)
    keep = vecs[:, vals > cut]
    proj = keep @ keep.conj().T
    return SupportProjector(proj, keep.shape[1])


def null_space_basis(rho, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical null space of a PSD operator."""
    vals, vecs = eig_hermitian(_as_array(rho))
    cut = rank_tol * max(vals[-1], 0.0)
    return vecs[:, vals <= cut]


def supports_intersection_dim(states, rank_tol: float = RANK_TOL) -> int:
    """Dimension of the intersection of the supports of two or more states.

    Computed as D minus the rank of the stacked null-space bases: a vector
    lies in every support exactly when it is orthogonal to every null space.
    A positive result means the states are compatible assignments.
    """
    mats = [_as_array(s) for s in states]
    if len(mats) < 2:
        raise ValueError("need at least two states")
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape != (dim, dim):
            raise DimensionMismatchError(f"state shapes {m.shape} and {(dim, dim)} differ")
    nulls = [null_space_basis(m, rank_tol) for m in mats]
    stacked = np.hstack([n for n in nulls if n.shape[1] > 0] or [np.zeros((dim, 0))])
    if stacked.shape[1] == 0:
        return dim
    svals = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(svals > 1e-7 * svals[0]))
    return dim - rank
