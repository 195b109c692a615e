"""Compatibility of quantum state assignments.

Quantifies how compatible several density-matrix assignments for one system
are under three criteria (BFM, Post-Peierls, Equal-Support), each posed as
a semidefinite program with certificates; also provides maximum-entropy
state estimation from expectation values and the probability-maximizing
measurement pooling of two assignments.
"""

from .compat import (
    CompatibilityReport,
    NotCommutingError,
    PairBound,
    SolverFailureError,
    StateSet,
    bfm_pair_upper_bound,
    bloch_vector,
    is_compatible,
    k_bfm,
    k_es,
    k_pp,
    oracle_bfm_commuting,
    oracle_bfm_qubit_pair,
    oracle_es,
    oracle_pp_pair,
)
from .maxent import (
    BoundaryStateError,
    ExpectationConstraint,
    InfeasibleError,
    MaxEntResult,
    maxent_estimate,
    pool_classical,
    von_neumann_entropy,
)
from .pooling import (
    IncompatibleStatesError,
    PoolingResult,
    RMaximalityReport,
    pool_measurement,
    verify_r_maximality,
)
from .qmat import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    DimensionMismatchError,
    NonHermitianError,
    SingularLogError,
    SupportProjector,
    eig_hermitian,
    matrix_abs,
    matrix_exp,
    matrix_log,
    support_projector,
    supports_intersection_dim,
    trace_distance,
)
from .scenarios import (
    Fig1Average,
    Fig1Point,
    Fig2Point,
    fig1_average,
    fig1_curve,
    fig1_point,
    fig2_curve,
    fig2_point,
)
from .sdp import (
    ConjugationTerm,
    DiagToMatTerm,
    MatToDiagTerm,
    SdpProblem,
    SdpSolution,
    SolveStatus,
    adjoint_identity_residual,
    dualize,
    solve,
    verify_solution,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryStateError",
    "CompatibilityReport",
    "ConjugationTerm",
    "DensityMatrix",
    "DiagToMatTerm",
    "DimensionMismatchError",
    "ExpectationConstraint",
    "Fig1Average",
    "Fig1Point",
    "Fig2Point",
    "IncompatibleStatesError",
    "InfeasibleError",
    "MatToDiagTerm",
    "MaxEntResult",
    "NonHermitianError",
    "NotCommutingError",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PairBound",
    "PoolingResult",
    "RMaximalityReport",
    "SdpProblem",
    "SdpSolution",
    "SingularLogError",
    "SolveStatus",
    "SolverFailureError",
    "StateSet",
    "SupportProjector",
    "adjoint_identity_residual",
    "bfm_pair_upper_bound",
    "bloch_vector",
    "dualize",
    "eig_hermitian",
    "fig1_average",
    "fig1_curve",
    "fig1_point",
    "fig2_curve",
    "fig2_point",
    "is_compatible",
    "k_bfm",
    "k_es",
    "k_pp",
    "matrix_abs",
    "matrix_exp",
    "matrix_log",
    "maxent_estimate",
    "oracle_bfm_commuting",
    "oracle_bfm_qubit_pair",
    "oracle_es",
    "oracle_pp_pair",
    "pool_classical",
    "pool_measurement",
    "solve",
    "support_projector",
    "supports_intersection_dim",
    "trace_distance",
    "verify_r_maximality",
    "verify_solution",
    "von_neumann_entropy",
]
