"""Two worked qubit experiments as theta-parameterized curves.

Curve 1 (observable sharing): a pure state r on the Bloch sphere is
summarized for Alice through the expectation of O = cos(theta/2) Z +
sin(theta/2) X and for Bob through the expectation of X.  The BFM measure
of the two resulting assignments has the closed form
1 - cos(theta/2) sqrt(r_x^2 + r_z^2) / 2 whenever the pair bound is
attained; the curve averages the measure over a uniform sphere sample.

Curve 2 (unknown measurement order): Alice measures in the basis tilted by
theta from Z, Bob measures X, neither knows which measurement acted first,
and each conditions only on their own outcome.  The curve is the average
compatibility of the conditioned pairs, weighted by outcome probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import compat
from .qmat import PAULI_X, PAULI_Z, DensityMatrix

EYE2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Fig1Point:
    theta: float
    bloch_r: tuple
    k_value: float
    formula_value: float
    bound_attained: bool


@dataclass(frozen=True)
class Fig1Average:
    theta: float
    mc_mean: float
    mc_stderr: float
    reference_formula: float
    samples: int
    attained_fraction: float


@dataclass(frozen=True)
class Fig2Point:
    theta: float
    k_pairs: np.ndarray
    probs: np.ndarray
    k_avg: float


def shared_observable(theta: float) -> np.ndarray:
    return np.cos(theta / 2.0) * PAULI_Z + np.sin(theta / 2.0) * PAULI_X


def closed_form_pair_value(theta: float, r) -> float:
    rx, _, rz = r
    return 1.0 - 0.5 * np.cos(theta / 2.0) * np.hypot(rx, rz)


def reference_average(theta: float) -> float:
    """Commonly quoted closed form for the sphere average, coefficient 1/3.

    Direct quadrature of the per-sample expression gives coefficient
    E[sqrt(1 - r_y^2)] / 2 = pi / 8 instead; both are reported so the
    discrepancy stays visible in every output.
    """
    return 1.0 - np.cos(theta / 2.0) / 3.0


def _pair_states(theta: float, r):
    rx, _, rz = r
    half = theta / 2.0
    o = rx * np.sin(half) + rz * np.cos(half)
    rho_a = 0.5 * (EYE2 + o * shared_observable(theta))
    rho_b = 0.5 * (EYE2 + rx * PAULI_X)
    return DensityMatrix(rho_a), DensityMatrix(rho_b)


def fig1_point(theta: float, bloch_r) -> Fig1Point:
    """One Bloch-sphere sample of curve 1, with the BFM value from the SDP."""
    r = np.asarray(bloch_r, dtype=float)
    if abs(np.linalg.norm(r) - 1.0) > 1e-12:
        raise ValueError(f"bloch_r must be a unit vector, got norm {np.linalg.norm(r)!r}")
    rho_a, rho_b = _pair_states(theta, r)
    report = compat.k_bfm(compat.StateSet((rho_a, rho_b)))
    formula = closed_form_pair_value(theta, r)
    return Fig1Point(
        theta=float(theta),
        bloch_r=tuple(r),
        k_value=report.value,
        formula_value=float(formula),
        bound_attained=bool(abs(report.value - formula) <= 1e-6),
    )


def sample_bloch_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform points on the unit sphere: uniform azimuth, uniform cos(polar)."""
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    cos_polar = rng.uniform(-1.0, 1.0, n)
    sin_polar = np.sqrt(1.0 - cos_polar ** 2)
    return np.column_stack((sin_polar * np.cos(phi), sin_polar * np.sin(phi), cos_polar))


def fig1_average(theta: float, samples: int = 10000, rng_seed: int = 42) -> Fig1Average:
    """Monte Carlo sphere average of the pair measure at one angle.

    Sampling is seeded and accumulated in a fixed order, so results are
    bitwise reproducible.  Pair values come from the exact Bloch-ball
    evaluator (equal to the SDP value; validated against it in the tests),
    which keeps full sweeps fast.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = np.random.default_rng(rng_seed)
    r = sample_bloch_sphere(rng, samples)
    half = theta / 2.0
    o = r[:, 0] * np.sin(half) + r[:, 2] * np.cos(half)
    alpha = o[:, None] * np.array([np.sin(half), 0.0, np.cos(half)])[None, :]
    beta = np.column_stack((r[:, 0], np.zeros(samples), np.zeros(samples)))
    k = compat.qubit_pair_values(alpha, beta)
    formula = 1.0 - 0.5 * np.cos(half) * np.hypot(r[:, 0], r[:, 2])
    attained = np.abs(k - formula) <= 1e-6
    return Fig1Average(
        theta=float(theta),
        mc_mean=float(np.mean(k)),
        mc_stderr=float(np.std(k, ddof=1) / np.sqrt(samples)),
        reference_formula=float(reference_average(theta)),
        samples=samples,
        attained_fraction=float(np.mean(attained)),
    )


def fig1_curve(theta_steps: int = 64, samples: int = 10000,
               rng_seed: int = 42) -> list[Fig1Average]:
    """Sphere-averaged curve on [0, pi], endpoints included.

    Every angle reuses the same seed, i.e. the same sphere sample, which
    makes the curve smooth in theta (common random numbers).
    """
    thetas = np.linspace(0.0, np.pi, theta_steps)
    return [fig1_average(t, samples, rng_seed) for t in thetas]


# ---------------------------------------------------------------------------
# Curve 2: unknown measurement order
# ---------------------------------------------------------------------------

def _projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def fig2_point(theta: float) -> Fig2Point:
    """Average conditioned-pair compatibility at one measurement angle.

    Outcome weights Tr[B_j A_i B_j + A_i B_j A_i] total 2 Tr[I] = 4; they
    are normalized by that total so the average is a proper expectation.
    The conditioned states divide by their own marginal weight and are
    unaffected by the normalization.
    """
    half = theta / 2.0
    a_proj = [
        _projector([np.cos(half), np.sin(half)]),
        _projector([-np.sin(half), np.cos(half)]),
    ]
    b_proj = [
        _projector([1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)]),
        _projector([1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)]),
    ]
    unnormalized = np.empty((2, 2), dtype=object)
    weights = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            block = b_proj[j] @ a_proj[i] @ b_proj[j] + a_proj[i] @ b_proj[j] @ a_proj[i]
            unnormalized[i, j] = block
            weights[i, j] = float(np.trace(block).real)
    total = weights.sum()
    probs = weights / total
    rho_a = [
        DensityMatrix((unnormalized[i, 0] + unnormalized[i, 1]) / weights[i, :].sum())
        for i in range(2)
    ]
    rho_b = [
        DensityMatrix((unnormalized[0, j] + unnormalized[1, j]) / weights[:, j].sum())
        for j in range(2)
    ]
    k_pairs = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            report = compat.k_bfm(compat.StateSet((rho_a[i], rho_b[j])))
            k_pairs[i, j] = report.value
    return Fig2Point(
        theta=float(theta),
        k_pairs=k_pairs,
        probs=probs,
        k_avg=float(np.sum(probs * k_pairs)),
    )


def fig2_curve(theta_steps: int = 64) -> list[Fig2Point]:
    thetas = np.linspace(0.0, np.pi, theta_steps)
    return [fig2_point(t) for t in thetas]
