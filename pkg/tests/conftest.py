"""Shared random-instance generators for the test suite."""

import numpy as np

from qcompat import DensityMatrix, StateSet


def random_density(rng, dim, rank=None):
    """Haar-ish random density matrix from a Ginibre factor."""
    r = rank or dim
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def random_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_probability_vector(rng, dim):
    p = rng.dirichlet(np.ones(dim))
    return p / p.sum()


def random_commuting_set(rng, dim, k):
    """States diagonal in one random common basis."""
    u = random_unitary(rng, dim)
    states = []
    for _ in range(k):
        p = random_probability_vector(rng, dim)
        states.append(DensityMatrix(u @ np.diag(p) @ u.conj().T))
    return StateSet(tuple(states))


def random_state_set(rng, dim, k):
    return StateSet(tuple(random_density(rng, dim) for _ in range(k)))


def ket_projector(amplitudes):
    v = np.asarray(amplitudes, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))
