import numpy as np
import pytest

from conftest import (
    ket_projector,
    random_commuting_set,
    random_density,
    random_pure,
    random_state_set,
    random_unitary,
)
from qcompat import (
    DensityMatrix,
    NotCommutingError,
    StateSet,
    bfm_pair_upper_bound,
    is_compatible,
    k_bfm,
    k_es,
    k_pp,
    oracle_bfm_commuting,
    oracle_bfm_qubit_pair,
    oracle_es,
    oracle_pp_pair,
    trace_distance,
)
from qcompat.qmat import PAULI_X

EYE2 = np.eye(2)
KET0 = ket_projector([1, 0])
KET1 = ket_projector([0, 1])
KET_PLUS = ket_projector([1, 1])
MIXED = DensityMatrix(EYE2 / 2)


def pair(a, b):
    return StateSet((a, b))


class TestStateSet:
    def test_needs_two(self):
        with pytest.raises(ValueError):
            StateSet((KET0,))

    def test_equal_dims(self):
        with pytest.raises(Exception):
            StateSet((KET0, DensityMatrix(np.eye(3) / 3)))

    def test_unique_labels(self):
        with pytest.raises(ValueError):
            StateSet((KET0, KET1), labels=("a", "a"))

    def test_default_labels(self):
        assert pair(KET0, KET1).labels == ("state-0", "state-1")


class TestBfm:
    def test_identical(self):
        rng = np.random.default_rng(0)
        rho = random_density(rng, 3)
        assert k_bfm(pair(rho, rho)).value == pytest.approx(1.0, abs=1e-7)

    def test_commuting_pair(self):
        rep = k_bfm(pair(KET0, DensityMatrix(np.diag([0.3, 0.7]))))
        assert rep.value == pytest.approx(0.3, abs=1e-7)
        assert rep.upper_bound_trace_distance == pytest.approx(0.3, abs=1e-12)
        assert rep.bound_attained
        assert rep.value <= rep.upper_bound_trace_distance + 1e-8

    def test_mixed_vs_tilted(self):
        rep = k_bfm(pair(MIXED, DensityMatrix((EYE2 + PAULI_X) / 2)))
        assert rep.value == pytest.approx(0.5, abs=1e-7)

    def test_orthogonal(self):
        assert k_bfm(pair(KET0, KET1)).value == pytest.approx(0.0, abs=1e-7)

    def test_witness_feasible(self):
        rng = np.random.default_rng(1)
        ss = random_state_set(rng, 3, 3)
        rep = k_bfm(ss)
        r = rep.primal_witness
        assert np.linalg.eigvalsh(r)[0] >= -1e-9
        for m in ss.matrices():
            assert np.linalg.eigvalsh(m - r)[0] >= -1e-7
        assert np.trace(r).real == pytest.approx(rep.value, abs=1e-7)

    def test_dual_certificate_feasible(self):
        rng = np.random.default_rng(2)
        ss = random_state_set(rng, 3, 3)
        rep = k_bfm(ss)
        for m in rep.dual_certificate:
            assert np.linalg.eigvalsh(m)[0] >= -1e-9
        assert np.linalg.eigvalsh(sum(rep.dual_certificate) - np.eye(3))[0] >= -1e-7
        dual_value = sum(np.trace(rho @ m).real
                         for rho, m in zip(ss.matrices(), rep.dual_certificate))
        # any feasible dual point upper-bounds the measure
        assert dual_value >= rep.value - 1e-7
        assert rep.gap <= 1e-7


class TestPp:
    def test_identical(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng, 2)
        assert k_pp(pair(rho, rho)).value == pytest.approx(1.0, abs=1e-7)

    def test_orthogonal(self):
        assert k_pp(pair(KET0, KET1)).value == pytest.approx(0.0, abs=1e-7)

    def test_zero_plus_pair(self):
        rep = k_pp(pair(KET0, KET_PLUS))
        assert rep.value == pytest.approx(1.0 - 1.0 / np.sqrt(2.0), abs=1e-7)

    def test_certificate_is_measurement(self):
        rng = np.random.default_rng(4)
        ss = random_state_set(rng, 3, 3)
        rep = k_pp(ss)
        for m in rep.dual_certificate:
            assert np.linalg.eigvalsh(m)[0] >= -1e-9
        total = sum(rep.dual_certificate)
        assert np.linalg.norm(total - np.eye(3)) <= 1e-8

    def test_witness_hermitian_not_necessarily_psd(self):
        rep = k_pp(pair(KET0, KET1))
        n = rep.primal_witness
        assert np.allclose(n, n.conj().T, atol=1e-10)
        for m in (KET0.matrix, KET1.matrix):
            assert np.linalg.eigvalsh(m - n)[0] >= -1e-7


class TestEs:
    def test_identical(self):
        rng = np.random.default_rng(5)
        rho = random_density(rng, 2)
        assert k_es(pair(rho, rho)).value == pytest.approx(0.5, abs=1e-7)

    def test_unequal_supports(self):
        assert k_es(pair(KET0, MIXED)).value == pytest.approx(0.0, abs=1e-7)

    def test_diagonal_pair(self):
        rep = k_es(pair(DensityMatrix(np.diag([0.5, 0.5])),
                        DensityMatrix(np.diag([0.75, 0.25]))))
        assert rep.value == pytest.approx(1.0 / 3.0, abs=1e-7)

    def test_value_range(self):
        rng = np.random.default_rng(6)
        for k in (2, 3, 4):
            ss = random_state_set(rng, 3, k)
            rep = k_es(ss)
            assert -1e-9 <= rep.value <= 1.0 / k + 1e-7

    def test_alpha_certificate_feasible(self):
        rng = np.random.default_rng(7)
        ss = random_state_set(rng, 3, 3)
        rep = k_es(ss)
        total = sum(ss.matrices())
        summed = sum(rep.dual_certificate)
        herm = 0.5 * (total @ summed + summed @ total)
        assert np.sum(rep.dual_alphas) >= 1.0 - 1e-7
        assert np.all(np.diag(herm).real >= rep.dual_alphas - 1e-9)
        dual_value = sum(np.trace(rho @ m).real
                         for rho, m in zip(ss.matrices(), rep.dual_certificate))
        assert dual_value >= rep.value - 1e-7

    def test_rank_deficient_common_support(self):
        # equal supports but singular total: solved on supp(S)
        rep = k_es(pair(KET0, KET0))
        assert rep.value == pytest.approx(0.5, abs=1e-7)
        assert rep.gap <= 1e-7


class TestPairBound:
    def test_identical(self):
        rng = np.random.default_rng(8)
        rho = random_density(rng, 3)
        bound = bfm_pair_upper_bound(rho, rho)
        assert bound.value == pytest.approx(1.0, abs=1e-12)
        assert bound.attained

    def test_not_attained_case(self):
        # D(|0><0|, (I+X)/2) = sqrt(2)/2, so the bound is 1 - sqrt(2)/2 and
        # the candidate has eigenvalues {1, 1 - sqrt(2)}/2, hence not attained
        bound = bfm_pair_upper_bound(KET0, DensityMatrix((EYE2 + PAULI_X) / 2))
        assert bound.value == pytest.approx(1.0 - np.sqrt(2.0) / 2.0, abs=1e-12)
        assert not bound.attained
        vals = np.linalg.eigvalsh(bound.candidate)
        assert vals[0] == pytest.approx((1.0 - np.sqrt(2.0)) / 2.0, abs=1e-12)
        assert vals[1] == pytest.approx(0.5, abs=1e-12)

    def test_commuting_attained(self):
        bound = bfm_pair_upper_bound(KET0, DensityMatrix(np.diag([0.3, 0.7])))
        assert bound.value == pytest.approx(0.3, abs=1e-12)
        assert bound.attained


class TestOracles:
    def test_commuting_examples(self):
        assert oracle_bfm_commuting(
            pair(KET0, DensityMatrix(np.diag([0.3, 0.7])))) == pytest.approx(0.3)
        rho = DensityMatrix(np.diag([0.2, 0.8]))
        assert oracle_bfm_commuting(pair(rho, rho)) == pytest.approx(1.0)
        a = DensityMatrix(np.diag([0.5, 0.5, 0.0]))
        b = DensityMatrix(np.diag([0.0, 0.5, 0.5]))
        assert oracle_bfm_commuting(pair(a, b)) == pytest.approx(0.5)

    def test_commuting_rejects(self):
        with pytest.raises(NotCommutingError):
            oracle_bfm_commuting(pair(KET0, KET_PLUS))

    def test_pp_pair_examples(self):
        assert oracle_pp_pair(KET0, KET1) == pytest.approx(0.0, abs=1e-12)
        assert oracle_pp_pair(KET0, KET0) == pytest.approx(1.0, abs=1e-12)
        assert oracle_pp_pair(KET0, KET_PLUS) == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-12)

    def test_es_examples(self):
        rng = np.random.default_rng(9)
        rho = random_density(rng, 2)
        assert oracle_es(pair(rho, rho)) == pytest.approx(0.5, abs=1e-10)
        assert oracle_es(pair(KET0, MIXED)) == 0.0
        assert oracle_es(pair(DensityMatrix(np.diag([0.5, 0.5])),
                              DensityMatrix(np.diag([0.75, 0.25])))) == pytest.approx(1 / 3)

    def test_equivalence_commuting(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            ss = random_commuting_set(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
            assert k_bfm(ss).value == pytest.approx(oracle_bfm_commuting(ss), abs=1e-6)

    def test_equivalence_pp_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            dim = int(rng.integers(2, 5))
            a, b = random_density(rng, dim), random_density(rng, dim)
            assert k_pp(pair(a, b)).value == pytest.approx(oracle_pp_pair(a, b), abs=1e-6)

    def test_equivalence_es(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            ss = random_state_set(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
            assert k_es(ss).value == pytest.approx(oracle_es(ss), abs=1e-6)

    def test_equivalence_qubit_geometry(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            a, b = random_density(rng, 2), random_density(rng, 2)
            assert k_bfm(pair(a, b)).value == pytest.approx(
                oracle_bfm_qubit_pair(a, b), abs=1e-6)

    def test_qubit_geometry_pure_cases(self):
        assert oracle_bfm_qubit_pair(KET0, KET1) == pytest.approx(0.0, abs=1e-10)
        assert oracle_bfm_qubit_pair(KET0, KET0) == pytest.approx(1.0, abs=1e-12)
        eps_pair = DensityMatrix(np.diag([0.01, 0.99]))
        assert oracle_bfm_qubit_pair(KET0, eps_pair) == pytest.approx(0.01, abs=1e-9)


class TestCompatiblePredicate:
    def test_epsilon_pair(self):
        eps = 1e-6
        assert is_compatible(pair(KET0, DensityMatrix(np.diag([eps, 1 - eps]))))

    def test_orthogonal(self):
        assert not is_compatible(pair(KET0, KET1))

    def test_full_rank(self):
        rng = np.random.default_rng(14)
        assert is_compatible(pair(random_density(rng, 3), random_density(rng, 3)))


class TestStructuralInvariants:
    def test_theorem_orderings(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            ss = random_state_set(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
            vb = k_bfm(ss).value
            vp = k_pp(ss).value
            ve = k_es(ss).value
            assert vp >= vb - 1e-7
            assert vb >= ve - 1e-7

    def test_monotone_in_set(self):
        rng = np.random.default_rng(16)
        for fn in (k_bfm, k_pp, k_es):
            states = [random_density(rng, 3) for _ in range(3)]
            small = fn(StateSet(tuple(states[:2]))).value
            large = fn(StateSet(tuple(states))).value
            assert large <= small + 1e-8

    def test_unitary_covariance(self):
        rng = np.random.default_rng(17)
        ss = random_state_set(rng, 3, 3)
        u = random_unitary(rng, 3)
        rotated = StateSet(tuple(
            DensityMatrix(u @ s.matrix @ u.conj().T) for s in ss.states))
        for fn in (k_bfm, k_pp, k_es):
            assert fn(rotated).value == pytest.approx(fn(ss).value, abs=1e-7)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(18)
        ss = random_state_set(rng, 2, 3)
        flipped = StateSet(tuple(reversed(ss.states)))
        for fn in (k_bfm, k_pp, k_es):
            assert fn(flipped).value == pytest.approx(fn(ss).value, abs=1e-7)

    def test_bfm_zero_iff_incompatible(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            # disjoint supports by construction: block-diagonal split
            a = np.zeros((4, 4), dtype=complex)
            b = np.zeros((4, 4), dtype=complex)
            a[:2, :2] = random_density(rng, 2).matrix
            b[2:, 2:] = random_density(rng, 2).matrix
            ss = pair(DensityMatrix(a), DensityMatrix(b))
            assert not is_compatible(ss)
            assert k_bfm(ss).value <= 1e-6

    def test_incompatible_pure_sets_give_zero_es(self):
        assert k_es(pair(KET0, KET1)).value <= 1e-6

    def test_raw_value_kept(self):
        rep = k_bfm(pair(KET0, KET1))
        assert rep.value >= 0.0
        assert rep.raw_value <= rep.value + 1e-12
