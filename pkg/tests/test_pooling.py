import numpy as np
import pytest

from conftest import ket_projector, random_density
from qcompat import (
    IncompatibleStatesError,
    pool_measurement,
    verify_r_maximality,
)
from qcompat.qmat import DensityMatrix, null_space_basis

EYE2 = np.eye(2)
KET0 = ket_projector([1, 0])
KET1 = ket_projector([0, 1])


def assert_block_invariants(result, atol_sum=1e-8, atol_psd=-1e-9):
    total = sum(result.blocks)
    dim = result.state_a.dim
    assert np.linalg.norm(total - np.eye(dim)) <= atol_sum
    for blk in result.blocks:
        assert np.linalg.eigvalsh(blk)[0] >= atol_psd


class TestHandExamples:
    def test_maximally_mixed_pair(self):
        mixed = DensityMatrix(EYE2 / 2)
        result = pool_measurement(mixed, mixed)
        assert result.c == pytest.approx(2.0, abs=1e-7)
        assert result.k_value == pytest.approx(1.0, abs=1e-7)
        assert result.p00 == pytest.approx(1.0, abs=1e-8)
        assert np.allclose(result.joint_state.matrix, EYE2 / 2, atol=1e-7)
        assert np.allclose(result.e00, EYE2, atol=1e-7)
        for blk in result.blocks[1:]:
            assert np.linalg.norm(blk) <= 1e-7
        # the closed-form constant agrees here (bound attained)
        assert result.c_trace_bound == pytest.approx(result.c, abs=1e-7)

    def test_pure_pair(self):
        result = pool_measurement(KET0, KET0)
        assert result.c == pytest.approx(1.0, abs=1e-7)
        assert result.k_value == pytest.approx(1.0, abs=1e-7)
        assert result.p00 == pytest.approx(0.5, abs=1e-8)
        assert np.allclose(result.joint_state.matrix, KET0.matrix, atol=1e-7)
        assert np.allclose(result.e11, KET1.matrix, atol=1e-7)

    def test_commuting_pair(self):
        a = KET0
        b = DensityMatrix(np.diag([0.3, 0.7]))
        result = pool_measurement(a, b)
        assert result.c == pytest.approx(1.0, abs=1e-6)
        assert result.k_value == pytest.approx(0.3, abs=1e-7)
        assert result.p00 == pytest.approx(0.15, abs=1e-8)
        assert np.allclose(result.r_operator, np.diag([0.3, 0.0]), atol=1e-6)
        assert np.allclose(result.joint_state.matrix, KET0.matrix, atol=1e-6)
        assert np.allclose(result.e00, np.diag([0.3, 0.0]), atol=1e-6)
        assert np.allclose(result.e01, np.diag([0.7, 0.0]), atol=1e-6)
        assert np.allclose(result.e10, np.diag([0.0, 0.7]), atol=1e-6)
        assert np.allclose(result.e11, np.diag([0.0, 0.3]), atol=1e-6)


class TestRandomPairs:
    def test_invariants(self):
        rng = np.random.default_rng(0)
        for trial in range(40):
            dim = 2 + trial % 3
            a, b = random_density(rng, dim), random_density(rng, dim)
            result = pool_measurement(a, b)
            assert_block_invariants(result)
            # conditioning on Alice's (Bob's) outcome recovers the marginals
            pa = result.e00 + result.e01
            pb = result.e00 + result.e10
            assert np.linalg.norm(pa / np.trace(pa).real - a.matrix) <= 1e-7
            assert np.linalg.norm(pb / np.trace(pb).real - b.matrix) <= 1e-7
            # p00 identity
            assert result.p00 == pytest.approx(result.c * result.k_value / dim, abs=1e-9)
            assert 0.0 < result.p00 <= 1.0 + 1e-12
            # joint support inside both supports
            for state in (a, b):
                for v in null_space_basis(state.matrix).T:
                    overlap = float((v.conj() @ result.joint_state.matrix @ v).real)
                    assert overlap <= 1e-9
            assert result.disjoint_support_ok

    def test_identical_states_reproduce(self):
        rng = np.random.default_rng(1)
        rho = random_density(rng, 3)
        result = pool_measurement(rho, rho)
        assert np.linalg.norm(result.joint_state.matrix - rho.matrix) <= 1e-8

    def test_incompatible_rejected(self):
        with pytest.raises(IncompatibleStatesError):
            pool_measurement(KET0, KET1)


class TestRMaximality:
    def test_identical_states(self):
        rng = np.random.default_rng(2)
        rho = random_density(rng, 2)
        result = pool_measurement(rho, rho)
        report = verify_r_maximality(result, trials=100, rng_seed=5)
        assert report.violations == 0
        assert report.trials == 100

    def test_commuting_example(self):
        result = pool_measurement(KET0, DensityMatrix(np.diag([0.3, 0.7])))
        report = verify_r_maximality(result, trials=100, rng_seed=5)
        assert report.violations == 0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a, b = random_density(rng, 3), random_density(rng, 3)
        result = pool_measurement(a, b)
        r1 = verify_r_maximality(result, trials=50, rng_seed=11)
        r2 = verify_r_maximality(result, trials=50, rng_seed=11)
        assert r1 == r2
