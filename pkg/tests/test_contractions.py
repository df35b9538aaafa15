import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockbench import (
    check_constraints,
    commutator_generators,
    cp_apply,
    purity,
    spectral_radius,
    validate,
)
from fockbench.errors import InvalidParameterError, NotARowContractionError
from fockbench.ideals import NcPolynomial
from fockbench.words import Word


def brute_force_word_sum(mats, k):
    """Oracle: sum over all words of length k of T_alpha T_alpha^*."""
    n = len(mats)
    dim = mats[0].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for word in itertools.product(range(n), repeat=k):
        prod = np.eye(dim, dtype=complex)
        for letter in word:
            prod = prod @ mats[letter]
        total += prod @ prod.conj().T
    return total


def random_row_contraction(rng, n, dim, margin=1.05):
    mats = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(n)]
    norm = np.linalg.norm(np.concatenate(mats, axis=1), 2)
    return validate([m / (norm * margin) for m in mats])


class TestValidate:
    def test_zero_contraction_has_full_defects(self):
        rc = validate([np.zeros((1, 1))])
        assert np.allclose(rc.delta, np.eye(1))
        assert np.allclose(rc.delta_star, np.eye(1))
        assert rc.defect_rank == 1 and rc.defect_star_rank == 1

    def test_unitary_scalar_has_trivial_defects(self):
        rc = validate([np.array([[np.exp(0.7j)]])])
        assert rc.defect_rank == 0
        assert rc.defect_star_rank == 0

    def test_coisometric_scalar_pair(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        assert np.allclose(rc.row_gram(), np.eye(1))
        assert rc.defect_rank == 0
        # column defect of the coisometric pair has rank 1 on C^2
        assert rc.defect_star_rank == 1
        assert np.linalg.norm(rc.delta_star @ rc.delta_star + rc.row_matrix.conj().T @ rc.row_matrix - np.eye(2)) < 1e-12

    def test_rejects_expansive_tuple(self):
        with pytest.raises(NotARowContractionError) as err:
            validate([np.array([[1.2]])])
        assert err.value.excess > 0.4

    def test_defect_identities(self):
        rng = np.random.default_rng(3)
        rc = random_row_contraction(rng, 3, 4)
        assert np.linalg.norm(rc.delta @ rc.delta + rc.row_gram() - np.eye(4), 2) < 1e-12
        row = rc.row_matrix
        assert np.linalg.norm(rc.delta_star @ rc.delta_star + row.conj().T @ row - np.eye(12), 2) < 1e-12


class TestCpApply:
    def test_zero_iterate_is_identity_map(self):
        rng = np.random.default_rng(0)
        rc = random_row_contraction(rng, 2, 3)
        x = np.diag([1.0, 2.0, 3.0]).astype(complex)
        assert np.array_equal(cp_apply(rc, x, 0), x)

    def test_nilpotent_power_vanishes(self):
        jordan = np.zeros((3, 3))
        jordan[0, 1] = jordan[1, 2] = 1.0
        rc = validate([jordan])
        assert np.linalg.norm(cp_apply(rc, np.eye(3), 3)) == 0.0

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matches_word_sum_oracle(self, k):
        rng = np.random.default_rng(11)
        rc = random_row_contraction(rng, 2, 3)
        oracle = brute_force_word_sum(list(rc.matrices), k)
        assert np.linalg.norm(cp_apply(rc, np.eye(3), k) - oracle, 2) < 1e-12

    def test_monotone_decreasing_in_operator_order(self):
        rng = np.random.default_rng(7)
        rc = random_row_contraction(rng, 2, 4)
        prev = np.eye(4, dtype=complex)
        for _ in range(6):
            nxt = cp_apply(rc, prev)
            gap_eigs = np.linalg.eigvalsh(prev - nxt)
            assert gap_eigs.min() > -1e-12
            prev = nxt


class TestPurity:
    def test_coisometric_tuple_is_not_pure(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        res = purity(rc)
        assert not res.is_pure
        assert np.allclose(res.q_limit, np.eye(1))

    def test_nilpotent_tuple_is_pure(self):
        jordan = np.zeros((3, 3))
        jordan[0, 1] = jordan[1, 2] = 1.0
        res = purity(validate([jordan]))
        assert res.is_pure
        assert np.linalg.norm(res.q_limit) == 0.0

    def test_scalar_decay_rate(self):
        r = 0.9
        res = purity(validate([np.array([[r]])]), tol=1e-10)
        assert res.is_pure
        predicted = np.log(1e-10) / np.log(r**2)
        assert res.k_used < 2 * predicted

    def test_purity_is_scale_consistent(self):
        rng = np.random.default_rng(21)
        mats = [rng.standard_normal((3, 3)) for _ in range(2)]
        norm = np.linalg.norm(np.concatenate(mats, axis=1), 2)
        rc = validate([0.9 * m / norm for m in mats])
        assert purity(rc).is_pure

    def test_rejects_nonpositive_tolerance(self):
        rc = validate([np.zeros((1, 1))])
        with pytest.raises(InvalidParameterError):
            purity(rc, tol=0.0)


class TestSpectralRadius:
    def test_scalar(self):
        assert abs(spectral_radius(validate([np.array([[0.37]])])) - 0.37) < 1e-12

    def test_nilpotent(self):
        jordan = np.zeros((4, 4))
        jordan[0, 1] = jordan[1, 2] = jordan[2, 3] = 1.0
        assert spectral_radius(validate([0.5 * jordan])) < 1e-8

    def test_scaled_unitary_pair(self):
        u1 = np.diag([1.0, np.exp(0.4j)])
        u2 = np.array([[0, 1], [1, 0]], dtype=complex)
        rc = validate([u1 / np.sqrt(2), u2 / np.sqrt(2)])
        assert abs(spectral_radius(rc) - 1.0) < 1e-10


class TestCheckConstraints:
    def test_commuting_diagonals(self):
        rc = validate([np.diag([0.2, 0.3]), np.diag([0.1, -0.4])])
        assert max(check_constraints(rc, commutator_generators(2))) < 1e-15

    def test_noncommuting_pair_reports_commutator_norm(self):
        a = np.array([[0, 0.5], [0, 0]])
        b = np.array([[0.5, 0], [0, -0.5]])
        rc = validate([a, b])
        expected = np.linalg.norm(a @ b - b @ a, 2)
        res = check_constraints(rc, [NcPolynomial({Word((1, 2)): 1.0, Word((2, 1)): -1.0})])
        assert abs(res[0] - expected) < 1e-14


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95))
def test_scalar_purity_limit_is_zero(r):
    res = purity(validate([np.array([[r]])]), tol=1e-8)
    assert res.is_pure


def test_purity_unit_eigenspace_diagnostic():
    mixed = []
    jordan = np.zeros((2, 2)); jordan[0, 1] = 1.0
    mixed.append(np.block([[jordan, np.zeros((2, 1))], [np.zeros((1, 2)), np.eye(1)]]))
    res = purity(validate(mixed))
    space = res.unit_eigenspace()
    assert space.shape[1] == 1
    assert abs(abs(space[2, 0]) - 1.0) < 1e-10
    assert purity(validate([np.zeros((1, 1))])).unit_eigenspace().shape[1] == 0
