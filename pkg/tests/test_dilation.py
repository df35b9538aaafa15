import itertools

import numpy as np
import pytest

from fockbench import (
    TruncatedFock,
    build_constrained_subspace,
    build_dilation,
    commutator_generators,
    constrained_shifts,
    dilation_index,
    left_creation_tuple,
    maximal_constrained_piece,
    model_space,
    shift_multiplicity,
    validate,
    verify_dilation,
    wold_decompose,
)
from fockbench.errors import InvalidParameterError, PreconditionError


def nilpotent_commuting_pair():
    a = np.array([[0, 1 / np.sqrt(2)], [0, 0]], dtype=complex)
    b = np.array([[0, 1j / np.sqrt(2)], [0, 0]], dtype=complex)
    return validate([a, b])


def mixed_pair():
    """Block-diagonal: nilpotent commuting pair plus a coisometric scalar pair."""
    base = nilpotent_commuting_pair()
    out = []
    for t in base.matrices:
        out.append(np.block([
            [t, np.zeros((2, 1))],
            [np.zeros((1, 2)), np.array([[1 / np.sqrt(2)]])],
        ]))
    return validate(out)


def free_cs(n, top):
    return build_constrained_subspace(TruncatedFock(n, top), [])


def commutative_cs(n, top):
    return build_constrained_subspace(TruncatedFock(n, top), commutator_generators(n))


class TestBuildDilation:
    def test_pure_tuple_has_no_cuntz_block(self):
        blocks = build_dilation(nilpotent_commuting_pair(), commutative_cs(2, 4))
        assert blocks.k_dim == 0
        assert blocks.isometry_defect < 1e-12
        assert blocks.cuntz_residual == 0.0

    def test_coisometric_tuple_is_all_cuntz(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        blocks = build_dilation(rc, commutative_cs(2, 3))
        assert blocks.k_dim == 1
        assert max(np.linalg.norm(z - t) for z, t in zip(blocks.z_ops, rc.matrices)) < 1e-12
        assert blocks.isometry_defect < 1e-12

    def test_mixed_tuple_splits_by_blocks(self):
        rc = mixed_pair()
        blocks = build_dilation(rc, commutative_cs(2, 4))
        assert blocks.k_dim == 1
        assert blocks.cuntz_residual < 1e-12
        assert max(blocks.constraint_residuals) < 1e-12
        assert blocks.isometry_defect < 1e-12

    def test_constraint_violation_rejected(self):
        a = np.array([[0, 0.5], [0, 0]])
        b = np.array([[0.5, 0], [0, -0.5]])
        with pytest.raises(PreconditionError):
            build_dilation(validate([a, b]), commutative_cs(2, 3))


class TestVerifyDilation:
    def test_zero_scalar(self):
        rc = validate([np.zeros((1, 1))])
        rep = verify_dilation(build_dilation(rc, free_cs(1, 4)))
        assert rep.residual < 1e-13

    def test_coisometric(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        rep = verify_dilation(build_dilation(rc, commutative_cs(2, 3)))
        assert rep.residual < 1e-12

    def test_decayed_commuting_tuple(self):
        rc = validate([np.diag([0.22, -0.15]), np.diag([0.1, 0.2])])
        rep = verify_dilation(build_dilation(rc, commutative_cs(2, 8)))
        assert rep.residual <= rep.budget
        assert rep.residual < 1e-5  # top-slice mass decays like the purity tail

    def test_random_commuting_tuple_beyond_decay(self):
        rng = np.random.default_rng(42)
        rc = validate([np.diag(0.05 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)))
                       for _ in range(2)])
        rep = verify_dilation(build_dilation(rc, commutative_cs(2, 8)))
        assert rep.residual < 1e-9


class TestDilationIndex:
    def test_zero_scalar(self):
        assert dilation_index(validate([np.zeros((1, 1))])) == 1

    def test_coisometric(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        assert dilation_index(rc) == 0

    def test_rank_two_commuting_example(self):
        rc = validate([np.diag([0.4, 0.1]), np.diag([0.2, 0.3])])
        assert dilation_index(rc) == 2


class TestWold:
    def test_unitary_scalar(self):
        split = wold_decompose([np.array([[np.exp(0.4j)]])])
        assert split.multiplicity == 0
        assert split.k0_basis.shape[1] == 0
        assert split.k1_basis.shape[1] == 1

    def test_jordan_shift(self):
        jordan = np.zeros((4, 4))
        jordan[0, 1] = jordan[1, 2] = jordan[2, 3] = 1.0
        split = wold_decompose([jordan])
        assert split.multiplicity == 1
        assert split.k0_basis.shape[1] == 4
        assert split.idempotency_defect < 1e-14

    def test_block_diagonal_two_paths_agree(self):
        jordan = np.zeros((3, 3))
        jordan[0, 1] = jordan[1, 2] = 1.0
        v = np.block([
            [jordan, np.zeros((3, 1))],
            [np.zeros((1, 3)), np.array([[np.exp(0.9j)]])],
        ])
        split = wold_decompose([v])
        assert split.multiplicity == 1
        assert split.k0_basis.shape[1] == 3
        assert split.two_path_dim_match
        assert split.two_path_angles.max(initial=0.0) < 1e-8
        # K_0 is exactly the Jordan block
        proj = split.k0_basis @ split.k0_basis.conj().T
        expected = np.diag([1.0, 1.0, 1.0, 0.0])
        assert np.linalg.norm(proj - expected, 2) < 1e-10

    def test_strict_scalar_contraction_is_all_shift(self):
        split = wold_decompose([np.array([[0.5]])])
        assert split.multiplicity == 1
        assert split.k0_basis.shape[1] == 1
        assert split.k1_basis.shape[1] == 0
        assert split.two_path_dim_match
        assert split.two_path_angles.max(initial=0.0) < 1e-8

    def test_truncated_creation_block_plus_cuntz(self):
        f = TruncatedFock(2, 3)
        s = left_creation_tuple(f)
        z = [np.array([[1 / np.sqrt(2)]]), np.array([[1j / np.sqrt(2)]])]
        v = [np.block([
            [si, np.zeros((f.dim, 1))],
            [np.zeros((1, f.dim)), zi],
        ]) for si, zi in zip(s, z)]
        split = wold_decompose(v)
        assert split.k0_basis.shape[1] == f.dim
        assert split.k1_basis.shape[1] == 1
        assert split.idempotency_defect < 1e-14
        assert split.two_path_angles.max(initial=0.0) < 1e-8


class TestShiftMultiplicity:
    def test_tensor_multiplicity_of_constrained_shift(self):
        cs = commutative_cs(2, 3)
        left, _ = constrained_shifts(cs)
        for mult in (1, 2, 3):
            eye = np.eye(mult, dtype=complex)
            tensored = [np.kron(b, eye) for b in left]
            res = shift_multiplicity(tensored)
            assert res.multiplicity == mult
            assert res.is_shift

    def test_unitary_is_not_a_shift(self):
        res = shift_multiplicity([np.array([[np.exp(0.2j)]])])
        assert res.multiplicity == 0
        assert not res.is_shift

    def test_jordan_shift(self):
        jordan = np.zeros((3, 3))
        jordan[0, 1] = jordan[1, 2] = 1.0
        res = shift_multiplicity([jordan])
        assert res.multiplicity == 1
        assert res.is_shift


class TestModelSpace:
    def test_zero_scalar_models_on_constants(self):
        rc = validate([np.zeros((1, 1))])
        res = model_space(rc, free_cs(1, 5))
        assert res.basis.shape[1] == 1
        assert res.projection_residual < 1e-12
        assert res.equivalence_residual < 1e-12
        # the compression of the shift to the constants is the zero operator
        assert np.linalg.norm(res.compressed[0]) < 1e-12

    def test_scalar_contraction_model(self):
        t = 0.5
        rc = validate([np.array([[t]])])
        res = model_space(rc, free_cs(1, 24))
        assert res.basis.shape[1] == 1
        assert res.equivalence_residual < 1e-9
        assert abs(res.compressed[0][0, 0] - t) < 1e-6

    def test_commuting_nilpotent_pair(self):
        rc = nilpotent_commuting_pair()
        res = model_space(rc, commutative_cs(2, 4))
        assert res.basis.shape[1] == 2
        assert res.projection_residual < 1e-10
        assert res.equivalence_residual < 1e-10
        assert res.complement_residual < 1e-10

    def test_non_pure_rejected(self):
        rc = validate([np.array([[1 / np.sqrt(2)]]), np.array([[1 / np.sqrt(2)]])])
        with pytest.raises(PreconditionError):
            model_space(rc, commutative_cs(2, 3))


class TestMaximalConstrainedPiece:
    def test_commutators_on_truncated_creation_recover_symmetric_space(self):
        f = TruncatedFock(2, 4)
        s = left_creation_tuple(f)
        cs = build_constrained_subspace(f, commutator_generators(2))
        basis, diag = maximal_constrained_piece(s, commutator_generators(2), k_max=f.max_degree, cs=cs)
        # spans coincide exactly in the graded case
        gap = basis @ basis.conj().T - cs.projection
        assert np.linalg.norm(gap, 2) < 1e-10
        assert max(diag["compressed_residuals"]) < 1e-10
        assert diag["cs_max_angle"] < 1e-8

    def test_commuting_tuple_is_its_own_piece(self):
        rc = validate([np.diag([0.2, 0.3]), np.diag([0.4, 0.1])])
        basis, diag = maximal_constrained_piece(list(rc.matrices), commutator_generators(2))
        assert basis.shape[1] == 2
        assert max(diag["compressed_residuals"]) < 1e-12

    def test_single_generator_range_complement(self):
        t = np.array([[0.0, 0.5], [0.0, 0.0]])
        from fockbench import NcPolynomial

        basis, diag = maximal_constrained_piece([t], [NcPolynomial.monomial([1])])
        # complement of span{T_alpha T e_j} = complement of range(T) = kernel of T^*
        assert basis.shape[1] == 1
        assert np.linalg.norm(t.conj().T @ basis) < 1e-12

    def test_rejects_empty_generators(self):
        with pytest.raises(InvalidParameterError):
            maximal_constrained_piece([np.zeros((2, 2))], [])


class TestWoldPartialSumIdentities:
    def test_defect_translates_resolve_the_shift_projection(self):
        # sum over words up to the nilpotency depth of V_alpha Q V_alpha^*
        # recovers the projection onto the shift part, and the CP powers of
        # the identity converge to the projection onto the residual part.
        f = TruncatedFock(2, 3)
        s = left_creation_tuple(f)
        z = [np.array([[1 / np.sqrt(2)]]), np.array([[1j / np.sqrt(2)]])]
        v = [np.block([
            [si, np.zeros((f.dim, 1))],
            [np.zeros((1, f.dim)), zi],
        ]) for si, zi in zip(s, z)]
        split = wold_decompose(v)
        dim = v[0].shape[0]
        q = split.q
        # direct word sum of V_alpha Q V_alpha^* up to the nilpotency depth
        total = q.copy()
        for depth in range(1, f.max_degree + 2):
            for word in itertools.product(range(2), repeat=depth):
                prod = np.eye(dim, dtype=complex)
                for letter in word:
                    prod = prod @ v[letter]
                total += prod @ q @ prod.conj().T
        p_k0 = split.k0_basis @ split.k0_basis.conj().T
        assert np.linalg.norm(total - p_k0, 2) < 1e-10
        # CP powers of the identity converge to the residual projection
        x = np.eye(dim, dtype=complex)
        for _ in range(f.max_degree + 2):
            x = sum(t @ x @ t.conj().T for t in v)
        p_k1 = split.k1_basis @ split.k1_basis.conj().T
        assert np.linalg.norm(x - p_k1, 2) < 1e-10

    def test_defect_range_is_joint_kernel_of_adjoints(self):
        jordan = np.zeros((3, 3))
        jordan[0, 1] = jordan[1, 2] = 1.0
        v = [np.block([
            [jordan, np.zeros((3, 1))],
            [np.zeros((1, 3)), np.array([[np.exp(0.7j)]])],
        ])]
        split = wold_decompose(v)
        # Q is a projection here; its range is the joint kernel of the adjoints
        from fockbench._linalg import range_basis

        q_range = range_basis(split.q)
        stacked = np.concatenate([m.conj().T @ q_range for m in v], axis=0)
        assert np.linalg.norm(stacked) < 1e-12
        assert q_range.shape[1] == split.multiplicity
