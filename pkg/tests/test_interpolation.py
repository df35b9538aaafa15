import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockbench import (
    NcPolynomial,
    PickProblem,
    TruncatedFock,
    build_constrained_subspace,
    commutator_generators,
    kernel_vector,
    pick_feasible,
    pick_matrix,
    q_commutator_generators,
    variety_membership,
)
from fockbench.errors import DegenerateInputError, OutOfBallError, PreconditionError
from fockbench.words import Word


def schwarz_problem(t):
    """Two scalar nodes 0 and 1/2 with targets 0 and t."""
    return PickProblem(n=1, points=np.array([[0.0], [0.5]]), targets=[np.array([[0.0]]), np.array([[t]])])


class TestVarietyMembership:
    def test_commutators_vanish_at_every_scalar_point(self):
        gens = commutator_generators(3)
        res = variety_membership([0.1, 0.2j, -0.3], gens, 3)
        assert res.member
        assert max(res.residuals) == 0.0

    def test_coordinate_generator_cuts_a_hyperplane(self):
        gen = [NcPolynomial({Word((1,)): 1.0})]
        assert variety_membership([0.0, 0.4], gen, 2).member
        assert not variety_membership([0.2, 0.4], gen, 2).member

    def test_q_commutator_zero_set(self):
        q = 0.5
        gens = q_commutator_generators(np.array([[1.0, q], [0.0, 1.0]]))
        # lambda_2 lambda_1 (1 - q) = 0 characterizes membership
        assert variety_membership([0.0, 0.3], gens, 2).member
        assert variety_membership([0.3, 0.0], gens, 2).member
        assert not variety_membership([0.3, 0.3], gens, 2).member

    def test_rejects_boundary_points(self):
        with pytest.raises(OutOfBallError):
            variety_membership([1.0, 0.0], [], 2)


class TestKernelVector:
    def test_origin_gives_vacuum(self):
        cs = build_constrained_subspace(TruncatedFock(2, 4), commutator_generators(2))
        res = kernel_vector(cs, [0.0, 0.0])
        v0 = cs.vacuum_vector()
        assert np.allclose(res.vector, v0)
        assert res.eigen_residual < 1e-14

    def test_scalar_geometric_vector(self):
        cs = build_constrained_subspace(TruncatedFock(1, 10), [])
        lam = 0.5
        res = kernel_vector(cs, [lam])
        expected = np.conj(lam) ** np.arange(11)
        assert np.allclose(res.vector, expected)
        # eigen-residual sits at the |lambda|^N tail scale
        assert res.eigen_residual < 2 * res.tail_bound
        assert res.eigen_residual > 0.5 * lam**11

    def test_commutative_point_within_tail(self):
        cs = build_constrained_subspace(TruncatedFock(2, 8), commutator_generators(2))
        res = kernel_vector(cs, [0.3, 0.4])
        assert res.eigen_residual <= 2 * res.tail_bound

    def test_membership_enforced(self):
        cs = build_constrained_subspace(
            TruncatedFock(2, 3), [NcPolynomial({Word((1,)): 1.0})]
        )
        with pytest.raises(PreconditionError):
            kernel_vector(cs, [0.2, 0.1])


class TestPickMatrix:
    def test_single_node_scalar(self):
        prob = PickProblem(n=1, points=np.array([[0.0]]), targets=[np.array([[0.3]])])
        m = pick_matrix(prob)
        assert m.shape == (1, 1)
        assert abs(m[0, 0] - (1 - 0.09)) < 1e-15

    def test_schwarz_determinant(self):
        for t in (0.2, 0.5, 0.7):
            m = pick_matrix(schwarz_problem(t))
            det = np.linalg.det(m).real
            expected = (1 - t * t) / 0.75 - 1.0
            assert abs(det - expected) < 1e-13

    def test_hermitian_bitwise(self):
        rng = np.random.default_rng(30)
        pts = 0.4 * (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)))
        targets = [0.5 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) for _ in range(3)]
        m = pick_matrix(PickProblem(n=2, points=pts, targets=targets))
        assert np.array_equal(m, m.conj().T)

    def test_zero_targets_give_kernel_gram(self):
        rng = np.random.default_rng(31)
        pts = 0.3 * rng.standard_normal((3, 2))
        prob = PickProblem(n=2, points=pts, targets=[np.zeros((1, 1))] * 3)
        m = pick_matrix(prob)
        # Cholesky succeeds after an eps shift: Gram matrices are PSD
        np.linalg.cholesky(m + 1e-12 * np.eye(3))
        # and the matrix agrees with the Gram matrix of truncated kernel vectors
        cs = build_constrained_subspace(TruncatedFock(2, 8), commutator_generators(2))
        vecs = [kernel_vector(cs, p).vector for p in pts]
        gram = np.array([[np.vdot(vecs[j], vecs[i]) for j in range(3)] for i in range(3)])
        tail = max(np.linalg.norm(p) for p in pts) ** 8
        assert np.linalg.norm(m - gram, 2) < 3 * tail + 1e-9

    def test_coincident_points_rejected(self):
        with pytest.raises(DegenerateInputError):
            PickProblem(n=1, points=np.array([[0.2], [0.2]]), targets=[np.eye(1), np.eye(1)])


class TestFeasibility:
    def test_schwarz_boundary_is_marginal(self):
        res = pick_feasible(schwarz_problem(0.5))
        assert res.feasible
        assert res.marginal
        assert abs(res.lambda_min) < 1e-12

    def test_schwarz_flips_across_boundary(self):
        delta = 1e-8
        below = pick_feasible(schwarz_problem(0.5 - delta))
        above = pick_feasible(schwarz_problem(0.5 + delta))
        assert below.feasible
        assert not above.feasible
        assert above.certificate is not None

    def test_clearly_infeasible_has_certificate(self):
        res = pick_feasible(schwarz_problem(0.6))
        assert not res.feasible
        m = pick_matrix(schwarz_problem(0.6))
        v = res.certificate
        rayleigh = float(np.real(v.conj() @ m @ v))
        assert rayleigh < 0

    def test_constant_contractive_targets_always_feasible(self):
        rng = np.random.default_rng(32)
        pts = 0.5 * (rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True) / 0.6
        a = 0.5 * np.eye(2)
        prob = PickProblem(n=2, points=pts, targets=[a] * 4)
        assert pick_feasible(prob).feasible

    def test_feasibility_invariant_under_joint_unitary_conjugation(self):
        rng = np.random.default_rng(33)
        pts = 0.4 * (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)))
        targets = [0.6 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) for _ in range(3)]
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        base = pick_feasible(PickProblem(n=2, points=pts, targets=targets))
        conj = pick_feasible(
            PickProblem(n=2, points=pts, targets=[q @ a @ q.conj().T for a in targets])
        )
        assert base.feasible == conj.feasible
        assert abs(base.lambda_min - conj.lambda_min) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.95))
def test_scalar_two_point_feasibility_matches_determinant(t):
    res = pick_feasible(schwarz_problem(t))
    det = (1 - t * t) / 0.75 - 1.0
    if abs(det) > 1e-9:
        assert res.feasible == (det >= 0)
