"""Dilation blocks, Wold decompositions, shift multiplicity, model spaces,
and maximal constrained pieces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import (
    RANK_RTOL,
    complement_basis,
    eigh_descending,
    herm_sqrt_psd,
    matrix_rank,
    principal_angles,
    range_basis,
    spectral_norm,
    svd_positive,
)
from .charfn import assemble, constrained_characteristic
from .contractions import (
    RowContraction,
    check_constraints,
    cp_apply,
    purity,
    validate,
)
from .errors import InvalidParameterError, PreconditionError
from .ideals import ConstrainedSubspace, NcPolynomial, constrained_shifts, evaluate_polynomial
from .poisson import PoissonKernel, constrained_poisson_kernel


@dataclass
class DilationBlocks:
    """Constrained dilation data: the kernel block, the Cuntz block, and the
    isometric embedding between them."""

    rc: RowContraction
    cs: ConstrainedSubspace
    kernel: PoissonKernel
    y: np.ndarray
    k_basis: np.ndarray
    z_ops: list[np.ndarray]
    embedding: np.ndarray
    isometry_defect: float
    isometry_budget: float
    cuntz_residual: float
    constraint_residuals: list[float]
    lsq_residual: float

    @property
    def k_dim(self) -> int:
        return self.k_basis.shape[1]


def build_dilation(rc: RowContraction, cs: ConstrainedSubspace, purity_tol: float = 1e-13) -> DilationBlocks:
    """Split the tuple into a constrained-shift part and a Cuntz part.

    The Cuntz block acts on the closure of the range of the square root of
    the purity limit; its generators are the adjoints of the operators that
    implement T_i^* there, obtained by least squares on that range."""
    res = check_constraints(rc, cs.generators)
    if any(r > 1e-10 for r in res):
        raise PreconditionError("tuple violates the ideal generators")
    pur = purity(rc, tol=purity_tol)
    q = pur.q_limit
    y = herm_sqrt_psd(q, clamp=1e-10)
    # Directions with q-eigenvalue at the iteration-error level are
    # indistinguishable from zero; an absolute cutoff keeps pure tuples from
    # acquiring a noise Cuntz block.
    q_vals, q_vecs = eigh_descending(q)
    keep = q_vals > max(100.0 * purity_tol, RANK_RTOL * max(q_vals.max(initial=0.0), 0.0))
    k_basis = q_vecs[:, keep]
    kdim = k_basis.shape[1]

    y_hat = k_basis.conj().T @ y  # coordinates of Y on its range
    z_ops: list[np.ndarray] = []
    lsq_res = 0.0
    if kdim:
        # least squares against the full-row-rank y_hat via its Gram matrix
        gram = y_hat @ y_hat.conj().T
        for t in rc.matrices:
            rhs = k_basis.conj().T @ y @ t.conj().T
            lam = np.linalg.solve(gram.conj().T, (rhs @ y_hat.conj().T).conj().T).conj().T
            lsq_res = max(lsq_res, spectral_norm(lam @ y_hat - rhs))
            z_ops.append(lam.conj().T)
        cuntz = spectral_norm(sum(z @ z.conj().T for z in z_ops) - np.eye(kdim))
        constraint_res = [spectral_norm(evaluate_polynomial(p, z_ops)) for p in cs.generators]
    else:
        cuntz = 0.0
        constraint_res = [0.0 for _ in cs.generators]

    kernel = constrained_poisson_kernel(rc, cs)
    embedding = np.concatenate([kernel.matrix, y_hat], axis=0)
    gram = embedding.conj().T @ embedding
    defect = spectral_norm(gram - np.eye(rc.dim))
    n_top = cs.fock.max_degree + 1
    budget = spectral_norm(cp_apply(rc, np.eye(rc.dim), n_top) - q) + 1e-10
    return DilationBlocks(
        rc=rc,
        cs=cs,
        kernel=kernel,
        y=y,
        k_basis=k_basis,
        z_ops=z_ops,
        embedding=embedding,
        isometry_defect=defect,
        isometry_budget=budget,
        cuntz_residual=cuntz,
        constraint_residuals=constraint_res,
        lsq_residual=lsq_res,
    )


@dataclass
class DilationReport:
    residual: float
    budget: float
    passed: bool


def verify_dilation(blocks: DilationBlocks) -> DilationReport:
    """Residual of V T_i^* = (block-diagonal dilation)_i^* V.

    The kernel block of the identity is exact except for the top ambient
    degree slice; the reported budget combines that slice's mass with the
    least-squares residual of the Cuntz block."""
    rc, cs = blocks.rc, blocks.cs
    b_ops, _ = constrained_shifts(cs)
    ddim = blocks.kernel.defect_dim
    eye_d = np.eye(ddim, dtype=complex)
    kdim = blocks.k_dim
    residual = 0.0
    for i, t in enumerate(rc.matrices):
        lhs = blocks.embedding @ t.conj().T
        top = np.kron(b_ops[i].conj().T, eye_d) @ blocks.kernel.matrix
        bot = blocks.z_ops[i].conj().T @ blocks.embedding[-kdim:, :] if kdim else np.zeros((0, rc.dim))
        rhs = np.concatenate([top, bot], axis=0)
        residual = max(residual, spectral_norm(lhs - rhs))
    n_deg = cs.fock.max_degree
    slice_mass = spectral_norm(
        cp_apply(rc, np.eye(rc.dim), n_deg) - cp_apply(rc, np.eye(rc.dim), n_deg + 1)
    )
    t_norm = max(spectral_norm(t) for t in rc.matrices)
    budget = float(np.sqrt(max(slice_mass, 0.0))) * t_norm + blocks.lsq_residual + 1e-10
    return DilationReport(residual=residual, budget=budget, passed=residual <= budget)


def dilation_index(rc: RowContraction) -> int:
    """Rank of the row defect under the global cutoff."""
    return rc.defect_rank


@dataclass
class WoldSplit:
    q: np.ndarray
    k0_basis: np.ndarray
    k1_basis: np.ndarray
    multiplicity: int
    idempotency_defect: float
    two_path_angles: np.ndarray
    two_path_dim_match: bool


def wold_decompose(matrices: Sequence[np.ndarray], k_max: int | None = None) -> WoldSplit:
    """Split a row contraction into its shift part and its residual part.

    The shift part is computed two ways: as the span of word translates of
    the defect range, and as the null space of the purity limit; the
    principal angles between the two are reported, not assumed zero. The
    idempotency of the defect is likewise reported only."""
    rc = validate(matrices, tol=1e-8)
    dim = rc.dim
    q = np.eye(dim, dtype=complex) - rc.row_gram()
    idem = spectral_norm(q @ q - q)
    if k_max is None:
        k_max = dim
    k0_span = _word_translate_span([q], rc.matrices, k_max)

    pur = purity(rc, tol=1e-12)
    vals, vecs = eigh_descending(pur.q_limit)
    # absolute floor: a geometrically pure tuple leaves iteration-noise
    # eigenvalues that a relative rule would misread as a residual part
    null_mask = vals <= max(RANK_RTOL * vals.max(initial=0.0), 1e-10)
    k0_null = vecs[:, null_mask]

    angles = principal_angles(k0_span, k0_null)
    k1 = complement_basis(k0_span, dim)
    mult = matrix_rank(q)
    return WoldSplit(
        q=q,
        k0_basis=k0_span,
        k1_basis=k1,
        multiplicity=mult,
        idempotency_defect=idem,
        two_path_angles=angles,
        two_path_dim_match=k0_span.shape[1] == k0_null.shape[1],
    )


@dataclass
class ShiftMultiplicity:
    multiplicity: int
    is_shift: bool


def shift_multiplicity(matrices: Sequence[np.ndarray], tol: float = 1e-10) -> ShiftMultiplicity:
    """Multiplicity = rank of the defect; the tuple is a (constrained) shift
    exactly when its CP powers of the identity vanish in the limit."""
    rc = validate(matrices, tol=1e-8)
    q = np.eye(rc.dim, dtype=complex) - rc.row_gram()
    mult = matrix_rank(q)
    pur = purity(rc, tol=tol)
    return ShiftMultiplicity(multiplicity=mult, is_shift=pur.is_pure)


@dataclass
class ModelSpaceResult:
    basis: np.ndarray
    compressed: list[np.ndarray]
    projection_residual: float
    projection_budget: float
    equivalence_residual: float
    equivalence_budget: float
    complement_residual: float


def model_space(rc: RowContraction, cs: ConstrainedSubspace, purity_tol: float = 1e-10) -> ModelSpaceResult:
    """Model a pure constrained tuple inside (constrained subspace) tensor
    (row defect) as the complement of the range of its characteristic function.

    The assembled characteristic function at truncation is a near-partial
    isometry whose singular values cluster at 0 and 1 with a gap controlled
    by the purity tail, so the range split uses the half gap rather than the
    global relative cutoff."""
    pur = purity(rc, tol=purity_tol)
    if not pur.is_pure:
        raise PreconditionError("model space requires a pure row contraction")
    op = constrained_characteristic(rc, cs, cs.fock.max_degree)
    theta = assemble(op, cs=cs)
    kern = constrained_poisson_kernel(rc, cs)

    u, s = svd_positive(theta)
    rank = int(np.count_nonzero(s > 0.5)) if s.size else 0
    basis = u[:, rank:]

    p_model = basis @ basis.conj().T
    kk = kern.matrix @ kern.matrix.conj().T
    projection_residual = spectral_norm(p_model - kk)
    tail = spectral_norm(cp_apply(rc, np.eye(rc.dim), cs.fock.max_degree + 1))
    projection_budget = 3.0 * tail + 1e-9

    complement_residual = spectral_norm(
        p_model + theta @ theta.conj().T - np.eye(theta.shape[0], dtype=complex)
    )

    b_ops, _ = constrained_shifts(cs)
    eye_d = np.eye(kern.defect_dim, dtype=complex)
    equivalence_residual = 0.0
    compressed = []
    for i, b in enumerate(b_ops):
        lifted = np.kron(b, eye_d)
        compressed.append(basis.conj().T @ lifted @ basis)
        via_kernel = kern.matrix.conj().T @ lifted @ kern.matrix
        equivalence_residual = max(equivalence_residual, spectral_norm(via_kernel - rc.matrices[i]))
    equivalence_budget = spectral_norm(cp_apply(rc, np.eye(rc.dim), cs.fock.max_degree)) + 1e-9

    return ModelSpaceResult(
        basis=basis,
        compressed=compressed,
        projection_residual=projection_residual,
        projection_budget=projection_budget,
        equivalence_residual=equivalence_residual,
        equivalence_budget=equivalence_budget,
        complement_residual=complement_residual,
    )


def maximal_constrained_piece(
    matrices: Sequence[np.ndarray],
    polys: Sequence[NcPolynomial],
    k_max: int | None = None,
    cs: ConstrainedSubspace | None = None,
) -> tuple[np.ndarray, dict]:
    """Orthogonal complement of the span of all word translates of the
    generator ranges; the largest co-invariant piece on which the compressed
    tuple satisfies the constraints.

    When ``cs`` is passed (meaningful for the truncated creation tuple of the
    same ideal), the diagnostics report principal angles against its basis on
    the certified degree window."""
    polys = [p for p in polys if p.terms]
    if not polys:
        raise InvalidParameterError("need at least one nonzero polynomial")
    mats = [np.asarray(t, dtype=complex) for t in matrices]
    dim = mats[0].shape[0]
    if k_max is None:
        k_max = dim
    seeds = [evaluate_polynomial(p, mats) for p in polys]
    span = _word_translate_span(seeds, mats, k_max)
    basis = complement_basis(span, dim)
    compressed = [basis.conj().T @ t @ basis for t in mats]
    residuals = [spectral_norm(evaluate_polynomial(p, compressed)) for p in polys]
    diagnostics = {"span_rank": span.shape[1], "compressed_residuals": residuals}
    if cs is not None:
        if cs.fock.dim != dim:
            raise InvalidParameterError("comparison subspace lives on a different ambient space")
        window = cs.fock.degree_le_mask(cs.buffer_window)
        mask = window.astype(float)[:, None]
        angles = principal_angles(basis * mask, cs.basis * mask)
        diagnostics["window_degree"] = cs.buffer_window
        diagnostics["cs_principal_angles"] = angles
        diagnostics["cs_max_angle"] = float(angles.max(initial=0.0))
    return basis, diagnostics


def _word_translate_span(seeds: Sequence[np.ndarray], mats: Sequence[np.ndarray], k_max: int) -> np.ndarray:
    """Orthonormal basis of span{T_alpha s : s seed column, |alpha| <= k_max},
    with levels rank-reduced so widths never exceed the ambient dimension.
    Stops early once the span stabilizes (it is then invariant)."""
    total = range_basis(np.concatenate(list(seeds), axis=1))
    level = total
    for _ in range(k_max):
        if level.shape[1] == 0:
            break
        level = range_basis(np.concatenate([t @ level for t in mats], axis=1))
        combined = range_basis(np.concatenate([total, level], axis=1))
        if combined.shape[1] == total.shape[1]:
            break
        total = combined
    return total
