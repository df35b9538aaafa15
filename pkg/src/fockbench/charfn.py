"""Characteristic functions as multi-analytic operators.

The symbol of a row contraction T is
    -T + (defect root)(I - sum z_i T_i^*)^(-1)[z_1 I, ..., z_n I](column defect root)
restricted to defect coordinates. Expanding the resolvent as a Neumann series
produces one Fourier coefficient per word; the expansion pairs the ambient
word with the *reverse* of the operator word, which is the one indexing trap
in this module. ``assemble`` places coefficient beta at ambient blocks
(mu * reverse(beta), mu), matching the action of right creation products, and
a dedicated convention test pins point evaluation against partial sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import spectral_norm
from .contractions import RowContraction, cp_apply, satisfies_constraints, spectral_radius, validate
from .errors import InvalidParameterError, PreconditionError
from .ideals import ConstrainedSubspace, constrained_shifts
from .poisson import constrained_poisson_kernel, poisson_kernel
from .words import IDENTITY_WORD, TruncatedFock, Word


@dataclass
class MultiAnalyticOperator:
    """Fourier coefficient family of a multi-analytic operator.

    ``coefficients[beta]`` maps source defect coordinates to target defect
    coordinates; the assembled matrix is the coefficient-weighted sum of
    right-creation word operators (or their constrained compressions)."""

    n: int
    max_degree: int
    coefficients: dict[Word, np.ndarray]
    source_dim: int
    target_dim: int
    flavor: str = "standard"
    cs: ConstrainedSubspace | None = None

    def coefficient(self, beta: Word) -> np.ndarray:
        return self.coefficients.get(beta, np.zeros((self.target_dim, self.source_dim), dtype=complex))


def characteristic_coefficients(rc: RowContraction, max_degree: int) -> MultiAnalyticOperator:
    """Fourier coefficients of the characteristic function up to a degree.

    The constant coefficient is -T compressed between the defect spaces; the
    word gamma*g_i coefficient combines (row defect root) T_{reverse(gamma)}^*
    with the i-th block row of the column defect root."""
    if max_degree < 1:
        raise InvalidParameterError("need max_degree >= 1")
    d = rc.dim
    e_t = rc.defect_basis
    e_s = rc.defect_star_basis
    row = rc.row_matrix
    coeffs: dict[Word, np.ndarray] = {
        IDENTITY_WORD: -(e_t.conj().T @ row @ e_s)
    }
    # i-th block row of the column defect root, already in source coordinates.
    blocks = [rc.delta_star[(i - 1) * d : i * d, :] @ e_s for i in range(1, rc.n + 1)]
    reduced = e_t.conj().T @ rc.delta

    def extend(gamma_letters: tuple[int, ...], m_gamma: np.ndarray):
        # m_gamma = (target coords of delta) @ T_{reverse(gamma)}^*
        for i in range(1, rc.n + 1):
            coeffs[Word(gamma_letters + (i,))] = m_gamma @ blocks[i - 1]
        if len(gamma_letters) + 1 < max_degree:
            for j in range(1, rc.n + 1):
                extend(gamma_letters + (j,), m_gamma @ rc.matrices[j - 1].conj().T)

    extend((), reduced)
    return MultiAnalyticOperator(
        n=rc.n,
        max_degree=max_degree,
        coefficients=coeffs,
        source_dim=e_s.shape[1],
        target_dim=e_t.shape[1],
    )


def assemble(
    op: MultiAnalyticOperator,
    fock: TruncatedFock | None = None,
    cs: ConstrainedSubspace | None = None,
    multiplicity: int = 1,
    radial: float = 1.0,
) -> np.ndarray:
    """Truncated matrix of the multi-analytic operator on (ambient tensor source).

    With a Fock ambient the right-creation word operators are index maps, so
    coefficient beta lands at block rows mu*reverse(beta) for every word mu
    it fits against. With a constrained ambient the compressed right shifts
    are multiplied out word by word. ``radial`` scales coefficient beta by
    radial**|beta|.
    """
    if (fock is None) == (cs is None):
        raise InvalidParameterError("pass exactly one ambient: fock or cs")
    src = op.source_dim * multiplicity
    tgt = op.target_dim * multiplicity
    eye_m = np.eye(multiplicity, dtype=complex)

    if fock is not None:
        if op.max_degree < fock.max_degree:
            raise InvalidParameterError("coefficients do not cover the ambient truncation degree")
        out = np.zeros((fock.dim * tgt, fock.dim * src), dtype=complex)
        for beta, theta in op.coefficients.items():
            if len(beta) > fock.max_degree:
                continue
            block = (radial ** len(beta)) * (np.kron(theta, eye_m) if multiplicity > 1 else theta)
            rev = beta.reverse()
            for col, mu in enumerate(fock.words):
                if len(mu) + len(beta) > fock.max_degree:
                    continue
                r0 = fock.index[mu * rev]
                out[r0 * tgt : (r0 + 1) * tgt, col * src : (col + 1) * src] += block
        return out

    if op.max_degree < cs.fock.max_degree:
        raise InvalidParameterError("coefficients do not cover the ambient truncation degree")
    _, w_ops = constrained_shifts(cs)
    njdim = cs.dim
    out = np.zeros((njdim * tgt, njdim * src), dtype=complex)
    # Word products of the compressed right shifts, by parent recursion.
    prods: dict[Word, np.ndarray] = {IDENTITY_WORD: np.eye(njdim, dtype=complex)}
    for w in cs.fock.words[1:]:
        prods[w] = prods[Word(w.letters[:-1])] @ w_ops[w.letters[-1] - 1]
    for beta, theta in op.coefficients.items():
        if len(beta) > cs.fock.max_degree:
            continue
        block = (radial ** len(beta)) * (np.kron(theta, eye_m) if multiplicity > 1 else theta)
        out += np.kron(prods[beta], block)
    return out


def _lifted_point(point) -> list[np.ndarray]:
    mats = []
    for x in point:
        arr = np.asarray(x, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        mats.append(arr)
    k = mats[0].shape[0]
    for m in mats:
        if m.shape != (k, k):
            raise InvalidParameterError("point entries must be equal-sized square matrices or scalars")
    return mats


def point_evaluate(rc: RowContraction, point: Sequence) -> np.ndarray:
    """Evaluate the characteristic function at a strict point.

    The point is a tuple of scalars (a point of the unit ball) or of square
    matrices forming a row contraction with joint spectral radius below one;
    evaluation is a direct solve, no series."""
    xs = _lifted_point(point)
    if len(xs) != rc.n:
        raise InvalidParameterError(f"point has {len(xs)} entries, tuple has {rc.n}")
    if spectral_radius(xs) >= 1.0:
        raise PreconditionError("point has joint spectral radius >= 1")
    k = xs[0].shape[0]
    d = rc.dim
    eye_k = np.eye(k, dtype=complex)
    a = np.eye(k * d, dtype=complex) - sum(np.kron(x, t.conj().T) for x, t in zip(xs, rc.matrices))
    # X-hat maps (point space tensor n-fold column space) to (point space
    # tensor row space); block i of the column space is hit by X_i.
    sel = [np.zeros((d, rc.n * d), dtype=complex) for _ in range(rc.n)]
    for i in range(rc.n):
        sel[i][:, i * d : (i + 1) * d] = np.eye(d)
    xhat = sum(np.kron(x, s) for x, s in zip(xs, sel))
    mid = np.linalg.solve(a, xhat @ np.kron(eye_k, rc.delta_star))
    full = -np.kron(eye_k, rc.row_matrix) + np.kron(eye_k, rc.delta) @ mid
    return (
        np.kron(eye_k, rc.defect_basis).conj().T
        @ full
        @ np.kron(eye_k, rc.defect_star_basis)
    )


def constrained_characteristic(
    rc: RowContraction, cs: ConstrainedSubspace, max_degree: int, constraint_tol: float = 1e-10
) -> MultiAnalyticOperator:
    """Constrained flavor: same Fourier coefficients, assembled against the
    compressed right shifts; equals the compression of the standard assembled
    operator on the certified window."""
    if not satisfies_constraints(rc, cs.generators, constraint_tol):
        raise PreconditionError("tuple violates the ideal generators")
    op = characteristic_coefficients(rc, max_degree)
    op.flavor = "constrained"
    op.cs = cs
    return op


@dataclass
class FactorizationReport:
    mode: str
    residual: float
    budget: float
    passed: bool
    extras: dict


def verify_factorization(
    rc: RowContraction,
    mode: str = "point",
    point: Sequence | None = None,
    fock: TruncatedFock | None = None,
    cs: ConstrainedSubspace | None = None,
    tol: float = 1e-9,
) -> FactorizationReport:
    """Check I - Theta Theta^* against the Poisson-kernel square.

    Point modes compare against the closed resolvent form and are
    truncation-free; truncated modes compare against K K^* on the full
    truncation, where the identity telescopes exactly, and carry the purity
    tail as an explicit budget."""
    if mode in ("point", "constrained_point"):
        if point is None:
            raise InvalidParameterError("point mode needs a point")
        if mode == "constrained_point":
            if cs is None:
                raise InvalidParameterError("constrained_point mode needs cs")
            xs = _lifted_point(point)
            if xs[0].shape[0] > 1 or len(cs.generators) > 0:
                pt_rc = validate(xs, tol=1e-8)
                if not satisfies_constraints(pt_rc, cs.generators, 1e-8):
                    raise PreconditionError("point violates the ideal generators")
        theta = point_evaluate(rc, point)
        xs = _lifted_point(point)
        k = xs[0].shape[0]
        d = rc.dim
        eye_k = np.eye(k, dtype=complex)
        a = np.eye(k * d, dtype=complex) - sum(np.kron(x, t.conj().T) for x, t in zip(xs, rc.matrices))
        gram_x = sum(x @ x.conj().T for x in xs)
        # c = (I - T X*)^{-1} (I tensor delta); RHS = c^* (I - X X^* tensor I) c.
        c = np.linalg.solve(a.conj().T, np.kron(eye_k, rc.delta))
        rhs_full = c.conj().T @ (np.eye(k * d, dtype=complex) - np.kron(gram_x, np.eye(d))) @ c
        lift = np.kron(eye_k, rc.defect_basis)
        rhs = lift.conj().T @ rhs_full @ lift
        lhs = np.eye(theta.shape[0], dtype=complex) - theta @ theta.conj().T
        residual = spectral_norm(lhs - rhs)
        return FactorizationReport(mode, residual, tol, residual <= tol, {"point_dim": k})

    if mode == "truncated":
        if fock is None:
            raise InvalidParameterError("truncated mode needs a fock ambient")
        op = characteristic_coefficients(rc, fock.max_degree)
        theta = assemble(op, fock=fock)
        kern = poisson_kernel(rc, fock)
        ident = np.eye(theta.shape[0], dtype=complex)
        residual = spectral_norm(ident - theta @ theta.conj().T - kern.matrix @ kern.matrix.conj().T)
        budget = spectral_norm(cp_apply(rc, np.eye(rc.dim), fock.max_degree + 1)) + 1e-10
        return FactorizationReport(mode, residual, budget, residual <= budget, {"ambient_dim": theta.shape[0]})

    if mode == "constrained_truncated":
        if cs is None:
            raise InvalidParameterError("constrained_truncated mode needs cs")
        op = constrained_characteristic(rc, cs, cs.fock.max_degree)
        theta = assemble(op, cs=cs)
        kern = constrained_poisson_kernel(rc, cs)
        ident = np.eye(theta.shape[0], dtype=complex)
        diff = ident - theta @ theta.conj().T - kern.matrix @ kern.matrix.conj().T
        if not cs.graded:
            mask = np.repeat(cs.degree_window_mask(cs.buffer_window), max(op.target_dim, 1)).astype(float)
            diff = diff * mask[:, None] * mask[None, :]
        residual = spectral_norm(diff)
        budget = spectral_norm(cp_apply(rc, np.eye(rc.dim), cs.fock.max_degree + 1)) + 1e-10
        return FactorizationReport(mode, residual, budget, residual <= budget, {"ambient_dim": theta.shape[0]})

    raise InvalidParameterError(f"unknown mode {mode!r}")


def unitary_invariance_check(rc: RowContraction, u: np.ndarray, max_degree: int = 6) -> float:
    """Residual of coefficient intertwining under conjugation of the tuple.

    Conjugating every matrix by a unitary conjugates the defect data; the
    induced unitaries between defect spaces must intertwine the coefficient
    families exactly."""
    u = np.asarray(u, dtype=complex)
    d = rc.dim
    if spectral_norm(u.conj().T @ u - np.eye(d)) > 1e-12:
        raise PreconditionError("conjugator is not unitary to 1e-12")
    primed = validate([u @ t @ u.conj().T for t in rc.matrices])
    op = characteristic_coefficients(rc, max_degree)
    op_p = characteristic_coefficients(primed, max_degree)
    tau = primed.defect_basis.conj().T @ u @ rc.defect_basis
    tau_star = primed.defect_star_basis.conj().T @ np.kron(np.eye(rc.n), u) @ rc.defect_star_basis
    residual = 0.0
    for beta, theta in op.coefficients.items():
        residual = max(residual, spectral_norm(tau @ theta - op_p.coefficient(beta) @ tau_star))
    return residual
