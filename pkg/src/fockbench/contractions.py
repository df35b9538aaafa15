"""Row contractions on finite-dimensional spaces: defects, the associated
completely positive map, purity, and spectral radius."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import RANK_RTOL, eigh_descending, spectral_norm
from .errors import InvalidParameterError, NotARowContractionError
from .ideals import NcPolynomial, evaluate_polynomial


@dataclass
class RowContraction:
    """A validated operator tuple with row norm at most one.

    ``delta`` and ``delta_star`` are the Hermitian square roots of the row
    and column defects; ``defect_basis`` / ``defect_star_basis`` hold
    orthonormal eigenvector bases of the corresponding defect spaces, ordered
    by decreasing defect eigenvalue.
    """

    matrices: tuple[np.ndarray, ...]
    n: int
    dim: int
    delta: np.ndarray
    delta_star: np.ndarray
    defect_basis: np.ndarray
    defect_star_basis: np.ndarray

    @property
    def row_matrix(self) -> np.ndarray:
        return np.concatenate(self.matrices, axis=1)

    @property
    def defect_rank(self) -> int:
        return self.defect_basis.shape[1]

    @property
    def defect_star_rank(self) -> int:
        return self.defect_star_basis.shape[1]

    def row_gram(self) -> np.ndarray:
        """Sum of T_i T_i*."""
        return sum(t @ t.conj().T for t in self.matrices)


def defect_root_and_basis(psd: np.ndarray, clamp: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Square root of a PSD defect together with an orthonormal range basis.

    The rank cutoff is applied to the eigenvalues of the squared defect,
    where floating noise sits at machine scale; cutting on the root itself
    would admit sqrt(eps)-sized noise directions. An absolute floor guards
    the case where every eigenvalue is noise (coisometric tuples)."""
    vals, vecs = eigh_descending(psd)
    if vals.size and float(vals.min()) < -clamp:
        raise ValueError(f"defect is not PSD: min eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    if vals.size == 0 or vals.max() <= 0:
        return root, np.zeros((psd.shape[0], 0), dtype=complex)
    keep = vals > max(RANK_RTOL * vals.max(), 1e-12)
    return root, vecs[:, keep]


def validate(matrices: Sequence[np.ndarray], tol: float = 1e-10) -> RowContraction:
    """Build a RowContraction, constructing defect data; rejects tuples whose
    row norm exceeds one beyond tolerance."""
    mats = tuple(np.asarray(t, dtype=complex) for t in matrices)
    if not mats:
        raise InvalidParameterError("need at least one matrix")
    dim = mats[0].shape[0]
    for t in mats:
        if t.ndim != 2 or t.shape != (dim, dim):
            raise InvalidParameterError("all matrices must be square with equal size")
    gram = sum(t @ t.conj().T for t in mats)
    excess = spectral_norm(gram) - 1.0
    if excess > tol:
        raise NotARowContractionError(excess)
    row = np.concatenate(mats, axis=1)
    delta, defect_basis = defect_root_and_basis(np.eye(dim) - gram)
    delta_star, defect_star_basis = defect_root_and_basis(np.eye(len(mats) * dim) - row.conj().T @ row)
    return RowContraction(
        matrices=mats,
        n=len(mats),
        dim=dim,
        delta=delta,
        delta_star=delta_star,
        defect_basis=defect_basis,
        defect_star_basis=defect_star_basis,
    )


def cp_apply(rc: RowContraction, x: np.ndarray, k: int = 1) -> np.ndarray:
    """k-fold application of X -> sum_i T_i X T_i*."""
    if k < 0:
        raise InvalidParameterError("need k >= 0")
    x = np.asarray(x, dtype=complex)
    for _ in range(k):
        x = sum(t @ x @ t.conj().T for t in rc.matrices)
    return x


def cp_matrix(rc: RowContraction) -> np.ndarray:
    """Matrix of the completely positive map on vectorized inputs
    (column-stacking convention)."""
    return sum(np.kron(t.conj(), t) for t in rc.matrices)


@dataclass
class PurityResult:
    q_limit: np.ndarray
    is_pure: bool
    k_used: int
    converged: bool
    final_step: float

    def unit_eigenspace(self, tol: float = 1e-8) -> np.ndarray:
        """Directions the CP iteration leaves untouched (limit eigenvalue one).

        Purely diagnostic: vectors here are the obstruction to complete
        non-coisometry; no further semantics is attached."""
        vals, vecs = eigh_descending(self.q_limit)
        return vecs[:, vals >= 1.0 - tol]


def purity(rc: RowContraction, tol: float = 1e-10, k_max: int = 10_000) -> PurityResult:
    """Iterate the CP map on the identity until the decreasing sequence
    stabilizes; the limit is the obstruction to purity.

    The stop rule accounts for geometric decay: with step ratio q the
    remaining distance to the limit is at most step/(1-q), so iteration
    continues until that projection drops below the tolerance."""
    if tol <= 0:
        raise InvalidParameterError("need tol > 0")
    x = np.eye(rc.dim, dtype=complex)
    step = np.inf
    prev_step = None
    k = 0
    for k in range(1, k_max + 1):
        nxt = cp_apply(rc, x)
        step = spectral_norm(nxt - x)
        x = nxt
        ratio = 0.5 if prev_step is None or prev_step <= 0 else min(step / prev_step, 1.0 - 1e-9)
        prev_step = step
        if step / max(1.0 - ratio, 1e-9) < tol:
            return PurityResult(x, spectral_norm(x) < tol, k, True, step)
    return PurityResult(x, spectral_norm(x) < tol, k, False, step)


def spectral_radius(matrices_or_rc) -> float:
    """Joint spectral radius of the tuple: the square root of the spectral
    radius of the associated CP map.

    Computed exactly as the dominant eigenvalue magnitude of the CP map's
    matrix when the squared dimension is moderate; beyond that, falls back to
    the norm-root iteration on CP powers of the identity.
    """
    if isinstance(matrices_or_rc, RowContraction):
        mats = matrices_or_rc.matrices
    else:
        mats = tuple(np.asarray(t, dtype=complex) for t in matrices_or_rc)
    dim = mats[0].shape[0]
    if dim**2 <= 4096:
        eigs = np.linalg.eigvals(sum(np.kron(t.conj(), t) for t in mats))
        top = float(np.abs(eigs).max()) if eigs.size else 0.0
        return float(np.sqrt(top))
    x = np.eye(dim, dtype=complex)
    estimate = 0.0
    for k in range(1, 400):
        x = sum(t @ x @ t.conj().T for t in mats)
        norm = spectral_norm(x)
        if norm == 0.0:
            return 0.0
        new = norm ** (1.0 / (2.0 * k))
        if k > 8 and abs(new - estimate) < 1e-6 * max(1.0, estimate):
            return float(new)
        estimate = new
    return float(estimate)


def check_constraints(rc: RowContraction, generators: Sequence[NcPolynomial]) -> list[float]:
    """Spectral norm of each generator evaluated on the tuple."""
    return [spectral_norm(evaluate_polynomial(p, rc.matrices)) for p in generators]


def satisfies_constraints(rc: RowContraction, generators: Sequence[NcPolynomial], tol: float = 1e-10) -> bool:
    return all(r <= tol for r in check_constraints(rc, generators))
