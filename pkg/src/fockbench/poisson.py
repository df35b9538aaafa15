"""Poisson kernels on the truncated Fock space, their constrained
compressions, and the associated transform and Gram identities.

The truncated kernel of a tuple stacks, per basis word alpha, the block
r^|alpha| (defect root) T_alpha^* expressed in defect coordinates. Its Gram
matrix telescopes exactly to I - r^(2(N+1)) Phi^(N+1)(I), so every isometry
statement comes with a computable truncation budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import spectral_norm
from .contractions import (
    RowContraction,
    check_constraints,
    cp_apply,
    defect_root_and_basis,
    purity,
)
from .errors import InvalidParameterError, PreconditionError
from .ideals import ConstrainedSubspace, constrained_shifts
from .words import TruncatedFock, Word, creation_matrix


@dataclass
class PoissonKernel:
    """Truncated Poisson kernel of a row contraction.

    ``matrix`` maps the underlying space into (ambient basis) tensor (defect
    coordinates); for the constrained flavor the ambient is the constrained
    subspace basis and ``cs`` is set.
    """

    rc: RowContraction
    r: float
    fock: TruncatedFock
    matrix: np.ndarray
    defect_root: np.ndarray
    defect_basis: np.ndarray
    isometry_defect: float
    tail_budget: float
    cs: ConstrainedSubspace | None = None
    range_containment: float | None = None
    is_pure: bool | None = None

    @property
    def defect_dim(self) -> int:
        return self.defect_basis.shape[1]

    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix


def _radial_defect(rc: RowContraction, r: float) -> tuple[np.ndarray, np.ndarray]:
    if r == 1.0:
        return rc.delta, rc.defect_basis
    return defect_root_and_basis(np.eye(rc.dim) - (r * r) * rc.row_gram())


def _word_adjoint_products(rc: RowContraction, fock: TruncatedFock) -> list[np.ndarray]:
    """T_alpha^* for every basis word, built by parent recursion."""
    prods: list[np.ndarray] = [np.eye(rc.dim, dtype=complex)]
    for w in fock.words[1:]:
        parent = fock.index[Word(w.letters[:-1])]
        last = w.letters[-1]
        prods.append(rc.matrices[last - 1].conj().T @ prods[parent])
    return prods


def poisson_kernel(rc: RowContraction, fock: TruncatedFock, r: float = 1.0) -> PoissonKernel:
    """Truncated radial Poisson kernel.

    The reported isometry defect is measured against the exact truncated Gram
    I - r^(2(N+1)) Phi^(N+1)(I), so it is floating noise by construction; the
    tail budget bounds the distance from the untruncated Gram.
    """
    if not 0.0 < r <= 1.0:
        raise InvalidParameterError(f"radial parameter must lie in (0, 1], got {r}")
    delta_r, basis = _radial_defect(rc, r)
    ddim = basis.shape[1]
    prods = _word_adjoint_products(rc, fock)
    reduced = basis.conj().T @ delta_r
    k = np.zeros((fock.dim * ddim, rc.dim), dtype=complex)
    for idx, w in enumerate(fock.words):
        k[idx * ddim : (idx + 1) * ddim, :] = (r ** len(w)) * (reduced @ prods[idx])

    tail = (r ** (2 * (fock.max_degree + 1))) * cp_apply(rc, np.eye(rc.dim), fock.max_degree + 1)
    defect = spectral_norm(k.conj().T @ k - (np.eye(rc.dim) - tail))
    is_pure = None
    if r == 1.0:
        is_pure = purity(rc).is_pure
    return PoissonKernel(
        rc=rc,
        r=r,
        fock=fock,
        matrix=k,
        defect_root=delta_r,
        defect_basis=basis,
        isometry_defect=defect,
        tail_budget=spectral_norm(tail),
        is_pure=is_pure,
    )


def constrained_poisson_kernel(
    rc: RowContraction, cs: ConstrainedSubspace, r: float = 1.0, constraint_tol: float = 1e-10
) -> PoissonKernel:
    """Compression of the Poisson kernel to the constrained subspace.

    Requires the tuple to satisfy the ideal generators; also verifies that
    the full kernel's range already lies in the constrained part (exact for
    homogeneous generators)."""
    residuals = check_constraints(rc, cs.generators)
    if any(res > constraint_tol for res in residuals):
        raise PreconditionError(
            f"tuple violates the ideal generators: residuals {['%.2e' % r_ for r_ in residuals]}"
        )
    full = poisson_kernel(rc, cs.fock, r)
    ddim = full.defect_dim
    lift = np.kron(cs.basis, np.eye(ddim, dtype=complex))
    compressed = lift.conj().T @ full.matrix
    containment = spectral_norm(full.matrix - lift @ compressed)
    defect = spectral_norm(
        compressed.conj().T @ compressed
        - (np.eye(rc.dim) - (r ** (2 * (cs.fock.max_degree + 1))) * cp_apply(rc, np.eye(rc.dim), cs.fock.max_degree + 1))
    )
    return PoissonKernel(
        rc=rc,
        r=r,
        fock=cs.fock,
        matrix=compressed,
        defect_root=full.defect_root,
        defect_basis=full.defect_basis,
        isometry_defect=defect,
        tail_budget=full.tail_budget,
        cs=cs,
        range_containment=containment,
        is_pure=full.is_pure,
    )


@dataclass
class IntertwiningReport:
    residual: float
    per_generator: list[float]
    full_residual: float
    top_slice_budget: float


def intertwining_check(kernel: PoissonKernel) -> IntertwiningReport:
    """Residual of K (r T_i^*) = (shift_i^* tensor I) K over all generators.

    The identity is exact on rows of ambient degree <= N-1; the top slice
    cannot receive weight from words of length N+1, so those rows are
    excluded from the headline residual and their mass is reported as the
    budget of the unwindowed residual.
    """
    rc, fock, r = kernel.rc, kernel.fock, kernel.r
    ddim = kernel.defect_dim
    if kernel.cs is None:
        shifts = [creation_matrix(fock, "left", i) for i in range(1, fock.n + 1)]
        degrees = fock.degrees
    else:
        shifts, _ = constrained_shifts(kernel.cs)
        degrees = kernel.cs.basis_degrees
    row_mask = np.repeat(degrees <= fock.max_degree - 1, ddim)

    per = []
    full = []
    eye_d = np.eye(ddim, dtype=complex)
    for i, s in enumerate(shifts, start=1):
        lhs = kernel.matrix @ (r * rc.matrices[i - 1].conj().T)
        rhs = np.kron(s.conj().T, eye_d) @ kernel.matrix
        diff = lhs - rhs
        full.append(spectral_norm(diff))
        per.append(spectral_norm(diff[row_mask, :]))
    # top-slice mass of the kernel times the shifted generator norm
    delta_sq = kernel.defect_root @ kernel.defect_root
    top = cp_apply(rc, delta_sq, fock.max_degree)
    t_norm = max(spectral_norm(t) for t in rc.matrices)
    budget = (r ** (fock.max_degree + 1)) * float(np.sqrt(max(spectral_norm(top), 0.0))) * t_norm + 1e-12
    return IntertwiningReport(
        residual=max(per, default=0.0),
        per_generator=per,
        full_residual=max(full, default=0.0),
        top_slice_budget=budget,
    )


@dataclass
class PoissonTransformResult:
    r_values: tuple[float, ...]
    values: list[np.ndarray]
    deviations: list[float]
    limit_estimate: np.ndarray
    target: np.ndarray


def poisson_transform(
    rc: RowContraction,
    fock: TruncatedFock,
    alpha: Word,
    beta: Word,
    r_values: Sequence[float] = (0.9, 0.99, 0.999),
) -> PoissonTransformResult:
    """Evaluate K_r^* (S_alpha S_beta^* tensor I) K_r along a radial sequence
    and report the deviation from T_alpha T_beta^*.

    No extrapolated ground truth is claimed; the trajectory itself is the
    result."""
    if len(alpha) > fock.max_degree or len(beta) > fock.max_degree:
        raise InvalidParameterError("word length exceeds the truncation degree")
    s_ops = [creation_matrix(fock, "left", i) for i in range(1, fock.n + 1)]
    from .words import word_operator

    s_alpha = word_operator(s_ops, alpha)
    s_beta = word_operator(s_ops, beta)
    target = word_operator(rc.matrices, alpha) @ word_operator(rc.matrices, beta).conj().T

    values = []
    deviations = []
    for r in r_values:
        kern = poisson_kernel(rc, fock, float(r))
        mid = np.kron(s_alpha @ s_beta.conj().T, np.eye(kern.defect_dim, dtype=complex))
        val = kern.matrix.conj().T @ mid @ kern.matrix
        values.append(val)
        deviations.append(spectral_norm(val - target))
    return PoissonTransformResult(
        r_values=tuple(float(r) for r in r_values),
        values=values,
        deviations=deviations,
        limit_estimate=values[-1],
        target=target,
    )


@dataclass
class GramReport:
    gram: np.ndarray
    residual: float
    budget: float


def kernel_gram(rc: RowContraction, fock: TruncatedFock, r: float = 1.0) -> GramReport:
    """K^*K compared against I minus the purity limit, with the tail budget
    ||r^(2(N+1)) Phi^(N+1)(I) - Q|| attached."""
    kern = poisson_kernel(rc, fock, r)
    gram = kern.gram()
    q = purity(rc).q_limit
    residual = spectral_norm(gram - (np.eye(rc.dim) - q))
    tail = (r ** (2 * (fock.max_degree + 1))) * cp_apply(rc, np.eye(rc.dim), fock.max_degree + 1)
    budget = spectral_norm(tail - q) + 1e-12
    return GramReport(gram=gram, residual=residual, budget=budget)
