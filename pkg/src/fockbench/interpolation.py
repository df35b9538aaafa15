"""Constrained Nevanlinna-Pick feasibility: variety membership, kernel
eigenvectors, and the Pick-matrix positivity test.

Only feasibility is decided; no interpolant is synthesized."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError, OutOfBallError, PreconditionError
from .ideals import ConstrainedSubspace, NcPolynomial, constrained_shifts
from .words import Word


def _as_point(point, n: int) -> np.ndarray:
    z = np.asarray(point, dtype=complex).reshape(-1)
    if z.shape != (n,):
        raise InvalidParameterError(f"point must have {n} coordinates")
    return z


@dataclass
class MembershipResult:
    member: bool
    residuals: list[float]


def variety_membership(
    point, generators: Sequence[NcPolynomial], n: int, tol: float = 1e-10
) -> MembershipResult:
    """A ball point belongs to the zero set when every generator vanishes at
    the scalar commuting evaluation."""
    z = _as_point(point, n)
    if np.linalg.norm(z) >= 1.0:
        raise OutOfBallError(f"|point| = {np.linalg.norm(z):.6f} >= 1")
    residuals = [abs(p.evaluate_scalar(z)) for p in generators]
    return MembershipResult(member=all(r <= tol for r in residuals), residuals=residuals)


@dataclass
class KernelVectorResult:
    vector: np.ndarray  # in constrained-subspace coordinates
    eigen_residual: float
    tail_bound: float
    norm: float


def kernel_vector(cs: ConstrainedSubspace, point, membership_tol: float = 1e-10) -> KernelVectorResult:
    """Truncated kernel vector of a variety point, projected into the
    constrained subspace; joint eigenvector of the adjoint shifts up to a
    |point|^N tail that is reported alongside."""
    n = cs.fock.n
    z = _as_point(point, n)
    member = variety_membership(z, cs.generators, n, membership_tol)
    if not member.member:
        raise PreconditionError(
            f"point is not in the variety: residuals {['%.2e' % r for r in member.residuals]}"
        )
    vec = np.zeros(cs.fock.dim, dtype=complex)
    vec[0] = 1.0
    for idx, w in enumerate(cs.fock.words):
        if idx == 0:
            continue
        parent = cs.fock.index[Word(w.letters[:-1])]
        vec[idx] = vec[parent] * np.conj(z[w.letters[-1] - 1])
    coords = cs.basis.conj().T @ vec
    norm = float(np.linalg.norm(coords))

    b_ops, _ = constrained_shifts(cs)
    resid = 0.0
    for i, b in enumerate(b_ops):
        resid = max(resid, float(np.linalg.norm(b.conj().T @ coords - np.conj(z[i]) * coords)))
    point_norm = float(np.linalg.norm(z))
    tail = point_norm ** cs.fock.max_degree * max(point_norm, 1e-300)
    return KernelVectorResult(
        vector=coords,
        eigen_residual=resid / max(norm, 1e-300),
        tail_bound=tail,
        norm=norm,
    )


@dataclass
class PickProblem:
    """Interpolation data: distinct ball points and square matrix targets."""

    n: int
    points: np.ndarray  # (k, n) complex
    targets: list[np.ndarray]
    generators: list[NcPolynomial] = field(default_factory=list)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(len(self.targets), -1)
        if pts.shape[1] != self.n:
            raise InvalidParameterError(f"points must have {self.n} coordinates")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms >= 1.0):
            raise OutOfBallError("all points must lie strictly inside the unit ball")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(pts[i] - pts[j]) <= 1e-12:
                    raise DegenerateInputError(f"points {i} and {j} coincide")
        targets = [np.atleast_2d(np.asarray(a, dtype=complex)) for a in self.targets]
        d = targets[0].shape[0]
        for a in targets:
            if a.shape != (d, d):
                raise InvalidParameterError("targets must be equal-sized square matrices")
        self.points = pts
        self.targets = targets

    @property
    def k(self) -> int:
        return len(self.targets)

    @property
    def target_dim(self) -> int:
        return self.targets[0].shape[0]


def pick_matrix(problem: PickProblem) -> np.ndarray:
    """Block Hermitian matrix with (i, j) block (I - A_i A_j^*) / (1 - <p_i, p_j>).

    The lower triangle mirrors the upper entrywise, so Hermiticity is bitwise.
    """
    k, d = problem.k, problem.target_dim
    out = np.zeros((k * d, k * d), dtype=complex)
    for i in range(k):
        for j in range(i, k):
            inner = np.sum(problem.points[i] * np.conj(problem.points[j]))
            block = (np.eye(d) - problem.targets[i] @ problem.targets[j].conj().T) / (1.0 - inner)
            out[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
    for p in range(k * d):
        for q in range(p):
            out[p, q] = np.conj(out[q, p])
        out[p, p] = out[p, p].real
    return out


@dataclass
class FeasibilityResult:
    feasible: bool
    marginal: bool
    lambda_min: float
    lambda_max: float
    certificate: np.ndarray | None


def pick_feasible(problem: PickProblem, tol: float = 1e-9) -> FeasibilityResult:
    """Interpolation is feasible exactly when the Pick matrix is PSD; within
    the declared tolerance band the verdict is feasible (marginal)."""
    m = pick_matrix(problem)
    vals, vecs = np.linalg.eigh(m)
    lam_min = float(vals[0])
    lam_max = float(vals[-1])
    band = tol * max(1.0, lam_max)
    feasible = lam_min >= -band
    return FeasibilityResult(
        feasible=feasible,
        marginal=abs(lam_min) <= band,
        lambda_min=lam_min,
        lambda_max=lam_max,
        certificate=None if feasible else vecs[:, 0],
    )
