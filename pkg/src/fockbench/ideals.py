"""Noncommutative polynomials, constrained subspaces, and constrained shifts.

The ideal generated by a polynomial family is represented at truncation level
by the span of all vectors obtained from a generator by creating letters on
the left and right; the constrained subspace is its orthogonal complement.
For homogeneous generators this truncated picture is exact degree by degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import complement_basis, range_basis, spectral_norm
from .errors import InvalidParameterError, PreconditionError, RejectedInputError
from .words import IDENTITY_WORD, TruncatedFock, Word, word_operator


class NcPolynomial:
    """Finitely supported word -> complex coefficient map."""

    def __init__(self, terms: dict[Word, complex] | None = None):
        cleaned: dict[Word, complex] = {}
        for word, coeff in (terms or {}).items():
            c = complex(coeff)
            if c != 0:
                cleaned[word] = c
        self.terms = cleaned

    @classmethod
    def monomial(cls, letters: Sequence[int], coeff: complex = 1.0) -> "NcPolynomial":
        return cls({Word(tuple(letters)): coeff})

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(len(w) for w in self.terms)

    @property
    def is_homogeneous(self) -> bool:
        lengths = {len(w) for w in self.terms}
        return len(lengths) <= 1

    @property
    def constant_term(self) -> complex:
        return self.terms.get(IDENTITY_WORD, 0j)

    def evaluate(self, ops: Sequence[np.ndarray]) -> np.ndarray:
        return evaluate_polynomial(self, ops)

    def evaluate_scalar(self, point: Sequence[complex]) -> complex:
        """Evaluate at a scalar commuting point (word -> product of coordinates)."""
        z = [complex(v) for v in point]
        total = 0j
        for word, coeff in self.terms.items():
            prod = 1.0 + 0j
            for letter in word.letters:
                prod *= z[letter - 1]
            total += coeff * prod
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "NcPolynomial(0)"
        parts = [f"({c:g})*{w}" for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0].letters))]
        return "NcPolynomial(" + " + ".join(parts) + ")"


def evaluate_polynomial(p: NcPolynomial, ops: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of coefficient-weighted letter-ordered products; the identity word
    evaluates to the identity matrix."""
    ops = [np.asarray(t, dtype=complex) for t in ops]
    if not ops:
        raise InvalidParameterError("need a nonempty operator tuple")
    dim = ops[0].shape[0]
    for t in ops:
        if t.shape != (dim, dim):
            raise InvalidParameterError("operator tuple entries must be square and equal-sized")
    result = np.zeros((dim, dim), dtype=complex)
    for word, coeff in p.terms.items():
        if any(letter > len(ops) for letter in word.letters):
            raise InvalidParameterError(f"word {word} references a generator beyond the tuple")
        result += coeff * word_operator(ops, word)
    return result


def commutator_generators(n: int) -> list[NcPolynomial]:
    """g_i g_j - g_j g_i for i < j; the commutative ideal."""
    gens = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            gens.append(NcPolynomial({Word((i, j)): 1.0, Word((j, i)): -1.0}))
    return gens


def q_commutator_generators(q: np.ndarray) -> list[NcPolynomial]:
    """g_j g_i - q_ij g_i g_j for i < j, with a complex deformation matrix q."""
    q = np.asarray(q, dtype=complex)
    n = q.shape[0]
    if q.shape != (n, n):
        raise InvalidParameterError("q must be a square matrix")
    gens = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            gens.append(NcPolynomial({Word((j, i)): 1.0, Word((i, j)): -q[i - 1, j - 1]}))
    return gens


def word_length_generators(n: int, m: int) -> list[NcPolynomial]:
    """All monomials of length exactly m; kills every degree >= m component."""
    if m < 1:
        raise InvalidParameterError("need m >= 1")
    level: list[tuple[int, ...]] = [()]
    for _ in range(m):
        level = [w + (i,) for w in level for i in range(1, n + 1)]
    return [NcPolynomial({Word(w): 1.0}) for w in level]


@dataclass
class ConstrainedSubspace:
    """Orthonormal basis of the truncated constrained subspace with its projection.

    ``basis`` has one column per basis vector (in Fock coordinates); for
    homogeneous generators each column is supported in a single degree slice
    and ``basis_degrees`` records it. ``truncation_warning`` is set for
    non-homogeneous generators, where the truncated ideal span may undershoot
    the true one and downstream checks restrict to a buffer window.
    """

    fock: TruncatedFock
    generators: list[NcPolynomial]
    basis: np.ndarray
    projection: np.ndarray
    graded: bool
    basis_degrees: np.ndarray
    slice_dims: list[int]
    truncation_warning: str | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def max_generator_degree(self) -> int:
        return max((g.degree for g in self.generators), default=0)

    @property
    def buffer_window(self) -> int:
        """Largest ambient degree on which truncated identities are trusted."""
        if self.graded:
            return self.fock.max_degree
        return self.fock.max_degree - self.max_generator_degree

    def contains_vacuum(self, tol: float = 1e-10) -> bool:
        e0 = np.zeros(self.fock.dim, dtype=complex)
        e0[0] = 1.0
        return spectral_norm(self.projection @ e0 - e0) <= tol

    def vacuum_vector(self) -> np.ndarray:
        """Coordinates of the vacuum in the subspace basis; requires 1 in N_J."""
        if not self.contains_vacuum():
            raise PreconditionError("the vacuum does not lie in the constrained subspace")
        e0 = np.zeros(self.fock.dim, dtype=complex)
        e0[0] = 1.0
        return self.basis.conj().T @ e0

    def degree_window_mask(self, max_degree: int) -> np.ndarray:
        return self.basis_degrees <= max_degree


def _ideal_columns(fock: TruncatedFock, generators: Sequence[NcPolynomial]):
    """Vectors S_alpha p(S) S_beta (vacuum) for |alpha| + deg p + |beta| <= N.

    Built by index arithmetic: the column for (alpha, p, beta) is
    sum_w c_w e_{alpha w beta}, with words beyond the truncation dropped
    (possible only for non-homogeneous p).
    """
    n, top = fock.n, fock.max_degree
    columns: list[tuple[int, np.ndarray]] = []  # (degree tag, vector)
    all_words = fock.words
    for p in generators:
        d = p.degree
        for beta in all_words:
            if len(beta) > top - d:
                continue
            for alpha in all_words:
                if len(alpha) + d + len(beta) > top:
                    continue
                vec = np.zeros(fock.dim, dtype=complex)
                for w, c in p.terms.items():
                    full = alpha * w * beta
                    idx = fock.word_index(full)
                    if idx is not None:
                        vec[idx] += c
                columns.append((len(alpha) + d + len(beta), vec))
    return columns


def build_constrained_subspace(fock: TruncatedFock, generators: Sequence[NcPolynomial]) -> ConstrainedSubspace:
    """Constrained subspace at truncation level, with its orthogonal projection.

    Homogeneous generators give a graded result: the complement is computed
    slice by slice, so every basis vector lives in one degree slice and the
    slice dimensions are stable under increasing the truncation.
    """
    gens = [g for g in generators if g.terms]
    for g in gens:
        if g.degree > fock.max_degree:
            raise InvalidParameterError("generator degree exceeds the truncation degree")

    if not gens:
        dim = fock.dim
        basis = np.eye(dim, dtype=complex)
        return ConstrainedSubspace(
            fock=fock,
            generators=[],
            basis=basis,
            projection=np.eye(dim, dtype=complex),
            graded=True,
            basis_degrees=fock.degrees.copy(),
            slice_dims=[fock.n**m for m in range(fock.max_degree + 1)],
        )

    homogeneous = all(g.is_homogeneous for g in gens)
    columns = _ideal_columns(fock, gens)

    if homogeneous:
        basis_blocks: list[np.ndarray] = []
        degrees: list[int] = []
        slice_dims: list[int] = []
        for m in range(fock.max_degree + 1):
            sl = fock.slice_range(m)
            slice_cols = [vec[sl] for deg, vec in columns if deg == m]
            width = fock.slice_offsets[m + 1] - fock.slice_offsets[m]
            mat = np.stack(slice_cols, axis=1) if slice_cols else np.zeros((width, 0), dtype=complex)
            comp = complement_basis(mat, width)
            block = np.zeros((fock.dim, comp.shape[1]), dtype=complex)
            block[sl, :] = comp
            basis_blocks.append(block)
            degrees.extend([m] * comp.shape[1])
            slice_dims.append(comp.shape[1])
        basis = np.concatenate(basis_blocks, axis=1)
        graded = True
        warning = None
    else:
        mat = np.stack([vec for _, vec in columns], axis=1)
        basis = complement_basis(mat, fock.dim)
        graded = False
        # Degree tag = highest slice carrying mass; used for buffer windows.
        degrees = []
        for k in range(basis.shape[1]):
            col = basis[:, k]
            mass = np.abs(col) > 1e-12
            degrees.append(int(fock.degrees[mass].max()) if mass.any() else 0)
        slice_dims = []
        warning = (
            "non-homogeneous generators: the truncated ideal span may undershoot the "
            f"true one; identities are trusted only up to degree {fock.max_degree - max(g.degree for g in gens)}"
        )

    projection = basis @ basis.conj().T
    return ConstrainedSubspace(
        fock=fock,
        generators=list(gens),
        basis=basis,
        projection=projection,
        graded=graded,
        basis_degrees=np.array(degrees, dtype=int),
        slice_dims=slice_dims,
        truncation_warning=warning,
    )


def constrained_shifts(cs: ConstrainedSubspace) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Compressions of the left/right creation tuples to the constrained subspace,
    expressed in its orthonormal basis."""
    from .words import left_creation_tuple, right_creation_tuple

    q = cs.basis
    left = [q.conj().T @ s @ q for s in left_creation_tuple(cs.fock)]
    right = [q.conj().T @ r @ q for r in right_creation_tuple(cs.fock)]
    return left, right


@dataclass
class CyclicSpanResult:
    e_basis: np.ndarray
    e_dim: int
    span_dim: int
    window_degree: int
    window_residual: float
    verdict: bool
    cyclic: bool
    co_invariance_residuals: list[float]


def cyclic_span_check(
    cs: ConstrainedSubspace,
    d_dim: int,
    m_basis: np.ndarray,
    tol: float = 1e-8,
) -> CyclicSpanResult:
    """Check the cyclic-span characterization for a co-invariant subspace.

    Given M inside (constrained subspace) tensor C^d, co-invariant under the
    tupled shifts, the span of all shift-word translates of M must equal the
    constrained subspace tensored with the vacuum compression E of M. The
    comparison is restricted to the degree window the truncation can certify.
    """
    left, _ = constrained_shifts(cs)
    nj_dim = cs.dim
    m = np.asarray(m_basis, dtype=complex).reshape(nj_dim * d_dim, -1)
    m = range_basis(m)
    if m.shape[1] == 0:
        return CyclicSpanResult(
            e_basis=np.zeros((d_dim, 0), dtype=complex),
            e_dim=0,
            span_dim=0,
            window_degree=cs.buffer_window,
            window_residual=0.0,
            verdict=True,
            cyclic=(d_dim == 0),
            co_invariance_residuals=[0.0] * cs.fock.n,
        )

    eye_d = np.eye(d_dim, dtype=complex)
    p_m = m @ m.conj().T
    co_res = []
    for i, b in enumerate(left, start=1):
        moved = np.kron(b.conj().T, eye_d) @ m
        res = spectral_norm(moved - p_m @ moved)
        co_res.append(res)
        if res > tol:
            raise RejectedInputError(
                f"subspace is not co-invariant under shift {i}: residual {res:.3e} > {tol:.1e}"
            )

    v0 = cs.vacuum_vector()
    # Vacuum compression of M: contract the subspace leg against the vacuum.
    m_tensor = m.reshape(nj_dim, d_dim, m.shape[1])
    e_cols = np.einsum("i,idk->dk", v0.conj(), m_tensor)
    e_basis = range_basis(e_cols)

    # Span of all word translates up to the truncation degree.
    span_cols = [m]
    level = m
    for _ in range(cs.fock.max_degree):
        level = np.concatenate([np.kron(b, eye_d) @ level for b in left], axis=1)
        if spectral_norm(level) < 1e-14:
            break
        span_cols.append(level)
    y_basis = range_basis(np.concatenate(span_cols, axis=1))

    # Degree content of M decides the certifiable window.
    col_norms = np.linalg.norm(m_tensor, axis=(1, 2))
    deg_m = int(cs.basis_degrees[col_norms > 1e-12 * max(col_norms.max(), 1e-300)].max(initial=0))
    window_degree = min(cs.buffer_window, cs.fock.max_degree - deg_m)
    mask = np.repeat(cs.degree_window_mask(window_degree), d_dim).astype(float)

    p_y = y_basis @ y_basis.conj().T
    p_ne = np.kron(np.eye(nj_dim, dtype=complex), e_basis @ e_basis.conj().T)
    diff = (p_y - p_ne) * mask[:, None] * mask[None, :]
    window_residual = spectral_norm(diff)

    return CyclicSpanResult(
        e_basis=e_basis,
        e_dim=e_basis.shape[1],
        span_dim=y_basis.shape[1],
        window_degree=window_degree,
        window_residual=window_residual,
        verdict=window_residual <= tol,
        cyclic=e_basis.shape[1] == d_dim,
        co_invariance_residuals=co_res,
    )
