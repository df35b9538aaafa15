"""Free-semigroup words and the degree-truncated full Fock space.

A word is a finite sequence of generator indices in 1..n; the empty word is
the semigroup identity. The truncated Fock space keeps the orthonormal basis
e_alpha for all words of length at most N, ordered by length and then
lexicographically, so every operator in the package is a concrete complex
matrix with a reproducible basis.

Truncation rule: creation operators annihilate the top degree slice, which
keeps them endomorphisms of one space. Identities that move weight upward in
degree are therefore exact only on the degree <= N-1 part; adjoints lower
degree and are exact everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class Word:
    """An element of the free semigroup on n generators (empty = identity)."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x < 1 for x in letters):
            raise InvalidParameterError(f"generator indices must be >= 1, got {letters}")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def reverse(self) -> "Word":
        return Word(self.letters[::-1])

    def __repr__(self) -> str:
        if not self.letters:
            return "g0"
        return "".join(f"g{i}" for i in self.letters)


IDENTITY_WORD = Word(())


def enumerate_words(n: int, max_len: int) -> list[Word]:
    """All words of length <= max_len in length-lexicographic order.

    Index 0 is the identity word; the degree-k slice holds exactly n**k words.
    """
    if n < 1:
        raise InvalidParameterError(f"need n >= 1 generators, got {n}")
    if max_len < 0:
        raise InvalidParameterError(f"need max_len >= 0, got {max_len}")
    words: list[Word] = [IDENTITY_WORD]
    level: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        level = [w + (i,) for w in level for i in range(1, n + 1)]
        words.extend(Word(w) for w in level)
    return words


class TruncatedFock:
    """Orthonormal word basis of the full Fock space up to a fixed degree."""

    def __init__(self, n: int, max_degree: int):
        self.n = int(n)
        self.max_degree = int(max_degree)
        self.words: tuple[Word, ...] = tuple(enumerate_words(self.n, self.max_degree))
        self.index: dict[Word, int] = {w: k for k, w in enumerate(self.words)}
        offsets = [0]
        for m in range(self.max_degree + 1):
            offsets.append(offsets[-1] + self.n**m)
        self.slice_offsets: tuple[int, ...] = tuple(offsets)
        self.degrees = np.array([len(w) for w in self.words], dtype=int)

    @property
    def dim(self) -> int:
        return len(self.words)

    def slice_range(self, m: int) -> slice:
        if not 0 <= m <= self.max_degree:
            raise InvalidParameterError(f"degree {m} outside [0, {self.max_degree}]")
        return slice(self.slice_offsets[m], self.slice_offsets[m + 1])

    def word_index(self, word: Word) -> int | None:
        """Basis index of e_word, or None if the word exceeds the truncation."""
        return self.index.get(word)

    def degree_mask(self, m: int) -> np.ndarray:
        return self.degrees == m

    def degree_le_mask(self, m: int) -> np.ndarray:
        return self.degrees <= m

    def basis_vector(self, word: Word) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[self.index[word]] = 1.0
        return e

    def __repr__(self) -> str:
        return f"TruncatedFock(n={self.n}, max_degree={self.max_degree}, dim={self.dim})"


def creation_matrix(fock: TruncatedFock, side: Literal["left", "right"], i: int) -> np.ndarray:
    """Matrix of the left (e_a -> e_{g_i a}) or right (e_a -> e_{a g_i}) creation operator.

    Words of top degree are annihilated; on the degree <= N-1 span the matrix
    is a partial isometry with orthogonal range slices.
    """
    if not 1 <= i <= fock.n:
        raise InvalidParameterError(f"generator index {i} outside 1..{fock.n}")
    if side not in ("left", "right"):
        raise InvalidParameterError(f"side must be 'left' or 'right', got {side!r}")
    g = Word((i,))
    mat = np.zeros((fock.dim, fock.dim), dtype=complex)
    for col, w in enumerate(fock.words):
        if len(w) >= fock.max_degree:
            continue
        target = g * w if side == "left" else w * g
        mat[fock.index[target], col] = 1.0
    return mat


def left_creation_tuple(fock: TruncatedFock) -> list[np.ndarray]:
    return [creation_matrix(fock, "left", i) for i in range(1, fock.n + 1)]


def right_creation_tuple(fock: TruncatedFock) -> list[np.ndarray]:
    return [creation_matrix(fock, "right", i) for i in range(1, fock.n + 1)]


def flip_unitary(fock: TruncatedFock) -> np.ndarray:
    """Permutation matrix e_alpha -> e_{reverse(alpha)}; an involution that
    conjugates left creation into right creation."""
    mat = np.zeros((fock.dim, fock.dim), dtype=complex)
    for col, w in enumerate(fock.words):
        mat[fock.index[w.reverse()], col] = 1.0
    return mat


def word_operator(ops: Iterable[np.ndarray], word: Word) -> np.ndarray:
    """Letter-ordered operator product T_alpha; the empty word gives the identity."""
    ops = list(ops)
    if not ops:
        raise InvalidParameterError("need at least one operator")
    dim = ops[0].shape[0]
    result = np.eye(dim, dtype=complex)
    for letter in word.letters:
        result = result @ ops[letter - 1]
    return result
