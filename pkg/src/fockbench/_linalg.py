"""Dense complex linear-algebra helpers: rank decisions, PSD roots, spans.

All rank decisions in the package go through ``numerical_rank`` so the
singular-value cutoff (sigma > RANK_RTOL * sigma_max) is applied uniformly.
"""

from __future__ import annotations

import numpy as np

RANK_RTOL = 1e-9


def svd_positive(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full left singular vector basis and singular values, descending."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.eye(a.shape[0], dtype=complex), np.zeros(0)
    u, s, _ = np.linalg.svd(a, full_matrices=True)
    return u, s


def svdvals(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def spectral_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim < 2:
        return float(np.linalg.norm(a))
    a = a.astype(complex, copy=False)
    gram = a @ a.conj().T if a.shape[0] <= a.shape[1] else a.conj().T @ a
    top = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1])
    return float(np.sqrt(max(top, 0.0)))


def herm_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def herm_sqrt_psd(a: np.ndarray, clamp: float = 1e-12) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-clamp, 0) are treated as floating noise and clamped to
    zero; anything more negative raises ValueError.
    """
    vals, vecs = np.linalg.eigh(herm_part(np.asarray(a, dtype=complex)))
    if vals.size and float(vals.min()) < -clamp:
        raise ValueError(f"matrix is not PSD: min eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def eigh_descending(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(herm_part(np.asarray(a, dtype=complex)))
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def numerical_rank(singular_values: np.ndarray, rtol: float = RANK_RTOL, atol: float = 1e-12) -> int:
    """Count singular values above the relative cutoff.

    The absolute floor handles all-noise spectra (e.g. defects of coisometric
    tuples), where a purely relative rule would count machine eps as rank."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s.max() <= 0.0:
        return 0
    return int(np.count_nonzero(s > max(rtol * s.max(), atol)))


def matrix_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    return numerical_rank(svdvals(a), rtol)


def range_basis(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span, deterministic given the input."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, : numerical_rank(s, rtol)]


def complement_basis(a: np.ndarray, ambient_dim: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0 or a.shape[1] == 0:
        return np.eye(ambient_dim, dtype=complex)
    u, s = svd_positive(a)
    return u[:, numerical_rank(s, rtol):]


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spans of a and b,
    descending.

    Sine-based: the angles are the arcsines of the singular values of the
    component of one orthonormal basis outside the other span, which stays
    accurate for the near-zero angles the workbench compares (the cosine
    form loses half the digits there)."""
    qa = range_basis(a)
    qb = range_basis(b)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros(0)
    residual = qa - qb @ (qb.conj().T @ qa)
    s = svdvals(residual)
    return np.arcsin(np.clip(s, 0.0, 1.0))


def aitken_extrapolate(seq) -> float | None:
    """Aitken delta-squared acceleration from the last usable triple."""
    seq = list(seq)
    if len(seq) < 3:
        return None
    x0, x1, x2 = seq[-3], seq[-2], seq[-1]
    denom = x2 - 2.0 * x1 + x0
    if abs(denom) < 1e-300:
        return float(x2)
    return float(x2 - (x2 - x1) ** 2 / denom)

