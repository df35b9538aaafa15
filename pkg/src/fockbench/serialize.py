"""JSON codecs for matrices, polynomials, and ideal shorthands.

Matrices travel as {"shape": [rows, cols], "data": [[re, im], ...]} with
row-major data; polynomial terms as {"word": [letters], "re": x, "im": y}.
Reports embed matrices rather than referencing files, so a report is a
self-contained golden artifact.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError
from .ideals import (
    NcPolynomial,
    commutator_generators,
    q_commutator_generators,
    word_length_generators,
)
from .words import Word


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return {
        "shape": [int(a.shape[0]), int(a.shape[1])],
        "data": [[float(v.real), float(v.imag)] for v in a.reshape(-1)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = (int(x) for x in obj["shape"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"bad matrix object: {exc}") from exc
    if len(data) != rows * cols:
        raise InvalidParameterError(f"matrix data length {len(data)} != {rows}*{cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return flat.reshape(rows, cols)


def polynomial_to_json(p: NcPolynomial) -> list[dict]:
    terms = sorted(p.terms.items(), key=lambda t: (len(t[0]), t[0].letters))
    return [
        {"word": list(w.letters), "re": float(c.real), "im": float(c.imag)}
        for w, c in terms
    ]


def polynomial_from_json(obj: list) -> NcPolynomial:
    terms: dict[Word, complex] = {}
    for item in obj:
        w = Word(tuple(int(x) for x in item["word"]))
        terms[w] = terms.get(w, 0j) + complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
    return NcPolynomial(terms)


def ideal_from_spec(n: int, spec) -> list[NcPolynomial]:
    """Resolve an ideal description to generators.

    Accepts the shorthand strings "free", "commutative", "truncated(m)",
    "q-commutative" (with a dict carrying the q matrix), or an explicit
    {"kind": ..., ...} / list-of-polynomials form."""
    if spec is None:
        return []
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s == "free":
            return []
        if s == "commutative":
            return commutator_generators(n)
        if s.startswith("truncated(") and s.endswith(")"):
            return word_length_generators(n, int(s[len("truncated(") : -1]))
        raise InvalidParameterError(f"unknown ideal shorthand {spec!r}")
    if isinstance(spec, list):
        return [polynomial_from_json(p) for p in spec]
    if isinstance(spec, dict):
        kind = str(spec.get("kind", "")).lower().replace("_", "-")
        if kind == "free":
            return []
        if kind == "commutative":
            return commutator_generators(n)
        if kind == "truncated":
            return word_length_generators(n, int(spec["m"]))
        if kind == "q-commutative":
            q = matrix_from_json(spec["q"]) if isinstance(spec["q"], dict) else np.asarray(spec["q"], dtype=complex)
            if q.shape != (n, n):
                raise InvalidParameterError(f"q matrix must be {n}x{n}")
            return q_commutator_generators(q)
        if kind == "custom":
            return [polynomial_from_json(p) for p in spec["generators"]]
        raise InvalidParameterError(f"unknown ideal kind {spec.get('kind')!r}")
    raise InvalidParameterError("ideal spec must be a string, list, or object")


def coefficients_to_json(op) -> list[dict]:
    """Dump a multi-analytic operator's Fourier coefficients in basis order,
    one {word, matrix} entry per word; the golden-file format for symbols."""
    items = sorted(op.coefficients.items(), key=lambda t: (len(t[0]), t[0].letters))
    return [{"word": list(w.letters), "matrix": matrix_to_json(c)} for w, c in items]


def coefficients_from_json(obj: list) -> dict:
    out = {}
    for item in obj:
        out[Word(tuple(int(x) for x in item["word"]))] = matrix_from_json(item["matrix"])
    return out


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def point_from_json(obj, n: int) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.shape == (n, 2):
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.shape == (n,):
        return arr.astype(complex)
    raise InvalidParameterError(f"point must be a list of {n} [re, im] pairs")
