"""JSON and CSV encodings of polynomials and matrices.

Complex numbers are written as ``[re, im]`` pairs. A polynomial is

    {"n": 3, "a0": [0, 0], "linear": [[re, im], ...], "quad": [[[re, im], ...], ...]}
"""
from __future__ import annotations

import csv
import io

import numpy as np

from .core import PolySpec, SymCoeffMatrix, symmetrize


def complex_to_pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def pair_to_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(re, im)


def array_to_pairs(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return complex_to_pair(a)
    return [array_to_pairs(x) for x in a]


def pairs_to_array(v) -> np.ndarray:
    """Inverse of :func:`array_to_pairs`; bare reals are accepted too."""

    def conv(x):
        if isinstance(x, (int, float)):
            return complex(x)
        if len(x) == 2 and all(isinstance(t, (int, float)) for t in x):
            return complex(x[0], x[1])
        return [conv(t) for t in x]

    return np.array(conv(v), dtype=complex)


def poly_to_json(p: PolySpec) -> dict:
    return {
        "n": p.n,
        "a0": complex_to_pair(p.a0),
        "linear": array_to_pairs(p.linear),
        "quad": array_to_pairs(p.quad.entries),
    }


def poly_from_json(d: dict) -> PolySpec:
    n = int(d["n"])
    a0 = pair_to_complex(d.get("a0", 0.0))
    lin = pairs_to_array(d["linear"]) if d.get("linear") else np.zeros(n, dtype=complex)
    quad = pairs_to_array(d["quad"]).reshape(n, n)
    return PolySpec(n, a0, lin, symmetrize(quad))


def matrix_to_json(a: SymCoeffMatrix | np.ndarray) -> list:
    m = a.entries if isinstance(a, SymCoeffMatrix) else a
    return array_to_pairs(m)


def matrix_from_json(v) -> np.ndarray:
    return pairs_to_array(v)


def matrix_to_csv(a) -> str:
    m = a.entries if isinstance(a, SymCoeffMatrix) else np.asarray(a)
    if np.iscomplexobj(m):
        if np.any(m.imag):
            raise ValueError("CSV export is for real matrices; use JSON for complex entries")
        m = m.real
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([format(float(x), ".12g") for x in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    return np.array([[float(x) for x in r] for r in rows])
