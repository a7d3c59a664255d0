"""Varopoulos operators and the norm of ``p(T)`` on tuples of them.

For ``x, y`` in ``C^m`` the operator ``T_{x,y}`` acts on ``C (+) C^m (+) C`` as

    [[0, x#, 0],
     [0, 0,  y],
     [0, 0,  0]]

where ``x#(v) = sum_j x_j v_j`` is the *bilinear* pairing (no conjugation).
The product ``T_{x1,y1} T_{x2,y2}`` has a single nonzero entry ``x1#(y2)`` in
the top-right corner, which is what makes these operators useful.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import NonCommutingError, PolySpec, as_matrix

__all__ = [
    "VaropoulosPair",
    "CommutingTuple",
    "bracket",
    "inner",
    "make_varopoulos",
    "commute_check",
    "realify",
    "quad_norm_closed",
    "eval_poly_on_tuple",
    "operator_norm",
    "commutator_norm",
    "RatioReport",
    "vn_ratio",
]

COMMUTE_TOL = 1e-12
CONTRACT_TOL = 1e-12


def bracket(x, y) -> complex:
    """Bilinear pairing ``[x#, y] = sum_j x_j y_j``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return complex(np.sum(x * y))


def inner(x, y) -> complex:
    """Hilbert space inner product ``<x, y> = sum_j x_j conj(y_j)``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return complex(np.sum(x * np.conj(y)))


def _pairs(v) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v, dtype=complex)]


@dataclass(frozen=True, eq=False)
class VaropoulosPair:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=complex).reshape(-1)
        y = np.array(self.y, dtype=complex).reshape(-1)
        if x.shape != y.shape:
            raise ValueError(f"x and y must have equal length, got {x.size} and {y.size}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def symmetric(cls, x) -> "VaropoulosPair":
        """The pair ``(x, x)``, i.e. ``T_x``."""
        return cls(x, x)

    @property
    def m(self) -> int:
        return self.x.size

    @property
    def dim(self) -> int:
        return self.m + 2

    @property
    def norm(self) -> float:
        """Closed-form operator norm ``max(||x||, ||y||)``."""
        return float(max(np.linalg.norm(self.x), np.linalg.norm(self.y)))

    def to_dict(self) -> dict:
        return {"x": _pairs(self.x), "y": _pairs(self.y)}

    @classmethod
    def from_dict(cls, d: dict) -> "VaropoulosPair":
        return cls(
            [complex(re, im) for re, im in d["x"]],
            [complex(re, im) for re, im in d["y"]],
        )


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """Pairwise commuting Varopoulos operators on a common space.

    Commutation is checked on construction through the brackets; the
    ``contractive`` flag records whether every operator has norm at most one.
    """

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(self.pairs)
        if not pairs:
            raise ValueError("empty tuple")
        m = pairs[0].m
        if any(pr.m != m for pr in pairs):
            raise ValueError("all pairs must share the same m")
        object.__setattr__(self, "pairs", pairs)
        defect = self.commutation_defect()
        if defect > COMMUTE_TOL:
            raise NonCommutingError(f"pairs do not commute (bracket defect {defect:.3g})")

    @classmethod
    def symmetric(cls, xs) -> "CommutingTuple":
        """``(T_{x_1}, ..., T_{x_n})`` from the rows of ``xs``; these always commute."""
        return cls(tuple(VaropoulosPair.symmetric(x) for x in np.asarray(xs)))

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def m(self) -> int:
        return self.pairs[0].m

    @property
    def contractive(self) -> bool:
        return all(pr.norm <= 1 + CONTRACT_TOL for pr in self.pairs)

    def bracket_matrix(self) -> np.ndarray:
        """``B[j, k] = [x_j#, y_k]``."""
        xs = np.stack([pr.x for pr in self.pairs])
        ys = np.stack([pr.y for pr in self.pairs])
        return xs @ ys.T

    def commutation_defect(self) -> float:
        b = self.bracket_matrix()
        return float(np.max(np.abs(b - b.T), initial=0.0))

    def operators(self) -> list:
        return [make_varopoulos(pr) for pr in self.pairs]

    def to_list(self) -> list:
        return [pr.to_dict() for pr in self.pairs]

    @classmethod
    def from_list(cls, items) -> "CommutingTuple":
        return cls(tuple(VaropoulosPair.from_dict(d) for d in items))


def make_varopoulos(pair: VaropoulosPair) -> np.ndarray:
    """Dense ``(m+2) x (m+2)`` matrix of ``T_{x,y}``."""
    m = pair.m
    t = np.zeros((m + 2, m + 2), dtype=complex)
    t[0, 1 : m + 1] = pair.x
    t[1 : m + 1, m + 1] = pair.y
    return t


def commute_check(p1: VaropoulosPair, p2: VaropoulosPair, tol: float = COMMUTE_TOL) -> bool:
    """``T_{x1,y1}`` and ``T_{x2,y2}`` commute iff ``[x1#, y2] == [x2#, y1]``."""
    if p1.m != p2.m:
        raise ValueError(f"pairs live on different spaces (m={p1.m} vs m={p2.m})")
    return abs(bracket(p1.x, p2.y) - bracket(p2.x, p1.y)) <= tol


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return operator_norm(a @ b - b @ a)


def realify(x) -> np.ndarray:
    """Map complex vectors to real ones of twice the length.

    ``R = ((conj(x) + x) / 2, i (conj(x) - x) / 2) = (Re x, Im x)``, so that
    ``<R_j, R_k> = Re <x_j, x_k>``. Works row-wise on 2-d input.
    """
    x = np.asarray(x, dtype=complex)
    first = (np.conj(x) + x) / 2
    second = 1j * (np.conj(x) - x) / 2
    return np.concatenate([first.real, second.real], axis=-1)


def quad_norm_closed(a, t: CommutingTuple) -> float:
    """``||p_A(T)||`` for a Varopoulos tuple: ``|sum_jk a_jk [x_j#, y_k]|``."""
    q = as_matrix(a)
    if q.n != t.n:
        raise ValueError(f"matrix is {q.n}x{q.n} but tuple has {t.n} operators")
    return float(abs(np.sum(q.entries * t.bracket_matrix())))


def eval_poly_on_tuple(p: PolySpec, ops: Sequence[np.ndarray], commute_tol: float = 1e-8) -> np.ndarray:
    """Dense ``a0 I + sum a_j T_j + sum a_jk T_j T_k``."""
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if len(ops) != p.n:
        raise ValueError(f"polynomial has {p.n} variables but {len(ops)} operators were given")
    dim = ops[0].shape[0]
    if any(o.shape != (dim, dim) for o in ops):
        raise ValueError("operators must be square and of equal dimension")
    for j in range(p.n):
        for k in range(j + 1, p.n):
            c = commutator_norm(ops[j], ops[k])
            if c > commute_tol:
                raise NonCommutingError(f"T_{j + 1} and T_{k + 1} do not commute (||[T_j, T_k]|| = {c:.3g})")
    out = p.a0 * np.eye(dim, dtype=complex)
    A = p.quad.entries
    for j in range(p.n):
        out += p.linear[j] * ops[j]
        for k in range(p.n):
            if A[j, k] != 0:
                out += A[j, k] * (ops[j] @ ops[k])
    return out


def operator_norm(
    t: np.ndarray,
    starts: int = 8,
    max_iter: int = 10_000,
    rtol: float = 1e-13,
    seed: int = 0,
) -> float:
    """Largest singular value by block power iteration on ``T* T``.

    The ``starts`` random vectors are iterated together and re-orthonormalized
    each step, with a Rayleigh-Ritz projection, so clustered top singular
    values do not slow convergence.
    """
    t = np.atleast_2d(np.asarray(t, dtype=complex))
    if t.size == 0:
        raise ValueError("empty operator")
    if not np.any(t):
        return 0.0
    tt = t.conj().T @ t
    dim = tt.shape[0]
    k = min(starts, dim)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k)))
    lam = 0.0
    for _ in range(max_iter):
        z = tt @ q
        h = q.conj().T @ z
        new = float(np.linalg.eigvalsh((h + h.conj().T) / 2)[-1])
        q, _ = np.linalg.qr(z)
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


@dataclass(frozen=True, eq=False)
class RatioReport:
    """A von Neumann ratio ``||p(T)|| / ||p||`` together with everything needed to recheck it.

    ``sup`` is the torus search result when the denominator came from one;
    ``sup_method`` says how ``sup_value`` was obtained (``"torus"`` or
    ``"sign"``). ``certificates`` holds scalar diagnostics, ``witness`` any
    extra witness data (Gram vectors, sign vectors).
    """

    polynomial: PolySpec
    sup: object
    sup_value: float
    sup_method: str
    operator_value: float
    ratio: float
    tuple: CommutingTuple
    certificates: dict
    witness: dict
    seed: int | None = None

    @property
    def violates_von_neumann(self) -> bool:
        return self.ratio > 1

    def to_dict(self) -> dict:
        from .serialize import poly_to_json

        return {
            "kind": "ratio",
            "polynomial": poly_to_json(self.polynomial),
            "sup": None if self.sup is None else self.sup.to_dict(),
            "sup_value": self.sup_value,
            "sup_method": self.sup_method,
            "operator_value": self.operator_value,
            "ratio": self.ratio,
            "tuple": self.tuple.to_list(),
            "certificates": {k: _plain(v) for k, v in self.certificates.items()},
            "witness": self.witness,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RatioReport":
        from .serialize import poly_from_json
        from .torus import SupResult

        return cls(
            polynomial=poly_from_json(d["polynomial"]),
            sup=None if d.get("sup") is None else SupResult.from_dict(d["sup"]),
            sup_value=float(d["sup_value"]),
            sup_method=d["sup_method"],
            operator_value=float(d["operator_value"]),
            ratio=float(d["ratio"]),
            tuple=CommutingTuple.from_list(d["tuple"]),
            certificates=dict(d.get("certificates", {})),
            witness=dict(d.get("witness", {})),
            seed=d.get("seed"),
        )


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return v


def vn_ratio(p: PolySpec, t: CommutingTuple, cfg=None) -> RatioReport:
    """Ratio ``||p(T)|| / ||p||_{D^n,inf}`` for a contractive Varopoulos tuple.

    Homogeneous quadratics use the bracket closed form; anything else is
    evaluated densely. The dense norm is always computed as a cross-check.
    A ratio above one exhibits a failure of the von Neumann inequality.
    """
    from .torus import torus_sup

    if t.n != p.n:
        raise ValueError(f"polynomial has {p.n} variables but the tuple has {t.n} operators")
    if not t.contractive:
        raise ValueError("tuple is not contractive; the ratio says nothing about C_2")
    oracle = operator_norm(eval_poly_on_tuple(p, t.operators()))
    value = quad_norm_closed(p.quad, t) if p.is_homogeneous else oracle
    sup = torus_sup(p, cfg)
    if sup.value == 0:
        raise ValueError("polynomial vanishes on the torus")
    return RatioReport(
        polynomial=p,
        sup=sup,
        sup_value=sup.value,
        sup_method="torus",
        operator_value=value,
        ratio=value / sup.value,
        tuple=t,
        certificates={
            "oracle_norm": oracle,
            "oracle_gap": abs(oracle - value),
            "commutation_defect": t.commutation_defect(),
            "contractive": t.contractive,
            "certificate_residual": sup.certificate_residual,
        },
        witness={},
    )
