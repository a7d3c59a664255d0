"""Degree-two polynomials in several complex variables and their coefficient matrices.

A polynomial ``p(z) = a0 + sum_j a_j z_j + sum_{j,k} a_jk z_j z_k`` is stored
as a :class:`PolySpec` whose quadratic part is always the symmetrized
coefficient matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "BudgetError",
    "NonCommutingError",
    "SymCoeffMatrix",
    "PolySpec",
    "TorusPoint",
    "as_matrix",
    "symmetrize",
    "poly_from_matrix",
    "homogenize",
    "evaluate",
    "is_psd",
    "VK_MATRIX",
    "vk_polynomial",
]

PSD_TOL = 1e-10


class BudgetError(ValueError):
    """Raised when a problem exceeds the configured enumeration or grid budget."""


class NonCommutingError(ValueError):
    """Raised when operators that must commute do not."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymCoeffMatrix:
    """Complex symmetric ``n x n`` coefficient matrix.

    Construction checks symmetry bit-exactly; use :func:`symmetrize` for
    arbitrary square input.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got shape {a.shape}")
        a = _frozen(a)
        if not np.array_equal(a, a.T):
            raise ValueError("coefficient matrix is not symmetric; use symmetrize()")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.any(self.entries.imag)

    def real(self) -> np.ndarray:
        """Real part as a float array; raises if any imaginary part is nonzero."""
        if not self.is_real:
            raise ValueError("matrix has nonzero imaginary part")
        return self.entries.real.copy()

    def __eq__(self, other):
        if not isinstance(other, SymCoeffMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"SymCoeffMatrix({self.entries.tolist()!r})"


MatrixLike = Union[SymCoeffMatrix, np.ndarray, list]


def as_matrix(a: MatrixLike) -> SymCoeffMatrix:
    """Coerce to :class:`SymCoeffMatrix`, symmetrizing plain arrays."""
    if isinstance(a, SymCoeffMatrix):
        return a
    return symmetrize(a)


def symmetrize(a) -> SymCoeffMatrix:
    """Return ``(A + A^t) / 2``.

    The polynomial ``p_A`` only sees the symmetric part of ``A``, so
    ``p_A(z) == p_{S(A)}(z)`` for every ``z``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"symmetrize needs a square matrix, got shape {a.shape}")
    # (x + y) / 2 is commutative in IEEE arithmetic, so the result is exactly symmetric.
    return SymCoeffMatrix((a + a.T) / 2)


@dataclass(frozen=True, eq=False)
class PolySpec:
    """Polynomial of degree at most two in ``n`` complex variables."""

    n: int
    a0: complex
    linear: np.ndarray
    quad: SymCoeffMatrix

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("need at least one variable")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a0", complex(self.a0))
        lin = np.asarray(self.linear, dtype=complex).reshape(-1)
        if lin.shape != (self.n,):
            raise ValueError(f"linear part must have length {self.n}, got {lin.shape}")
        object.__setattr__(self, "linear", _frozen(lin))
        quad = as_matrix(self.quad)
        if quad.n != self.n:
            raise ValueError(f"quadratic part must be {self.n}x{self.n}, got {quad.n}x{quad.n}")
        object.__setattr__(self, "quad", quad)

    @classmethod
    def build(cls, quad, linear=None, a0=0.0) -> "PolySpec":
        """Convenience constructor; ``quad`` is symmetrized if needed."""
        q = as_matrix(quad)
        lin = np.zeros(q.n, dtype=complex) if linear is None else linear
        return cls(q.n, a0, lin, q)

    @property
    def is_homogeneous(self) -> bool:
        """True for a pure quadratic form (no constant or linear part)."""
        return self.a0 == 0 and not np.any(self.linear)

    def __call__(self, z):
        return evaluate(self, z)

    def scaled(self, c: complex) -> "PolySpec":
        return PolySpec(self.n, c * self.a0, c * self.linear, SymCoeffMatrix(c * self.quad.entries))

    def __eq__(self, other):
        if not isinstance(other, PolySpec):
            return NotImplemented
        return (
            self.n == other.n
            and self.a0 == other.a0
            and np.array_equal(self.linear, other.linear)
            and self.quad == other.quad
        )

    __hash__ = None


@dataclass(frozen=True)
class TorusPoint:
    """Point ``(e^{i theta_1}, ..., e^{i theta_n})`` on the torus, stored by angles."""

    angles: np.ndarray = field()

    def __post_init__(self):
        th = np.mod(np.asarray(self.angles, dtype=float).reshape(-1), 2 * np.pi)
        # mod can round up to exactly 2*pi for tiny negative inputs
        th[th >= 2 * np.pi] = 0.0
        th.setflags(write=False)
        object.__setattr__(self, "angles", th)

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def __len__(self):
        return self.angles.shape[0]


def poly_from_matrix(a: MatrixLike) -> PolySpec:
    """Homogeneous polynomial ``p_A(z) = sum_{j,k} a_jk z_j z_k``."""
    q = as_matrix(a)
    return PolySpec(q.n, 0.0, np.zeros(q.n, dtype=complex), q)


def homogenize(p: PolySpec) -> SymCoeffMatrix:
    """Bordered ``(n+1) x (n+1)`` matrix with ``a0`` in the corner and ``a_j / 2`` on the border.

    ``p_{A(p)}(1, z) == p(z)``, which gives equal polydisc sup norms.
    """
    m = np.zeros((p.n + 1, p.n + 1), dtype=complex)
    m[0, 0] = p.a0
    m[0, 1:] = p.linear / 2
    m[1:, 0] = p.linear / 2
    m[1:, 1:] = p.quad.entries
    return SymCoeffMatrix(m)


def evaluate(p: PolySpec, z) -> complex | np.ndarray:
    """Evaluate ``p`` at ``z``; ``z`` may carry leading batch dimensions ``(..., n)``."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (p.n,):
        raise ValueError(f"point must have trailing dimension {p.n}, got shape {z.shape}")
    az = z @ p.quad.entries  # symmetric, so z A == (A z)^t
    val = p.a0 + z @ p.linear + np.sum(az * z, axis=-1)
    return complex(val) if np.ndim(val) == 0 else val


def is_psd(a: MatrixLike, tol: float = PSD_TOL) -> bool:
    """Whether ``a`` is Hermitian and positive semidefinite, both within ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    m = a.entries if isinstance(a, SymCoeffMatrix) else np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        return False
    h = (m + m.conj().T) / 2
    return bool(np.linalg.eigvalsh(h).min() >= -tol)


VK_MATRIX = SymCoeffMatrix(np.array([[1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=complex))


def vk_polynomial() -> PolySpec:
    """``z1^2 + z2^2 + z3^2 - 2 z1 z2 - 2 z2 z3 - 2 z3 z1``."""
    return poly_from_matrix(VK_MATRIX)
