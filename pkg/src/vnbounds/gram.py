"""Gram-form maxima over unit vectors and the infinity-to-one norm.

``gram_max`` maximizes ``|sum_jk a_jk <X_j, X_k>|`` over real unit vectors,
the quantity that ``||p_A(T)||`` reaches on symmetric Varopoulos tuples.
The denominators (``||p_A||`` on the torus, or the sign-vector maximum for
PSD ``A``) come from :mod:`vnbounds.torus`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import BudgetError, SymCoeffMatrix, as_matrix, is_psd, poly_from_matrix
from .torus import SIGN_BUDGET, SignWitness, SupResult, TorusConfig, sign_sup, torus_sup
from .varopoulos import CommutingTuple, RatioReport, eval_poly_on_tuple, operator_norm, quad_norm_closed, realify

__all__ = [
    "GramConfig",
    "GramWitness",
    "InfToOneResult",
    "FJFamily",
    "FJRatio",
    "ScriptARatio",
    "inf_to_one_norm",
    "gram_max",
    "gram_value",
    "beta_rank1",
    "fj_matrix",
    "fj_ratio",
    "cplus_witness",
    "script_a_ratio",
]

COMPLEX_BUDGET = 6
PHASE_GRID = 64


@dataclass(frozen=True)
class GramConfig:
    multistarts: int = 64
    tol: float = 1e-10
    max_iter: int = 20_000
    seed: int = 0


@dataclass(frozen=True)
class GramWitness:
    """Unit vectors ``X_1..X_n`` (rows) in ``R^rank`` and ``sum a_jk <X_j, X_k>``.

    ``value`` keeps its sign; ``modulus`` is the Gram-form maximum.
    """

    rank: int
    vectors: np.ndarray
    value: float
    converged: bool = True

    @property
    def modulus(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "vectors": self.vectors.tolist(),
            "value": self.value,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GramWitness":
        return cls(int(d["rank"]), np.asarray(d["vectors"], dtype=float), float(d["value"]), bool(d.get("converged", True)))


@dataclass(frozen=True)
class InfToOneResult:
    value: float
    v: np.ndarray
    w: np.ndarray
    field: str
    stationarity: float = 0.0


def gram_value(a, vectors) -> float:
    """``sum_jk a_jk <X_j, X_k>`` for the rows of ``vectors``."""
    A = a.entries.real if isinstance(a, SymCoeffMatrix) else np.asarray(a, dtype=float)
    x = np.asarray(vectors, dtype=float)
    return float(np.sum(A * (x @ x.T)))


def _phase(u: np.ndarray) -> np.ndarray:
    mag = np.abs(u)
    out = np.ones_like(u, dtype=complex)
    nz = mag > 0
    out[nz] = u[nz] / mag[nz]
    return out


def inf_to_one_norm(a, field: str = "real", cfg: GramConfig | None = None) -> InfToOneResult:
    """``sup |<A v, w>|`` over ``||v||_inf, ||w||_inf <= 1``.

    For a fixed ``v`` the best ``w`` gives ``||A v||_1``, and that is convex
    in ``v``, so the supremum sits on the extreme points: sign vectors in the
    real case, unimodular vectors in the complex case. The real case is
    enumerated exactly (``n <= 24``). The complex case (``n <= 6``) starts
    from the best points of a 64-phase grid and alternates the closed-form
    updates ``w = phase(A v)``, ``v = phase(A^* w)``.
    """
    cfg = cfg or GramConfig()
    A = a.entries if isinstance(a, SymCoeffMatrix) else np.asarray(a, dtype=complex)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    n = A.shape[1]
    if field == "real":
        if np.any(A.imag):
            raise ValueError("real infinity-to-one norm needs a real matrix")
        return _inf_to_one_real(A.real)
    if field != "complex":
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    if n > COMPLEX_BUDGET:
        raise BudgetError(f"complex infinity-to-one norm limited to n <= {COMPLEX_BUDGET}, got {n}")
    real = _inf_to_one_real(A.real) if not np.any(A.imag) else None

    rng = np.random.default_rng(cfg.seed)
    grid = np.exp(2j * np.pi * np.arange(PHASE_GRID) / PHASE_GRID)
    if PHASE_GRID ** (n - 1) <= 1 << 18:
        combos = list(itertools.product(range(PHASE_GRID), repeat=n - 1))
        idx = np.array(combos, dtype=int).reshape(len(combos), n - 1)
    else:
        idx = rng.integers(0, PHASE_GRID, size=(1 << 16, n - 1))
    cand = np.ones((idx.shape[0], n), dtype=complex)
    cand[:, 1:] = grid[idx]
    scores = np.abs(cand @ A.T).sum(axis=1)
    top = np.argsort(-scores, kind="stable")[: cfg.multistarts]
    starts = [cand[i] for i in top]
    starts.append(np.ones(n, dtype=complex))
    if real is not None:
        starts.append(real.v.astype(complex))

    best = None
    for v in starts:
        val = np.abs(A @ v).sum()
        for _ in range(10_000):
            w = _phase(A @ v)
            v = _phase(A.conj().T @ w)
            new = np.abs(A @ v).sum()
            if new - val <= 1e-15 * max(1.0, new):
                val = max(val, new)
                break
            val = new
        if best is None or val > best[0] + 1e-13:
            best = (val, v.copy())
    val, v = best
    w = _phase(A @ v)
    station = float(np.max(np.abs(v - _phase(A.conj().T @ w))))
    value = float(abs(np.vdot(w, A @ v)))
    if real is not None and real.value > value:
        return InfToOneResult(real.value, real.v.astype(complex), real.w.astype(complex), "complex", 0.0)
    return InfToOneResult(value, v, w, "complex", station)


def _inf_to_one_real(A: np.ndarray) -> InfToOneResult:
    n = A.shape[1]
    if n > SIGN_BUDGET:
        raise BudgetError(f"sign enumeration over 2^{n - 1} vectors exceeds budget (n <= {SIGN_BUDGET})")
    total = 1 << (n - 1)
    best_val, best_v = -1.0, None
    shifts = np.arange(n - 2, -1, -1, dtype=np.int64)
    for start in range(0, total, 1 << 16):
        ids = np.arange(start, min(total, start + (1 << 16)), dtype=np.int64)
        s = np.ones((ids.size, n))
        s[:, 1:] = 1 - 2 * ((ids[:, None] >> shifts[None, :]) & 1)
        vals = np.abs(s @ A.T).sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_v = float(vals[i]), s[i]
    w = np.where(A @ best_v >= 0, 1.0, -1.0)
    return InfToOneResult(best_val, best_v, w, "real")


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _ascend_gram(A: np.ndarray, x: np.ndarray, cfg: GramConfig):
    """Projected-gradient ascent of ``tr(A X X^t)`` over rows on the unit sphere."""
    f = np.einsum("jk,sjr,skr->s", A, x, x)
    step = np.full(x.shape[0], 1.0 / (2 * max(np.abs(A).sum(axis=1).max(), 1e-300)))
    active = np.ones(x.shape[0], dtype=bool)
    for _ in range(cfg.max_iter):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            break
        xa = x[ia]
        g = 2 * np.einsum("jk,skr->sjr", A, xa)
        gp = g - np.sum(g * xa, axis=-1, keepdims=True) * xa
        gn = np.sqrt(np.sum(gp**2, axis=(1, 2)))
        done = gn <= cfg.tol
        active[ia[done]] = False
        ia, xa, gp, gn = ia[~done], xa[~done], gp[~done], gn[~done]
        if ia.size == 0:
            break
        pending = np.ones(ia.size, dtype=bool)
        for _ in range(60):
            sel = np.flatnonzero(pending)
            trial = _normalize_rows(xa[sel] + step[ia[sel], None, None] * gp[sel])
            ft = np.einsum("jk,sjr,skr->s", A, trial, trial)
            # Armijo sufficient increase
            ok = ft >= f[ia[sel]] + 1e-4 * step[ia[sel]] * gn[sel] ** 2
            acc = sel[ok]
            gain = ft[ok] - f[ia[acc]]
            # accepted steps that no longer change the value: stationary up to rounding
            active[ia[acc[gain <= 1e-15 * np.maximum(1.0, np.abs(ft[ok]))]]] = False
            x[ia[acc]] = trial[ok]
            f[ia[acc]] = ft[ok]
            step[ia[acc]] *= 1.5
            pending[acc] = False
            if not pending.any():
                break
            step[ia[pending]] *= 0.5
        active[ia[pending]] = False
    g = 2 * np.einsum("jk,skr->sjr", A, x)
    gp = g - np.sum(g * x, axis=-1, keepdims=True) * x
    gn = np.sqrt(np.sum(gp**2, axis=(1, 2)))
    return x, f, gn


def _polish(A: np.ndarray, x: np.ndarray, sweeps: int = 2000, tol: float = 1e-13) -> np.ndarray:
    """Block-coordinate sweeps ``X_j <- normalize(sum_{k != j} a_jk X_k)``.

    Each update maximizes the form exactly in ``X_j``, so the value never
    decreases; a fixed point is a stationary point.
    """
    x = x.copy()
    off = A - np.diag(np.diag(A))
    for _ in range(sweeps):
        moved = 0.0
        for j in range(x.shape[0]):
            g = off[j] @ x
            nrm = np.linalg.norm(g)
            if nrm == 0:
                continue
            new = g / nrm
            moved = max(moved, float(np.max(np.abs(new - x[j]))))
            x[j] = new
        if moved <= tol:
            break
    return x


def gram_max(a, rank: int | None = None, cfg: GramConfig | None = None) -> GramWitness:
    """Maximize ``|sum_jk a_jk <X_j, X_k>|`` over real unit vectors in ``R^rank``.

    Runs seeded multistart projected-gradient ascent with step halving, once
    for ``A`` and once for ``-A``. When ``n <= 24`` the optimal sign vector is
    added as a rank-one start, so the result is never below
    :func:`~vnbounds.torus.sign_sup`.
    """
    cfg = cfg or GramConfig()
    q = as_matrix(a)
    if not q.is_real:
        raise ValueError("gram_max expects a real symmetric matrix")
    A = q.real()
    n = A.shape[0]
    r = n if rank is None else int(rank)
    if r < 1:
        raise ValueError("rank must be at least 1")
    rng = np.random.default_rng(cfg.seed)
    base = _normalize_rows(rng.standard_normal((cfg.multistarts, n, r)))
    sw = sign_sup(q) if n <= SIGN_BUDGET else None

    best = None
    for sgn in (1.0, -1.0):
        starts = base.copy()
        if sw is not None:
            e = np.zeros((1, n, r))
            e[0, :, 0] = sw.signs
            starts = np.concatenate([e, starts])
        x, f, gn = _ascend_gram(sgn * A, starts, cfg)
        i = int(np.argmax(f))
        xi = _polish(sgn * A, x[i])
        fi = gram_value(sgn * A, xi)
        if fi < f[i] - 1e-12 * max(1.0, abs(f[i])):
            xi, fi = x[i], f[i]
        if best is None or fi > best[0] + 1e-12:
            best = (fi, xi, sgn)
    _, x, sgn = best
    g = 2 * sgn * A @ x
    gn = np.linalg.norm(g - np.sum(g * x, axis=1, keepdims=True) * x)
    # rounding floor for the projected gradient at this scale
    floor = 1e-12 * max(1.0, float(np.abs(A).sum(axis=1).max()))
    return GramWitness(r, x, gram_value(A, x), bool(gn <= max(cfg.tol, floor)))


def beta_rank1(a, resolution: int = 128, starts: int = 16) -> float:
    """``sup |sum_ij a_ij z_i conj(z_j)|`` over the torus, for ``3 x 3`` matrices.

    Extreme points of the 3x3 correlation matrices have rank one, so this is
    the supremum of ``|<A, B>|`` over all correlation matrices ``B``. Only
    two angles are free since ``z_1 = 1`` can be fixed.
    """
    A = as_matrix(a).entries
    if A.shape[0] != 3:
        raise ValueError("rank-one reduction is only valid for n = 3")

    def val(th):
        z = np.exp(1j * np.concatenate([np.zeros(th.shape[:-1] + (1,)), th], axis=-1))
        return np.abs(np.einsum("...i,ij,...j->...", z, A, np.conj(z)))

    g = 2 * np.pi * np.arange(resolution) / resolution
    grid = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = val(grid)
    best = float(vals.max())
    for i in np.argsort(-vals, kind="stable")[:starts]:
        res = minimize(lambda th: -val(th) ** 2, grid[i], method="BFGS", options={"gtol": 1e-12})
        best = max(best, float(val(res.x)))
    return best


@dataclass(frozen=True)
class FJFamily:
    """The ``k(k-1)`` vectors of ``R^k`` with two nonzero entries ``(1, 1)`` or ``(1, -1)``.

    Ordered by position pair ``(i, j)``, ``i < j``, lexicographically, with
    the ``(1, 1)`` pattern before ``(1, -1)``. ``matrix`` is their Gram matrix.
    """

    k: int
    vectors: np.ndarray
    matrix: SymCoeffMatrix = field(repr=False)

    @property
    def l(self) -> int:
        return self.vectors.shape[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "vectors": self.vectors.tolist(),
            "matrix": self.matrix.entries.real.astype(int).tolist(),
        }


def fj_matrix(k: int) -> FJFamily:
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > 8:
        raise BudgetError("k <= 8 supported (l = 56)")
    vecs = []
    for i, j in itertools.combinations(range(k), 2):
        for second in (1, -1):
            v = np.zeros(k, dtype=int)
            v[i], v[j] = 1, second
            vecs.append(v)
    v = np.array(vecs)
    return FJFamily(k, v, SymCoeffMatrix((v @ v.T).astype(complex)))


@dataclass(frozen=True)
class FJRatio:
    k: int
    l: int
    gram: GramWitness
    signs: SignWitness
    ratio: float
    closed_form: float

    @property
    def gap(self) -> float:
        return abs(self.ratio - self.closed_form)


def fj_ratio(k: int, cfg: GramConfig | None = None) -> FJRatio:
    """Gram maximum over sign maximum for ``A_k``; compares with ``(3k-3)/(2k-1)``."""
    if k > 5:
        raise BudgetError("fj_ratio limited to k <= 5 (2^20 sign vectors)")
    fam = fj_matrix(k)
    gw = gram_max(fam.matrix, cfg=cfg)
    sw = sign_sup(fam.matrix)
    return FJRatio(k, fam.l, gw, sw, gw.modulus / sw.modulus, (3 * k - 3) / (2 * k - 1))


def cplus_witness(
    a,
    cfg: GramConfig | None = None,
    denominator: str = "sign",
    torus_cfg: TorusConfig | None = None,
) -> RatioReport:
    """Witness of ``||p_A(T)|| / ||p_A||`` for positive semidefinite ``A``.

    The numerator is realized by a symmetric Varopoulos tuple built from the
    Gram maximizers, and its dense operator norm is recorded next to the Gram
    value. For PSD ``A`` the torus sup equals the sign-vector maximum, which
    is the default denominator; ``denominator="torus"`` searches the torus.
    """
    if not is_psd(a):
        raise ValueError("cplus_witness needs a positive semidefinite matrix")
    q = as_matrix(a)
    s = SymCoeffMatrix(q.entries.real.astype(complex))
    p = poly_from_matrix(q)
    gw = gram_max(s, cfg=cfg)
    tup = CommutingTuple.symmetric(realify(gw.vectors.astype(complex)))
    closed = quad_norm_closed(q, tup)
    oracle = operator_norm(eval_poly_on_tuple(p, tup.operators()))
    sw = sign_sup(s)
    sup: SupResult | None = None
    if denominator == "torus":
        sup = torus_sup(p, torus_cfg)
        den = sup.value
    elif denominator == "sign":
        den = sw.modulus
    else:
        raise ValueError("denominator must be 'sign' or 'torus'")
    return RatioReport(
        polynomial=p,
        sup=sup,
        sup_value=den,
        sup_method=denominator,
        operator_value=closed,
        ratio=closed / den,
        tuple=tup,
        certificates={
            "gram_value": gw.value,
            "oracle_norm": oracle,
            "oracle_gap": abs(oracle - closed),
            "commutation_defect": tup.commutation_defect(),
            "contractive": tup.contractive,
            "sign_value": sw.modulus,
            "gram_converged": gw.converged,
        },
        witness={"gram": gw.to_dict(), "signs": sw.to_dict()},
    )


@dataclass(frozen=True)
class ScriptARatio:
    value: float
    inf_to_one: InfToOneResult
    sup: SupResult
    field: str

    @property
    def ratio(self) -> float:
        return self.value


def script_a_ratio(
    a,
    field: str = "complex",
    cfg: GramConfig | None = None,
    torus_cfg: TorusConfig | None = None,
) -> ScriptARatio:
    """``||A||_{inf->1} / ||p_A||`` for one symmetric matrix."""
    q = as_matrix(a)
    ito = inf_to_one_norm(q, field=field, cfg=cfg)
    sup = torus_sup(poly_from_matrix(q), torus_cfg)
    if sup.value == 0:
        raise ValueError("zero polynomial")
    return ScriptARatio(ito.value / sup.value, ito, sup, field)
