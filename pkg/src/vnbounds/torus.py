"""Supremum norms over the polydisc, computed on the torus.

By the maximum modulus principle ``||p||_{D^n,inf}`` is attained on the
torus ``|z_j| = 1``, so everything here optimizes over angle vectors.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import BudgetError, PolySpec, SymCoeffMatrix, TorusPoint, as_matrix, is_psd, poly_from_matrix

log = logging.getLogger(__name__)

__all__ = [
    "TorusConfig",
    "SupResult",
    "SignWitness",
    "CollinearityCertificate",
    "PsdGapReport",
    "torus_sup",
    "sign_sup",
    "collinearity_certificate",
    "psd_torus_equals_sign",
    "balpha_matrix",
    "balpha_sup_norm",
    "balpha_gram_max",
    "balpha_gram_max_antipodal",
    "balpha_ratio",
    "balpha_ratio_scan",
]

SIGN_BUDGET = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class TorusConfig:
    """Search budget for :func:`torus_sup`.

    ``resolution=None`` picks 64 points per angle for ``n <= 3``, 24 for
    ``n <= 5`` and 16 beyond that.
    """

    resolution: int | None = None
    multistarts: int = 32
    tol: float = 1e-10
    max_iter: int = 500
    max_grid_points: int = 1 << 24
    random_starts: int = 0
    seed: int = 0

    def resolution_for(self, n: int) -> int:
        if self.resolution is not None:
            return self.resolution
        if n <= 3:
            return 64
        if n <= 5:
            return 24
        return 16


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: TorusPoint
    certificate_residual: float
    grid_resolution: int
    refinements: int
    upper_bound: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmax": self.argmax.angles.tolist(),
            "certificate_residual": self.certificate_residual,
            "grid_resolution": self.grid_resolution,
            "refinements": self.refinements,
            "upper_bound": self.upper_bound,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SupResult":
        return cls(
            value=float(d["value"]),
            argmax=TorusPoint(d["argmax"]),
            certificate_residual=float(d["certificate_residual"]),
            grid_resolution=int(d["grid_resolution"]),
            refinements=int(d["refinements"]),
            upper_bound=float(d["upper_bound"]),
            degenerate=bool(d.get("degenerate", False)),
        )


@dataclass(frozen=True)
class SignWitness:
    """Sign vector and the (signed) quadratic form value ``s^t A s`` it attains."""

    signs: np.ndarray
    value: float

    @property
    def modulus(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        return {"signs": [int(s) for s in self.signs], "value": self.value}


class CollinearityCertificate(NamedTuple):
    residual: float
    degenerate: bool


@dataclass(frozen=True)
class PsdGapReport:
    torus_value: float
    sign_value: float
    gap: float
    within_tolerance: bool
    torus: SupResult = field(repr=False)
    signs: SignWitness = field(repr=False)


# -- derivatives of p along the torus -------------------------------------------------


def _angular_derivatives(p: PolySpec, theta: np.ndarray):
    """Value, first and second angle derivatives of ``p(e^{i theta})``.

    ``theta`` has shape ``(B, n)``. Returns ``pv (B,)``, ``dp (B, n)``,
    ``d2p (B, n, n)``.
    """
    z = np.exp(1j * theta)
    A = p.quad.entries
    az = z @ A
    pv = p.a0 + z @ p.linear + np.sum(az * z, axis=-1)
    w = p.linear + 2 * az
    dp = 1j * z * w
    d2p = -2 * A[None, :, :] * z[:, :, None] * z[:, None, :]
    idx = np.arange(p.n)
    d2p[:, idx, idx] -= z * w
    return pv, dp, d2p


def _objective(p: PolySpec, theta: np.ndarray) -> np.ndarray:
    z = np.exp(1j * theta)
    return np.abs(p.a0 + z @ p.linear + np.sum((z @ p.quad.entries) * z, axis=-1)) ** 2


def _grad_hess(p: PolySpec, theta: np.ndarray, free: np.ndarray):
    pv, dp, d2p = _angular_derivatives(p, theta)
    g = 2 * np.real(np.conj(pv)[:, None] * dp)
    h = 2 * np.real(np.conj(dp)[:, :, None] * dp[:, None, :] + np.conj(pv)[:, None, None] * d2p)
    return g[:, free], h[:, free][:, :, free]


def _ascend(p: PolySpec, theta0: np.ndarray, free: np.ndarray, cfg: TorusConfig):
    """Batched Newton / gradient ascent on ``|p|^2`` over the free angles."""
    theta = theta0.copy()
    f = _objective(p, theta)
    lip = np.sum(np.abs(p.linear)) + 2 * np.sum(np.abs(p.quad.entries)) + 1e-300
    gstep = np.full(theta.shape[0], 1.0 / (4 * lip**2))
    active = np.ones(theta.shape[0], dtype=bool)
    iters = 0
    for iters in range(1, cfg.max_iter + 1):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            iters -= 1
            break
        g, h = _grad_hess(p, theta[ia], free)
        gnorm = np.linalg.norm(g, axis=1)
        done = gnorm <= cfg.tol * np.maximum(1.0, f[ia])
        active[ia[done]] = False
        ia, g, h = ia[~done], g[~done], h[~done]
        if ia.size == 0:
            break
        eig = np.linalg.eigvalsh(h)
        newton = eig[:, -1] < -1e-14 * np.maximum(1.0, np.abs(eig[:, 0]))
        d = gstep[ia, None] * g
        if np.any(newton):
            d[newton] = -np.linalg.solve(h[newton], g[newton][:, :, None])[:, :, 0]
        f_prev = f[ia].copy()
        scale = np.ones(ia.size)
        pending = np.ones(ia.size, dtype=bool)
        for _ in range(60):
            trial = theta[ia[pending]].copy()
            trial[:, free] += scale[pending, None] * d[pending]
            ft = _objective(p, trial)
            ok = ft >= f[ia[pending]]
            sel = np.flatnonzero(pending)[ok]
            theta[ia[sel]] = trial[ok]
            f[ia[sel]] = ft[ok]
            pending[sel] = False
            if not pending.any():
                break
            scale[pending] *= 0.5
        # gradient steps adapt their base length; stalled starts are finished
        grad_ok = ~newton & ~pending
        gstep[ia[grad_ok]] *= 2 * scale[grad_ok]
        stalled = pending | (f[ia] - f_prev <= 1e-15 * np.maximum(1.0, f_prev))
        active[ia[stalled]] = False
    return theta, np.sqrt(f), iters


def _lex_best(values: np.ndarray, thetas: np.ndarray, tol: float) -> int:
    top = values.max()
    cand = np.flatnonzero(values >= top - tol * max(1.0, top))
    keys = np.mod(thetas[cand], 2 * np.pi)
    order = np.lexsort(keys.T[::-1])
    return int(cand[order[0]])


def torus_sup(p: PolySpec, cfg: TorusConfig | None = None) -> SupResult:
    """Maximize ``|p|`` over the torus.

    A uniform angle grid is scanned, then the best ``cfg.multistarts`` grid
    points are refined by ascent on ``|p|^2``. For homogeneous ``p`` the
    first angle is pinned to 0, since ``|p(e^{i t} z)| = |p(z)|``.

    Returns
    -------
    SupResult
        ``value`` is ``|p(argmax)|`` and hence a certified lower bound on the
        sup norm. ``upper_bound`` is the grid maximum padded by a Lipschitz
        estimate; it is heuristic only when the grid is coarse.
    """
    cfg = cfg or TorusConfig()
    n = p.n
    res = cfg.resolution_for(n)
    if res < 16:
        raise ValueError(f"grid resolution must be at least 16, got {res}")
    pinned = p.is_homogeneous
    free = np.arange(1 if pinned else 0, n)
    nfree = free.size
    npts = res**nfree
    if npts > cfg.max_grid_points:
        raise BudgetError(
            f"grid of {res}^{nfree} = {npts} points exceeds budget {cfg.max_grid_points} (n={n})"
        )
    grid = 2 * np.pi * np.arange(res) / res
    h = 2 * np.pi / res

    keep = max(1, cfg.multistarts)
    best_vals = np.empty(0)
    best_th = np.empty((0, n))
    for start in range(0, npts, _CHUNK):
        idx = np.arange(start, min(npts, start + _CHUNK))
        th = np.zeros((idx.size, n))
        if nfree:
            th[:, free] = grid[np.stack(np.unravel_index(idx, (res,) * nfree), axis=1)]
        v = _objective(p, th)
        best_vals = np.concatenate([best_vals, v])
        best_th = np.concatenate([best_th, th])
        if best_vals.size > keep:
            sel = np.argpartition(-best_vals, keep - 1)[:keep]
            sel = sel[np.lexsort((sel, -best_vals[sel]))]
            best_vals, best_th = best_vals[sel], best_th[sel]
    grid_max = float(np.sqrt(best_vals.max()))

    starts = best_th
    if cfg.random_starts:
        rng = np.random.default_rng(cfg.seed)
        extra = np.zeros((cfg.random_starts, n))
        extra[:, free] = rng.uniform(0, 2 * np.pi, size=(cfg.random_starts, nfree))
        starts = np.concatenate([starts, extra])

    if nfree:
        thetas, vals, iters = _ascend(p, starts, free, cfg)
    else:
        thetas, vals, iters = starts, np.sqrt(_objective(p, starts)), 0
    i = _lex_best(vals, thetas, 1e-12)
    point = TorusPoint(thetas[i])
    value = float(abs(p(point.z)))
    cert = collinearity_certificate(p, point)

    # Lipschitz bound of |p| along each angle: |a_m| + 2 sum_k |a_mk|
    lip = np.abs(p.linear) + 2 * np.sum(np.abs(p.quad.entries), axis=1)
    upper = max(value, grid_max + float(np.sum(lip[free])) * h / 2)
    log.debug("torus_sup n=%d res=%d value=%.12g residual=%.3g", n, res, value, cert.residual)
    return SupResult(
        value=value,
        argmax=point,
        certificate_residual=cert.residual,
        grid_resolution=res,
        refinements=int(iters),
        upper_bound=upper,
        degenerate=cert.degenerate,
    )


def collinearity_certificate(p: PolySpec, t: TorusPoint | Sequence[float]) -> CollinearityCertificate:
    """Rank-one defect of the angle derivatives of ``p`` at ``t``.

    The columns ``i p`` and ``dp/d theta_k`` (``k = 1..n``), read as vectors in
    ``R^2``, all lie on one line through the origin exactly when ``t`` is a
    critical point of ``|p|``. The residual is the smaller singular value of
    that ``2 x (n+1)`` matrix divided by its largest column norm.
    """
    if not isinstance(t, TorusPoint):
        t = TorusPoint(t)
    if len(t) != p.n:
        raise ValueError(f"point has {len(t)} angles, polynomial has {p.n} variables")
    pv, dp, _ = _angular_derivatives(p, t.angles[None, :])
    cols = np.concatenate([[1j * pv[0]], dp[0]])
    m = np.stack([cols.real, cols.imag])
    norms = np.linalg.norm(m, axis=0)
    scale = norms.max()
    coef = 1.0 + np.sum(np.abs(p.quad.entries)) + np.sum(np.abs(p.linear))
    degenerate = bool(norms[1:].max() <= 1e-15 * coef)
    if scale == 0.0:
        return CollinearityCertificate(0.0, True)
    s = np.linalg.svd(m / scale, compute_uv=False)
    return CollinearityCertificate(float(s[-1]), degenerate)


def _real_symmetric(a) -> np.ndarray:
    m = as_matrix(a)
    if not m.is_real:
        raise ValueError("expected a real symmetric matrix")
    return m.real()


def _sign_rows(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 2, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    s = np.ones((idx.size, n))
    s[:, 1:] = 1 - 2 * bits
    return s


def sign_sup(a) -> SignWitness:
    """Exhaustive maximum of ``|s^t A s|`` over ``s in {+1,-1}^n``.

    ``s_1 = +1`` is fixed because ``s`` and ``-s`` give the same value; the
    remaining signs are enumerated with the last coordinate varying fastest
    and ``+1`` before ``-1``. The first maximizer in that order is returned.
    """
    A = _real_symmetric(a)
    n = A.shape[0]
    if n > SIGN_BUDGET:
        raise BudgetError(f"sign enumeration over 2^{n - 1} vectors exceeds budget (n <= {SIGN_BUDGET})")
    total = 1 << (n - 1)
    best, best_s, best_v = -1.0, None, 0.0
    for start in range(0, total, _CHUNK):
        s = _sign_rows(n, start, min(total, start + _CHUNK))
        v = np.einsum("bi,bi->b", s @ A, s)
        i = int(np.argmax(np.abs(v)))
        if abs(v[i]) > best:
            best, best_s, best_v = abs(v[i]), s[i], float(v[i])
    return SignWitness(best_s.astype(int), best_v)


def psd_torus_equals_sign(a, cfg: TorusConfig | None = None, gap_tol: float = 1e-3) -> PsdGapReport:
    """Compare the torus sup of ``p_A`` with the sign-vector sup for PSD ``A``.

    For a positive semidefinite coefficient matrix the two agree, so the gap
    measures the accuracy of the torus search.
    """
    if not is_psd(a):
        raise ValueError("matrix is not positive semidefinite; the torus/sign identity does not apply")
    m = as_matrix(a)
    sup = torus_sup(poly_from_matrix(m), cfg)
    sw = sign_sup(SymCoeffMatrix(m.entries.real.astype(complex)))
    gap = abs(sup.value - sw.modulus)
    return PsdGapReport(sup.value, sw.modulus, gap, gap <= gap_tol, sup, sw)


# -- the B_alpha family ---------------------------------------------------------------


def balpha_matrix(alpha: float) -> SymCoeffMatrix:
    """``[[1, 1, 1], [1, 1, alpha], [1, alpha, 1]]``."""
    a = float(alpha)
    return SymCoeffMatrix(np.array([[1, 1, 1], [1, 1, a], [1, a, 1]], dtype=complex))


def _check_negative(alpha: float) -> float:
    a = float(alpha)
    if not a < 0:
        raise ValueError(f"closed form only established for alpha < 0, got {alpha}; use torus_sup")
    return a


def balpha_sup_norm(alpha: float) -> float:
    """Sup norm of ``p_{B_alpha}``: ``7 + 2a`` for ``a > -1``, ``3 - 2a`` for ``a <= -1``."""
    a = _check_negative(alpha)
    return 7 + 2 * a if a > -1 else 3 - 2 * a


def balpha_gram_max(alpha: float) -> float:
    """Largest ``|sum a_jk <X_j, X_k>|`` over unit vectors for ``B_alpha``.

    On ``[-1/2, 0)`` the maximum sits at ``X_1 = X_2 = X_3`` and equals the
    entry sum ``7 + 2a``; below ``-1/2`` the interior critical point with
    ``cos t = -1/(2a)`` wins and gives ``3 - 2a - 1/a``.
    """
    a = _check_negative(alpha)
    return 7 + 2 * a if a > -0.5 else 3 - 2 * a - 1 / a


def balpha_gram_max_antipodal(alpha: float) -> float:
    """Piecewise form ``3 - 2a`` for ``a > -1/2``, ``3 - 2a - 1/a`` otherwise.

    ``3 - 2a`` is the value at ``X_3 = -X_2`` with ``X_1`` orthogonal to both.
    Kept for comparison only: it understates the maximum on ``(-1/2, 0)``,
    where ``X_1 = X_2 = X_3`` already gives ``7 + 2a``.
    """
    a = _check_negative(alpha)
    return 3 - 2 * a if a > -0.5 else 3 - 2 * a - 1 / a


def balpha_ratio(alpha: float, antipodal: bool = False) -> float:
    gm = balpha_gram_max_antipodal(alpha) if antipodal else balpha_gram_max(alpha)
    return gm / balpha_sup_norm(alpha)


def balpha_ratio_scan(alphas: Sequence[float], antipodal: bool = False):
    """Closed-form rows ``(alpha, sup_norm, gram_max, ratio)`` and the arg-max alpha."""
    rows = []
    for a in alphas:
        sup = balpha_sup_norm(a)
        gm = balpha_gram_max_antipodal(a) if antipodal else balpha_gram_max(a)
        rows.append((float(a), sup, gm, gm / sup))
    if not rows:
        raise ValueError("empty alpha grid")
    best = max(rows, key=lambda r: r[3])
    return rows, best[0]
