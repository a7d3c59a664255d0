"""Experiment runners behind the command line: tables, sweeps, search, reports.

Every runner returns a :class:`Report` whose rows carry the witnesses
(torus arg-max angles, Gram vectors, sign vectors) that :func:`verify_report`
uses to recompute each value independently.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import BudgetError, PolySpec, SymCoeffMatrix, TorusPoint, evaluate, poly_from_matrix, symmetrize
from .gram import GramConfig, beta_rank1, fj_matrix, fj_ratio, gram_max, gram_value
from .torus import (
    TorusConfig,
    balpha_gram_max,
    balpha_gram_max_antipodal,
    balpha_matrix,
    balpha_sup_norm,
    torus_sup,
)
from .varopoulos import CommutingTuple, RatioReport, eval_poly_on_tuple, operator_norm, quad_norm_closed, realify

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ReferenceConstants",
    "REFERENCE",
    "Report",
    "SIGN_TABLE",
    "canonical_sign_matrix",
    "run_sign_table",
    "run_fj_sweep",
    "run_balpha_scan",
    "run_random_search",
    "emit_report",
    "load_report",
    "verify_report",
]

VERIFY_TOL = 1e-9
FJ_KMAX = 5


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    resolution: int | None = None
    multistarts: int = 32
    gram_multistarts: int = 64
    trials: int = 1000
    format: str = "json"
    output: str | None = None
    annotate: bool = True

    def torus(self) -> TorusConfig:
        return TorusConfig(resolution=self.resolution, multistarts=self.multistarts, seed=self.seed)

    def gram(self) -> GramConfig:
        return GramConfig(multistarts=self.gram_multistarts, seed=self.seed)

    def echo(self) -> dict:
        d = asdict(self)
        for k in ("output", "annotate"):
            d.pop(k)
        return d


@dataclass(frozen=True)
class ReferenceConstants:
    """Known constants, used only to annotate reports."""

    kg_complex_upper: float = 1.4049
    kg_complex_lower: float = 1.338
    kg_real_lower: float = 1.66
    kg_plus_real: float = math.pi / 2
    kg_plus_complex: float = 4 / math.pi
    varopoulos_upper_factor: float = 3 * math.sqrt(3) / 4


REFERENCE = ReferenceConstants()


@dataclass
class Report:
    """Tabular result: ``rows`` hold the delimited columns, ``witnesses`` the per-row evidence."""

    kind: str
    columns: list
    rows: list
    witnesses: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    reference: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "tool": "vnbounds",
            "version": __version__,
            "kind": self.kind,
            "config": self.config,
            "columns": self.columns,
            "rows": self.rows,
            "witnesses": self.witnesses,
            "summary": self.summary,
        }
        if self.reference is not None:
            d["reference"] = self.reference
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(
            kind=d["kind"],
            columns=list(d["columns"]),
            rows=list(d["rows"]),
            witnesses=list(d.get("witnesses", [])),
            summary=dict(d.get("summary", {})),
            config=dict(d.get("config", {})),
            reference=d.get("reference"),
        )


def _finish(report: Report, cfg: ExperimentConfig) -> Report:
    report.config = cfg.echo() | report.config
    if cfg.annotate:
        report.reference = asdict(REFERENCE)
    return report


def _real_rows(a) -> list:
    m = a.entries.real if isinstance(a, SymCoeffMatrix) else np.asarray(a, dtype=float)
    return [[float(x) for x in r] for r in m]


# -- sign matrices of order 3 ---------------------------------------------------------

# (matrix, tabulated sup norm, tabulated ||p(T)||): the target values for each representative
SIGN_TABLE = [
    ([[1, 1, 1], [1, -1, 1], [1, 1, -1]], 5.0, 5.0),
    ([[1, 1, 1], [1, 1, -1], [1, -1, 1]], 5.0, 6.0),
    ([[1, 1, 1], [1, 1, 1], [1, 1, -1]], 5 * math.sqrt(2), 7.0),
    ([[1, 1, 1], [1, 1, -1], [1, -1, -1]], 7.0, 5.0),
    ([[1, 1, 1], [1, -1, -1], [1, -1, -1]], math.sqrt(41), 4.0),
    ([[1, 1, 1], [1, 1, 1], [1, 1, 1]], 9.0, 9.0),
]


def canonical_sign_matrix(a) -> tuple[int, np.ndarray]:
    """Map a symmetric 3x3 sign matrix to one of the six table representatives.

    Uses ``A -> -A`` (to make ``a_11 = 1``), ``A -> D A D`` with
    ``D = diag(a_11, a_12, a_13)`` (first row all ones) and the swap of
    indices 2 and 3. All three leave both ``||p_A||`` and the Gram maximum
    unchanged. Returns ``(row index, representative)``.
    """
    m = np.asarray(a, dtype=int)
    if m.shape != (3, 3) or not np.array_equal(m, m.T) or not np.all(np.abs(m) == 1):
        raise ValueError("expected a symmetric 3x3 matrix with entries +-1")
    if m[0, 0] == -1:
        m = -m
    d = m[0]
    m = m * np.outer(d, d)
    if (m[1, 1], m[2, 2]) == (-1, 1):
        m = m[[0, 2, 1]][:, [0, 2, 1]]
    for i, (rep, _, _) in enumerate(SIGN_TABLE):
        if np.array_equal(m, rep):
            return i, m
    raise AssertionError("unreachable: every normalized sign matrix is a representative")


def permutation_classes() -> list:
    """Smallest row index reachable from each representative under ``P A P^t``.

    The first-row normalization only uses permutations fixing index 1; the
    full symmetric group can merge representatives further.
    """
    label = list(range(len(SIGN_TABLE)))
    for i, (rep, _, _) in enumerate(SIGN_TABLE):
        a = np.array(rep)
        for perm in itertools.permutations(range(3)):
            j = canonical_sign_matrix(a[list(perm)][:, list(perm)])[0]
            label[i] = min(label[i], j)
    # one relabelling pass suffices for three indices, but iterate to be safe
    changed = True
    while changed:
        changed = False
        for i in range(len(label)):
            if label[label[i]] != label[i]:
                label[i] = label[label[i]]
                changed = True
    return label


def all_sign_matrices():
    for d in itertools.product((1, -1), repeat=3):
        for o in itertools.product((1, -1), repeat=3):
            yield np.array([[d[0], o[0], o[1]], [o[0], d[1], o[2]], [o[1], o[2], d[2]]])


def run_sign_table(cfg: ExperimentConfig | None = None) -> Report:
    """Sup norm and Varopoulos-tuple norm for the six sign-matrix representatives."""
    cfg = cfg or ExperimentConfig()
    classes = permutation_classes()
    orbit = [0] * len(SIGN_TABLE)
    for m in all_sign_matrices():
        orbit[canonical_sign_matrix(m)[0]] += 1
    rows, wits = [], []
    for i, (mat, tab_sup, tab_op) in enumerate(SIGN_TABLE):
        q = symmetrize(np.array(mat, dtype=float))
        sup = torus_sup(poly_from_matrix(q), cfg.torus())
        gw = gram_max(q, cfg=cfg.gram())
        beta = beta_rank1(q)
        rows.append(
            {
                "row": i + 1,
                "matrix": json.dumps(mat, separators=(",", ":")),
                "sup_norm": sup.value,
                "operator_norm": gw.modulus,
                "ratio": gw.modulus / sup.value,
                "tabulated_sup_norm": tab_sup,
                "tabulated_operator_norm": tab_op,
                "sup_deviation": abs(sup.value - tab_sup),
                "operator_deviation": abs(gw.modulus - tab_op),
                "beta_rank1": beta,
                "orbit_size": orbit[i],
                "class": classes[i] + 1,
            }
        )
        wits.append({"matrix": mat, "sup": sup.to_dict(), "gram": gw.to_dict()})
    cols = list(rows[0])
    best = max(rows, key=lambda r: r["ratio"])
    return _finish(
        Report("sign-table", cols, rows, wits, {"best_row": best["row"], "best_ratio": best["ratio"]}),
        cfg,
    )


def run_fj_sweep(kmax: int, cfg: ExperimentConfig | None = None) -> Report:
    """Gram-to-sign ratios of the ``A_k`` matrices for ``k = 2..kmax``."""
    cfg = cfg or ExperimentConfig()
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    if kmax > FJ_KMAX:
        raise BudgetError(f"kmax limited to {FJ_KMAX}")
    rows, wits = [], []
    for k in range(2, kmax + 1):
        r = fj_ratio(k, cfg.gram())
        rows.append(
            {
                "k": k,
                "l": r.l,
                "gram_max": r.gram.modulus,
                "sign_max": r.signs.modulus,
                "ratio": r.ratio,
                "closed_form": r.closed_form,
                "gap": r.gap,
            }
        )
        wits.append({"matrix": _real_rows(fj_matrix(k).matrix), "gram": r.gram.to_dict(), "signs": r.signs.to_dict()})
    ratios = [row["ratio"] for row in rows]
    summary = {
        "max_gap": max(row["gap"] for row in rows),
        "nondecreasing": all(b >= a - 1e-9 for a, b in zip(ratios, ratios[1:])),
    }
    return _finish(Report("fj", list(rows[0]), rows, wits, summary, {"kmax": kmax}), cfg)


def balpha_grid(amin: float, amax: float, steps: int) -> np.ndarray:
    """``steps`` equally spaced points, with ``-1`` added when it lies in range."""
    if not amax < 0:
        raise ValueError("alpha range must lie below zero")
    if amin > amax or steps < 2:
        raise ValueError("need amin <= amax and at least two steps")
    g = np.linspace(amin, amax, steps)
    if amin <= -1 <= amax:
        near = np.abs(g + 1) < 1e-9
        if near.any():
            g[near] = -1.0
        else:
            g = np.sort(np.append(g, -1.0))
    return g


def run_balpha_scan(
    amin: float, amax: float, steps: int, cfg: ExperimentConfig | None = None, validate: bool = True
) -> Report:
    """Closed-form ratios over ``B_alpha``, each row checked by the numeric optimizers."""
    cfg = cfg or ExperimentConfig()
    rows, wits = [], []
    for a in balpha_grid(amin, amax, steps):
        a = float(a)
        sup_c, gm_c, gm_anti = balpha_sup_norm(a), balpha_gram_max(a), balpha_gram_max_antipodal(a)
        row = {
            "alpha": a,
            "sup_norm": sup_c,
            "gram_max": gm_c,
            "ratio": gm_c / sup_c,
            "antipodal_gram_max": gm_anti,
            "antipodal_ratio": gm_anti / sup_c,
        }
        wit: dict = {"matrix": _real_rows(balpha_matrix(a))}
        if validate:
            q = balpha_matrix(a)
            sup = torus_sup(poly_from_matrix(q), cfg.torus())
            gw = gram_max(q, cfg=cfg.gram())
            row |= {
                "sup_numeric": sup.value,
                "gram_numeric": gw.modulus,
                "sup_deviation": abs(sup.value - sup_c),
                "gram_deviation": abs(gw.modulus - gm_c),
                "antipodal_gram_deviation": abs(gw.modulus - gm_anti),
            }
            wit |= {"sup": sup.to_dict(), "gram": gw.to_dict()}
        rows.append(row)
        wits.append(wit)
    best = max(rows, key=lambda r: r["ratio"])
    best_anti = max(rows, key=lambda r: r["antipodal_ratio"])
    summary = {
        "argmax_alpha": best["alpha"],
        "max_ratio": best["ratio"],
        "antipodal_argmax_alpha": best_anti["alpha"],
        "antipodal_max_ratio": best_anti["antipodal_ratio"],
    }
    if validate:
        summary["max_sup_deviation"] = max(r["sup_deviation"] for r in rows)
        summary["max_gram_deviation"] = max(r["gram_deviation"] for r in rows)
        summary["max_antipodal_gram_deviation"] = max(r["antipodal_gram_deviation"] for r in rows)
    return _finish(
        Report("balpha", list(rows[0]), rows, wits, summary, {"min": amin, "max": amax, "steps": steps}), cfg
    )


# -- random search --------------------------------------------------------------------


def _random_matrix(rng: np.random.Generator, n: int, mode: str) -> np.ndarray:
    if mode == "sign":
        a = rng.choice([-1.0, 1.0], size=(n, n))
    elif mode == "uniform":
        a = rng.uniform(-1.0, 1.0, size=(n, n))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return np.triu(a) + np.triu(a, 1).T


def _ratio_parts(a: np.ndarray, m: int, tcfg: TorusConfig, gcfg: GramConfig):
    q = SymCoeffMatrix(a.astype(complex))
    sup = torus_sup(poly_from_matrix(q), tcfg)
    gw = gram_max(q, rank=min(a.shape[0], m), cfg=gcfg)
    return sup, gw


def run_random_search(
    n: int,
    m: int,
    trials: int,
    seed: int = 0,
    mode: str = "mixed",
    refine: int = 0,
    cfg: ExperimentConfig | None = None,
) -> RatioReport:
    """Random symmetric matrices scored by Gram maximum over torus sup.

    Trial ``t`` draws its matrix from ``default_rng([seed, t])``; in
    ``"mixed"`` mode even trials use random signs, odd trials uniform
    entries on ``[-1, 1]``. The Gram vectors live in ``R^min(n, m)``.
    ``refine > 0`` then hill-climbs on the best matrix with seeded
    perturbations. Returns the best witness found.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 1 <= n <= 6 or not 1 <= m <= 8:
        raise ValueError("search supports n <= 6 and m <= 8")
    cfg = cfg or ExperimentConfig(seed=seed, gram_multistarts=8, multistarts=8)
    tcfg = cfg.torus()
    gcfg = GramConfig(multistarts=cfg.gram_multistarts, seed=seed)
    cache: dict = {}
    best = None
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        tmode = ("sign", "uniform")[t % 2] if mode == "mixed" else mode
        a = _random_matrix(rng, n, tmode)
        key = a.tobytes()
        if key not in cache:
            sup, gw = _ratio_parts(a, m, tcfg, gcfg)
            cache[key] = gw.modulus / sup.value if sup.value > 0 else 0.0
        r = cache[key]
        if best is None or r > best[0]:
            best = (r, a, t)
    ratio, a, trial = best
    log.info("search n=%d: best ratio %.12g at trial %d (%d distinct matrices)", n, ratio, trial, len(cache))

    steps = 0
    if refine:
        rng = np.random.default_rng([seed, trials, 1])
        scale = 0.25
        for _ in range(refine):
            cand = a + scale * _random_matrix(rng, n, "uniform")
            sup, gw = _ratio_parts(cand, m, tcfg, gcfg)
            r = gw.modulus / sup.value if sup.value > 0 else 0.0
            if r > ratio:
                ratio, a, steps = r, cand, steps + 1
            else:
                scale = max(scale * 0.9, 1e-3)

    q = SymCoeffMatrix(a.astype(complex))
    p = poly_from_matrix(q)
    sup, gw = _ratio_parts(a, m, tcfg, gcfg)
    vecs = np.zeros((n, m))
    vecs[:, : gw.vectors.shape[1]] = gw.vectors
    tup = CommutingTuple.symmetric(realify(vecs.astype(complex)))
    closed = quad_norm_closed(q, tup)
    oracle = operator_norm(eval_poly_on_tuple(p, tup.operators()))
    return RatioReport(
        polynomial=p,
        sup=sup,
        sup_value=sup.value,
        sup_method="torus",
        operator_value=closed,
        ratio=closed / sup.value,
        tuple=tup,
        certificates={
            "oracle_norm": oracle,
            "oracle_gap": abs(oracle - closed),
            "commutation_defect": tup.commutation_defect(),
            "contractive": tup.contractive,
            "certificate_residual": sup.certificate_residual,
            "gram_value": gw.value,
        },
        witness={
            "gram": gw.to_dict(),
            "trial": trial,
            "mode": mode,
            "refine_steps": steps,
            "n": n,
            "m": m,
            "trials": trials,
        },
        seed=seed,
    )


# -- output ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def report_to_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(report, RatioReport):
        cols = ["n", "sup_value", "sup_method", "operator_value", "ratio", "seed"]
        w.writerow(cols)
        w.writerow([_fmt(v) for v in (report.polynomial.n, report.sup_value, report.sup_method,
                                       report.operator_value, report.ratio, report.seed)])
        return buf.getvalue()
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_fmt(row[c]) for c in report.columns])
    return buf.getvalue()


def report_to_json(report, cfg: ExperimentConfig | None = None) -> str:
    if isinstance(report, RatioReport):
        d = {"tool": "vnbounds", "version": __version__} | report.to_dict()
        if cfg is not None:
            d["config"] = cfg.echo()
            if cfg.annotate:
                d["reference"] = asdict(REFERENCE)
    else:
        d = report.to_dict()
    return json.dumps(d, indent=2) + "\n"


def emit_report(report, format: str = "json", path: str | Path | None = None, cfg: ExperimentConfig | None = None) -> str:
    """Serialize ``report`` as CSV or JSON and write it to ``path`` when given."""
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = report_to_json(report, cfg)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_report(path: str | Path):
    d = json.loads(Path(path).read_text())
    if d.get("kind") == "ratio":
        return RatioReport.from_dict(d)
    return Report.from_dict(d)


# -- verification ---------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    reported: float
    recomputed: float
    ok: bool


def _check(name, reported, recomputed, tol=VERIFY_TOL) -> Check:
    ok = abs(reported - recomputed) <= tol * max(1.0, abs(reported))
    return Check(name, float(reported), float(recomputed), bool(ok))


def _sup_check(name, p: PolySpec, sup: dict, reported: float) -> Check:
    val = abs(evaluate(p, TorusPoint(sup["argmax"]).z))
    return _check(name, reported, val)


def _gram_checks(name, a, gram: dict, reported: float) -> list:
    x = np.asarray(gram["vectors"], dtype=float)
    unit = float(np.max(np.abs(np.linalg.norm(x, axis=1) - 1)))
    return [
        Check(f"{name}.unit_vectors", 0.0, unit, unit <= 1e-12),
        _check(name, reported, abs(gram_value(np.asarray(a, dtype=float), x))),
    ]


def verify_report(report) -> list:
    """Recompute every reported value from its embedded witness.

    Returns a list of :class:`Check`; all of them should have ``ok`` set.
    """
    if isinstance(report, (str, Path)):
        report = load_report(report)
    checks: list = []
    if isinstance(report, RatioReport):
        p = report.polynomial
        if report.sup is not None:
            checks.append(_check("sup_value", report.sup_value, abs(evaluate(p, report.sup.argmax.z))))
        t = report.tuple
        dense = operator_norm(eval_poly_on_tuple(p, t.operators()))
        closed = quad_norm_closed(p.quad, t) if p.is_homogeneous else dense
        checks.append(_check("operator_value.dense", report.operator_value, dense))
        checks.append(_check("operator_value.closed", report.operator_value, closed))
        checks.append(Check("contractive", 1.0, float(t.contractive), t.contractive))
        checks.append(_check("ratio", report.ratio, report.operator_value / report.sup_value))
        if "gram" in report.witness:
            a = p.quad.entries.real
            checks += _gram_checks("gram", a, report.witness["gram"], report.operator_value)
        if "signs" in report.witness and report.sup_method == "sign":
            s = np.asarray(report.witness["signs"]["signs"], dtype=float)
            checks.append(_check("sign_value", report.sup_value, abs(s @ p.quad.entries.real @ s)))
        return checks

    for i, (row, wit) in enumerate(zip(report.rows, report.witnesses)):
        a = np.asarray(wit["matrix"], dtype=float)
        p = poly_from_matrix(symmetrize(a))
        tag = f"row{i + 1}"
        if report.kind == "sign-table":
            checks.append(_sup_check(f"{tag}.sup_norm", p, wit["sup"], row["sup_norm"]))
            checks += _gram_checks(f"{tag}.operator_norm", a, wit["gram"], row["operator_norm"])
            checks.append(_check(f"{tag}.ratio", row["ratio"], row["operator_norm"] / row["sup_norm"]))
        elif report.kind == "fj":
            checks += _gram_checks(f"{tag}.gram_max", a, wit["gram"], row["gram_max"])
            s = np.asarray(wit["signs"]["signs"], dtype=float)
            checks.append(_check(f"{tag}.sign_max", row["sign_max"], abs(s @ a @ s)))
            checks.append(_check(f"{tag}.ratio", row["ratio"], row["gram_max"] / row["sign_max"]))
        elif report.kind == "balpha":
            alpha = row["alpha"]
            checks.append(_check(f"{tag}.sup_closed", row["sup_norm"], balpha_sup_norm(alpha)))
            checks.append(_check(f"{tag}.gram_closed", row["gram_max"], balpha_gram_max(alpha)))
            if "sup" in wit:
                checks.append(_sup_check(f"{tag}.sup_numeric", p, wit["sup"], row["sup_numeric"]))
                checks += _gram_checks(f"{tag}.gram_numeric", a, wit["gram"], row["gram_numeric"])
        else:
            raise ValueError(f"cannot verify report kind {report.kind!r}")
    return checks


def norm_report(p: PolySpec, cfg: ExperimentConfig | None = None) -> Report:
    """Sup norm of a single polynomial, as a one-row report."""
    from .serialize import poly_to_json

    cfg = cfg or ExperimentConfig()
    sup = torus_sup(p, cfg.torus())
    row = {
        "n": p.n,
        "sup_norm": sup.value,
        "upper_bound": sup.upper_bound,
        "certificate_residual": sup.certificate_residual,
        "grid_resolution": sup.grid_resolution,
        "refinements": sup.refinements,
    }
    return _finish(Report("norm", list(row), [row], [{"polynomial": poly_to_json(p), "sup": sup.to_dict()}]), cfg)
