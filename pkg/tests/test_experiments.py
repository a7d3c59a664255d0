import csv
import io
import itertools
import json
import math

import numpy as np
import pytest

from vnbounds import __version__
from vnbounds.core import BudgetError, poly_from_matrix, symmetrize
from vnbounds.experiments import (
    REFERENCE,
    SIGN_TABLE,
    ExperimentConfig,
    Report,
    all_sign_matrices,
    balpha_grid,
    canonical_sign_matrix,
    emit_report,
    load_report,
    permutation_classes,
    run_balpha_scan,
    run_fj_sweep,
    run_random_search,
    run_sign_table,
    verify_report,
)
from vnbounds.gram import gram_max
from vnbounds.torus import torus_sup


@pytest.fixture(scope="module")
def sign_table():
    return run_sign_table()


def test_canonicalizer_covers_all_sign_matrices():
    mats = list(all_sign_matrices())
    assert len(mats) == 64
    hits = [canonical_sign_matrix(m)[0] for m in mats]
    assert set(hits) == set(range(6))
    for i, (rep, _, _) in enumerate(SIGN_TABLE):
        j, m = canonical_sign_matrix(rep)
        assert j == i and np.array_equal(m, rep)


def test_canonicalizer_rejects_bad_input():
    with pytest.raises(ValueError):
        canonical_sign_matrix(np.eye(3))
    with pytest.raises(ValueError):
        canonical_sign_matrix([[1, 1, 1], [-1, 1, 1], [1, 1, 1]])


def test_orbit_values_invariant(sign_table):
    # every sign matrix has the sup norm and Gram maximum of its representative
    ops = {i: (r["sup_norm"], r["operator_norm"]) for i, r in enumerate(sign_table.rows)}
    for m in all_sign_matrices():
        i, _ = canonical_sign_matrix(m)
        q = symmetrize(m.astype(float))
        assert torus_sup(poly_from_matrix(q)).value == pytest.approx(ops[i][0], abs=1e-6)
        assert gram_max(q).modulus == pytest.approx(ops[i][1], abs=1e-6)


def test_permutation_invariance():
    for rep, _, _ in SIGN_TABLE:
        a = np.array(rep, dtype=float)
        base = torus_sup(poly_from_matrix(a)).value
        gbase = gram_max(a).modulus
        for perm in itertools.permutations(range(3)):
            s = np.eye(3)[list(perm)]
            b = s @ a @ s.T
            assert torus_sup(poly_from_matrix(b)).value == pytest.approx(base, abs=1e-9)
            assert gram_max(b).modulus == pytest.approx(gbase, abs=1e-9)


def test_permutations_merge_representatives(sign_table):
    # moving index 1 joins rows 1 and 4, and rows 3 and 5
    assert permutation_classes() == [0, 1, 2, 0, 2, 5]
    by_class = {}
    for r in sign_table.rows:
        by_class.setdefault(r["class"], []).append((r["sup_norm"], r["operator_norm"]))
    for vals in by_class.values():
        assert np.allclose(vals, vals[0], atol=1e-9)


@pytest.mark.parametrize("row,sup,op", [(2, 5.0, 6.0), (3, 5 * math.sqrt(2), 7.0), (6, 9.0, 9.0)])
def test_sign_table_rows(sign_table, row, sup, op):
    r = sign_table.rows[row - 1]
    assert r["sup_norm"] == pytest.approx(sup, abs=1e-6)
    assert r["operator_norm"] == pytest.approx(op, abs=1e-6)
    assert r["beta_rank1"] == pytest.approx(op, abs=1e-6)


def test_sign_table_columns_agree_with_beta(sign_table):
    for r in sign_table.rows:
        assert r["beta_rank1"] == pytest.approx(r["operator_norm"], abs=1e-6)
    assert sum(r["orbit_size"] for r in sign_table.rows) == 64


def test_sign_table_verifies(sign_table):
    assert all(c.ok for c in verify_report(sign_table))


def test_sign_table_csv(sign_table):
    text = emit_report(sign_table, "csv")
    lines = text.splitlines()
    assert len(lines) == 7
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [int(r["row"]) for r in rows] == [1, 2, 3, 4, 5, 6]
    assert rows[2]["sup_norm"] == format(5 * math.sqrt(2), ".12g")


def test_json_report_roundtrip(sign_table, tmp_path):
    path = tmp_path / "t.json"
    emit_report(sign_table, "json", path)
    d = json.loads(path.read_text())
    assert d["version"] == __version__
    assert d["config"]["seed"] == 0
    back = load_report(path)
    assert back.to_dict() == sign_table.to_dict()


def test_annotation_only_adds_reference():
    a = run_fj_sweep(3, ExperimentConfig(annotate=True)).to_dict()
    b = run_fj_sweep(3, ExperimentConfig(annotate=False)).to_dict()
    assert a.pop("reference")["kg_plus_real"] == REFERENCE.kg_plus_real
    assert "reference" not in b
    assert a == b


def test_reference_constants_frozen():
    with pytest.raises(AttributeError):
        REFERENCE.kg_plus_real = 2.0


def test_deterministic_files(tmp_path):
    for i in (1, 2):
        emit_report(run_fj_sweep(4), "json", tmp_path / f"{i}.json")
        emit_report(run_random_search(3, 3, 50, seed=5), "json", tmp_path / f"s{i}.json")
    assert (tmp_path / "1.json").read_bytes() == (tmp_path / "2.json").read_bytes()
    assert (tmp_path / "s1.json").read_bytes() == (tmp_path / "s2.json").read_bytes()


def test_fj_sweep():
    r = run_fj_sweep(4)
    got = {row["k"]: row["ratio"] for row in r.rows}
    assert got[2] == pytest.approx(1.0, abs=1e-3)
    assert got[3] == pytest.approx(1.2, abs=1e-3)
    assert got[4] == pytest.approx(9 / 7, abs=1e-3)
    assert all(row["gap"] <= 1e-3 for row in r.rows)
    assert r.summary["nondecreasing"]
    assert all(c.ok for c in verify_report(r))


def test_fj_sweep_budget():
    with pytest.raises(BudgetError):
        run_fj_sweep(6)
    with pytest.raises(ValueError):
        run_fj_sweep(1)


def test_balpha_grid_contains_minus_one():
    g = balpha_grid(-3, -0.05, 60)
    assert -1.0 in g.tolist()
    g2 = balpha_grid(-3, -0.05, 50)
    assert -1.0 in g2.tolist() and len(g2) in (50, 51)
    with pytest.raises(ValueError):
        balpha_grid(-1, 0.5, 10)
    with pytest.raises(ValueError):
        balpha_grid(-0.1, -1, 10)


def test_balpha_scan():
    r = run_balpha_scan(-3, -0.05, 60)
    assert r.summary["argmax_alpha"] == -1.0
    assert r.summary["max_ratio"] == pytest.approx(1.2, abs=1e-12)
    assert r.summary["max_sup_deviation"] < 1e-6
    assert r.summary["max_gram_deviation"] < 1e-6
    assert all(c.ok for c in verify_report(r))


def test_balpha_scan_antipodal_examples():
    r = run_balpha_scan(-2, -0.25, 8, validate=False)
    rows = {round(row["alpha"], 12): row for row in r.rows}
    assert rows[-2.0]["ratio"] == pytest.approx(7.5 / 7)
    assert rows[-0.25]["antipodal_ratio"] == pytest.approx(3.5 / 6.5)


def test_search_rediscovers_violation():
    r = run_random_search(3, 3, 10_000, seed=1, mode="sign")
    assert r.ratio >= 1.199
    assert r.seed == 1 and "trial" in r.witness
    assert all(c.ok for c in verify_report(r))


def test_search_mixed_mode_n3():
    r = run_random_search(3, 6, 200, seed=3)
    assert r.ratio >= 1.2 - 1e-3


@pytest.mark.parametrize("mode", ["sign", "uniform", "mixed"])
def test_search_one_variable(mode):
    assert run_random_search(1, 4, 100, seed=2, mode=mode).ratio <= 1 + 1e-6


def test_search_two_variables():
    assert run_random_search(2, 8, 300, seed=4, mode="uniform").ratio <= 1 + 1e-3


def test_search_refine_does_not_lower():
    base = run_random_search(3, 3, 20, seed=9, mode="uniform")
    ref = run_random_search(3, 3, 20, seed=9, mode="uniform", refine=10)
    assert ref.ratio >= base.ratio - 1e-12


def test_search_errors():
    with pytest.raises(ValueError):
        run_random_search(3, 3, 0)
    with pytest.raises(ValueError):
        run_random_search(7, 3, 10)
    with pytest.raises(ValueError):
        run_random_search(3, 3, 10, mode="gaussian")


def test_verify_detects_tampering(tmp_path, sign_table):
    d = sign_table.to_dict()
    d["rows"][1]["operator_norm"] += 1e-6
    bad = [c for c in verify_report(Report.from_dict(d)) if not c.ok]
    assert [c.name for c in bad] == ["row2.operator_norm", "row2.ratio"]

    r = run_random_search(3, 3, 40, seed=0, mode="sign")
    p = tmp_path / "r.json"
    emit_report(r, "json", p)
    d = json.loads(p.read_text())
    d["ratio"] *= 1 + 1e-8
    p.write_text(json.dumps(d))
    assert not all(c.ok for c in verify_report(p))


def test_ratio_report_csv():
    r = run_random_search(3, 3, 20, seed=0, mode="sign")
    lines = emit_report(r, "csv").splitlines()
    assert lines[0] == "n,sup_value,sup_method,operator_value,ratio,seed"
    assert len(lines) == 2


def test_emit_unknown_format(sign_table):
    with pytest.raises(ValueError):
        emit_report(sign_table, "xml")


def test_emit_unwritable_path(sign_table, tmp_path):
    with pytest.raises(OSError):
        emit_report(sign_table, "json", tmp_path / "missing" / "x.json")
