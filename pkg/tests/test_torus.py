import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_psd
from vnbounds.core import VK_MATRIX, BudgetError, PolySpec, evaluate, poly_from_matrix, vk_polynomial
from vnbounds.gram import fj_matrix, gram_max
from vnbounds.torus import (
    TorusConfig,
    balpha_gram_max,
    balpha_gram_max_antipodal,
    balpha_matrix,
    balpha_ratio,
    balpha_ratio_scan,
    balpha_sup_norm,
    collinearity_certificate,
    psd_torus_equals_sign,
    sign_sup,
    torus_sup,
)


def dense_grid_max(p, res):
    """Plain grid maximum of |p| over the torus; a lower bound for the sup."""
    g = 2 * np.pi * np.arange(res) / res
    th = np.stack(np.meshgrid(*([g] * p.n), indexing="ij"), axis=-1).reshape(-1, p.n)
    return float(np.abs(evaluate(p, np.exp(1j * th))).max())


def test_vk_sup_is_five():
    r = torus_sup(vk_polynomial())
    assert r.value == pytest.approx(5, abs=1e-6)
    assert r.certificate_residual <= 1e-6
    assert r.upper_bound >= r.value


def test_value_matches_argmax():
    r = torus_sup(vk_polynomial())
    assert abs(abs(evaluate(vk_polynomial(), r.argmax.z)) - r.value) < 1e-10


def test_product_monomial():
    p = poly_from_matrix([[0, 0.5], [0.5, 0]])
    assert torus_sup(p).value == pytest.approx(1, abs=1e-9)


def test_table_row_five_root_two():
    r = torus_sup(poly_from_matrix([[1, 1, 1], [1, 1, 1], [1, 1, -1]]))
    assert r.value == pytest.approx(5 * math.sqrt(2), abs=1e-6)


def test_against_dense_grid(rng):
    for _ in range(5):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        p = PolySpec.build(a, linear=rng.standard_normal(2), a0=rng.standard_normal())
        sup = torus_sup(p).value
        grid = dense_grid_max(p, 1500)
        assert sup >= grid - 1e-12
        assert sup - grid < 1e-4


def test_scaling(rng):
    a = rng.standard_normal((3, 3))
    p = poly_from_matrix(a)
    c = 2.5 * np.exp(0.7j)
    assert torus_sup(p.scaled(c)).value == pytest.approx(abs(c) * torus_sup(p).value, rel=1e-9)


def test_deterministic():
    p = poly_from_matrix(balpha_matrix(-0.3))
    assert torus_sup(p).to_dict() == torus_sup(p).to_dict()


def test_resolution_too_small():
    with pytest.raises(ValueError):
        torus_sup(vk_polynomial(), TorusConfig(resolution=4))


def test_grid_budget():
    p = poly_from_matrix(np.eye(8))
    with pytest.raises(BudgetError):
        torus_sup(p, TorusConfig(resolution=64))


def test_linear_terms_use_all_angles():
    # 1 + z_1: sup 2 at z_1 = 1
    p = PolySpec(1, 1.0, [1.0], [[0.0]])
    r = torus_sup(p)
    assert r.value == pytest.approx(2, abs=1e-9)
    assert min(r.argmax.angles[0], 2 * np.pi - r.argmax.angles[0]) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_psd_sup_is_entry_sum_of_abs_for_nonneg(seed):
    # nonnegative coefficients: the sup is attained at z = 1
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, (3, 3))
    assert torus_sup(poly_from_matrix(a)).value == pytest.approx(a.sum(), abs=1e-8)


# -- collinearity certificate ---------------------------------------------------------


def test_certificate_single_variable():
    p = PolySpec(1, 0.0, [1.0], [[0.0]])
    for th in (0.0, 1.0, 4.0):
        assert collinearity_certificate(p, [th]).residual < 1e-15


def test_certificate_vk():
    p = vk_polynomial()
    assert collinearity_certificate(p, torus_sup(p).argmax).residual <= 1e-6
    assert collinearity_certificate(p, [0.0, 0.3, 1.1]).residual > 0.01


def test_certificate_flags_degenerate():
    p = PolySpec(2, 1.0, [0.0, 0.0], np.zeros((2, 2)))
    c = collinearity_certificate(p, [0.1, 0.2])
    assert c.degenerate and c.residual == 0.0


def test_certificate_dimension_mismatch():
    with pytest.raises(ValueError):
        collinearity_certificate(vk_polynomial(), [0.0, 1.0])


# -- sign vectors ---------------------------------------------------------------------


def test_sign_sup_identity():
    w = sign_sup(np.eye(3))
    assert w.value == 3 and list(w.signs) == [1, 1, 1]


def test_sign_sup_vk():
    w = sign_sup(VK_MATRIX)
    assert w.modulus == 5
    assert list(w.signs) == [1, 1, -1]


def test_sign_sup_matches_enumeration(rng):
    a = fj_matrix(3).matrix.real()
    brute = max(abs(np.array(s) @ a @ np.array(s)) for s in itertools.product((1, -1), repeat=6))
    w = sign_sup(fj_matrix(3).matrix)
    assert w.modulus == brute
    assert w.value == w.signs @ a @ w.signs


def test_sign_sup_value_is_signed():
    w = sign_sup(-np.eye(2))
    assert w.value == -2 and w.modulus == 2


def test_sign_sup_budget():
    with pytest.raises(BudgetError):
        sign_sup(np.eye(25))


def test_sign_sup_rejects_complex():
    with pytest.raises(ValueError):
        sign_sup(np.array([[1j, 0], [0, 1]]))


def test_psd_identity_gap():
    r = psd_torus_equals_sign(np.eye(3))
    assert (r.torus_value, r.sign_value) == pytest.approx((3, 3))
    assert r.gap < 1e-9


def test_psd_fj3_gap():
    assert psd_torus_equals_sign(fj_matrix(3).matrix).gap <= 1e-3


def test_psd_rejects_indefinite():
    with pytest.raises(ValueError):
        psd_torus_equals_sign(VK_MATRIX)


def test_psd_random_gaps(rng):
    for _ in range(20):
        n = int(rng.integers(2, 5))
        assert psd_torus_equals_sign(random_psd(rng, n)).within_tolerance


# -- B_alpha --------------------------------------------------------------------------


def test_balpha_matrix():
    assert np.array_equal(balpha_matrix(-1).entries, [[1, 1, 1], [1, 1, -1], [1, -1, 1]])
    assert np.array_equal(balpha_matrix(1).entries, np.ones((3, 3)))
    assert np.array_equal(balpha_matrix(0).entries, [[1, 1, 1], [1, 1, 0], [1, 0, 1]])


@pytest.mark.parametrize("alpha,want", [(-1, 5), (-0.5, 6), (-2, 7)])
def test_balpha_sup_norm(alpha, want):
    assert balpha_sup_norm(alpha) == want


@pytest.mark.parametrize("alpha,want", [(-1, 6), (-0.25, 3.5), (-0.5, 6)])
def test_balpha_gram_antipodal_examples(alpha, want):
    assert balpha_gram_max_antipodal(alpha) == pytest.approx(want)


def test_balpha_gram_corrected_on_upper_branch():
    # X_1 = X_2 = X_3 gives the entry sum 7 + 2a, above the antipodal value 3 - 2a
    for a in (-0.4, -0.25, -0.1):
        assert balpha_gram_max(a) == pytest.approx(7 + 2 * a)
        assert balpha_gram_max(a) > balpha_gram_max_antipodal(a)
    assert balpha_gram_max(-1) == 6 and balpha_gram_max(-0.5) == 6


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_balpha_rejects_nonnegative(alpha):
    for f in (balpha_sup_norm, balpha_gram_max, balpha_gram_max_antipodal):
        with pytest.raises(ValueError):
            f(alpha)


@pytest.mark.parametrize("alpha", [-2.7, -1.6, -1.0, -0.8, -0.5, -0.3, -0.1])
def test_balpha_closed_forms_against_numerics(alpha):
    q = balpha_matrix(alpha)
    assert torus_sup(poly_from_matrix(q)).value == pytest.approx(balpha_sup_norm(alpha), abs=1e-6)
    assert gram_max(q).modulus == pytest.approx(balpha_gram_max(alpha), abs=1e-6)


def test_balpha_ratio_examples():
    assert balpha_ratio(-1) == pytest.approx(1.2)
    assert balpha_ratio(-0.1, antipodal=True) == pytest.approx(3.2 / 6.8)
    assert balpha_ratio(-2) == pytest.approx(7.5 / 7)


def test_balpha_ratio_monotone():
    left = np.linspace(-4, -1, 40)
    right = np.linspace(-1, -0.01, 40)
    for pub in (False, True):
        rl = [balpha_ratio(a, antipodal=pub) for a in left]
        rr = [balpha_ratio(a, antipodal=pub) for a in right]
        assert np.all(np.diff(rl) > 0)
        assert np.all(np.diff(rr) <= 1e-15)


def test_balpha_scan_argmax():
    rows, arg = balpha_ratio_scan(np.linspace(-3, -0.05, 60).tolist() + [-1.0])
    assert arg == -1.0
    assert max(r[3] for r in rows) == pytest.approx(1.2)
    with pytest.raises(ValueError):
        balpha_ratio_scan([])
