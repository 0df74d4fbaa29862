import math

import numpy as np
import pytest
from hypothesis import given

from cspencer import bm
from cspencer.errors import DomainError, TheoremViolation
from cspencer.hadamard import dft
from cspencer.opnorms import LpPair, norm_inf_to_1_certified

import oracles
from strategies import complex_matrices

# [DERIVED] frozen from tests/oracles.py
A3_INF1 = 2.9978223364666365
F3_INF1 = 5.196152422706633


@pytest.mark.parametrize("n, q, p, expected", [
    (3, 1.0, math.inf, math.sqrt(3)),
    (2, 1.0, 2.0, math.sqrt(2)),
    (4, 1.5, 4.0, 4 ** 0.25),
])
def test_lp_upper_bound_values(n, q, p, expected):
    cert = bm.lp_upper_bound(n, LpPair(p=p, q=q))
    assert cert.upper == pytest.approx(expected, rel=1e-14)
    assert cert.lower_evidence <= cert.upper + 1e-6
    assert np.array_equal(cert.transporter, dft(n).matrix)


def test_lp_upper_bound_exponent_order():
    with pytest.raises(DomainError):
        bm.lp_upper_bound(3, LpPair(p=1.5, q=3.0))


def test_certificate_invariants():
    with pytest.raises(ValueError):
        bm.DistanceCertificate(2, LpPair(p=math.inf, q=1), 1.0, None, np.eye(2))
    with pytest.raises(DomainError):
        bm.DistanceCertificate(2, LpPair(p=math.inf, q=1), math.sqrt(2), None, np.zeros((2, 2)))
    with pytest.raises(TheoremViolation):
        bm.DistanceCertificate(2, LpPair(p=math.inf, q=1), math.sqrt(2), 1.5, np.eye(2))


@pytest.mark.parametrize("n, tol", [(2, 1e-6), (3, 1e-4)])
def test_product_certificate_dft(n, tol):
    c = bm.product_certificate(dft(n).matrix, LpPair(p=math.inf, q=1))
    assert c.certified and c.kind == "certified-upper"
    assert c.value == pytest.approx(math.sqrt(n), abs=tol)
    assert c.value >= math.sqrt(n) - 1e-12


def test_product_certificate_identity():
    pair = LpPair(p=4.0, q=1.5)
    c = bm.product_certificate(np.eye(3), pair)
    assert c.kind == "evidence" and not c.certified
    assert c.value == pytest.approx(3 ** (1 / 1.5 - 1 / 4), rel=1e-6)


def test_product_certificate_singular():
    with pytest.raises(DomainError):
        bm.product_certificate(np.ones((2, 2)), LpPair(p=math.inf, q=1))


def test_minimize_product_n2_from_dft():
    res = bm.minimize_product_l1_linf(2, restarts=50, seed=0, start=dft(2).matrix)
    assert res.value == pytest.approx(math.sqrt(2), abs=1e-6)
    assert res.products[0] == pytest.approx(math.sqrt(2), abs=1e-6)


@pytest.mark.parametrize("n", [2, 3])
def test_minimize_product_respects_lower_bound(n):
    res = bm.minimize_product_l1_linf(n, restarts=100, seed=1)
    assert res.value >= math.sqrt(n) - 1e-4
    assert res.value <= math.sqrt(n) + 0.05
    assert np.all(res.products >= math.sqrt(n) - 1e-4)


def test_minimize_product_is_seeded():
    a = bm.minimize_product_l1_linf(2, restarts=20, seed=7)
    b = bm.minimize_product_l1_linf(2, restarts=20, seed=7)
    assert a.value == b.value and np.array_equal(a.matrix, b.matrix)


def test_minimize_product_domain():
    with pytest.raises(DomainError):
        bm.minimize_product_l1_linf(4)


@pytest.mark.parametrize("A, expected", [(np.eye(2), 2.0), (dft(2).matrix, 2 * math.sqrt(2))])
def test_volume_lemma_equality_cases(A, expected):
    assert bm.volume_lemma_check(A)
    br = norm_inf_to_1_certified(A, tol=1e-9)
    assert br.lower == pytest.approx(expected, abs=1e-9)
    assert br.lower == pytest.approx(2 * math.sqrt(abs(np.linalg.det(A))), abs=1e-9)


@given(complex_matrices(2))
def test_volume_lemma_property(A):
    assert bm.volume_lemma_check(A)


def test_volume_lemma_batch(rng):
    As = rng.normal(size=(2000, 2, 2)) + 1j * rng.normal(size=(2000, 2, 2))
    rep = bm.volume_lemma_batch(As)
    assert rep.checked == 2000 and rep.violations == 0 and rep.min_ratio >= 1 - 1e-9


def test_counterexample_matrix_n3():
    A = bm.counterexample_matrix(3)
    assert abs(abs(np.linalg.det(A)) - 1) <= 2e-3
    br = norm_inf_to_1_certified(A, tol=1e-6)
    assert br.contains(A3_INF1) and br.upper < 3
    assert abs(br.lower - 2.9978) <= 2e-3


def test_frozen_a3_value():
    assert oracles.inf1_norm(bm.A3) == pytest.approx(A3_INF1, abs=1e-10)


@pytest.mark.parametrize("n", [4, 5])
def test_counterexample_block_extension(n):
    rep = bm.counterexample_report(n)
    assert rep.certified and rep.margin > 0
    assert rep.norm_upper == pytest.approx(n - 3 + A3_INF1, abs=1e-5)


def test_counterexample_matrix_domain():
    with pytest.raises(DomainError):
        bm.counterexample_matrix(2)


@given(complex_matrices(2))
def test_block_additivity(B):
    C = np.eye(3, dtype=complex)
    C[1:, 1:] = B
    a = norm_inf_to_1_certified(C, tol=1e-7)
    b = norm_inf_to_1_certified(B, tol=1e-7)
    assert a.lower == pytest.approx(1 + b.lower, abs=2e-7)


def test_search_from_a3_keeps_ratio():
    res = bm.search_counterexample(seed=0, iterations=100, start=bm.A3)
    assert res.ratio_upper <= 2.998 and res.success


def test_search_from_dft3_starts_at_three():
    F = dft(3).matrix
    ratio = F3_INF1 / abs(np.linalg.det(F)) ** (1 / 3)
    assert ratio == pytest.approx(3.0, abs=1e-12)
    res = bm.search_counterexample(seed=0, iterations=0, start=F)
    assert res.ratio_upper == pytest.approx(3.0, abs=1e-6)
    assert not res.success


def test_search_reports_without_raising():
    res = bm.search_counterexample(seed=3, iterations=30)
    assert res.ratio_upper > 0 and res.seed == 3 and res.iterations == 30
