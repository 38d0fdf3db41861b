import math

import pytest

import citk


def hb(x):
    return 0.0 if x in (0.0, 1.0) else -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def test_wyner_dsbs_closed_form():
    a = 0.1
    p = 2 * a * (1 - a)
    assert citk.wyner_ci_dsbs(p) == pytest.approx(1 + hb(p) - 2 * hb(a), abs=1e-12)
    assert citk.wyner_ci_sbes(0.3) == pytest.approx(1.0)


def test_wyner_numeric_matches_closed_form():
    r = citk.wyner_ci_numeric(citk.dsbs(0.2), restarts=8)
    assert r["value"] == pytest.approx(citk.wyner_ci_dsbs(0.2), abs=1e-3)


def test_exact_ci_gap():
    a = 0.2
    value, gap = citk.exact_ci_dsbs(a)
    b = 1 - a
    assert gap == pytest.approx(2 * a * a * math.log2((a * a + b * b) / (2 * a * b)), abs=1e-12)
    lo, hi = citk.gaussian_exact_ci_bounds(0.5)
    assert hi - lo == pytest.approx(0.480898, abs=1e-6)


def test_couplings():
    pi = citk.dsbs(0.2)
    assert citk.max_cross_entropy([0.5, 0.5], [0.5, 0.5], pi, math.inf) == pytest.approx(math.log2(10), abs=1e-12)
    assert citk.min_relative_entropy([0.5, 0.5], [0.5, 0.5], pi) == pytest.approx(0.0, abs=1e-9)


def test_boolean_and_nicd():
    assert citk.nicd(2, 0.5, 0.5, 0.5) == pytest.approx(0.375, abs=1e-12)
    dictator = [x & 1 for x in range(8)]
    assert citk.influences(dictator) == pytest.approx([1.0, 0.0, 0.0])
    assert sum(citk.weights(dictator)) == pytest.approx(0.5)


def test_exponents_and_hc():
    assert citk.q_stability_md_exponent(0.9, 2, 1) == pytest.approx(0.552486, abs=1e-6)
    assert citk.gaussian_copula(0.5, 0.5, 0.5) == pytest.approx(1 / 3, abs=1e-9)
    assert citk.hc_member_dsbs(0.5, 2, 2)
    member, certified = citk.hc_member(citk.dsbs(0.25), 1.1, 1.1)
    assert not member and certified
    assert citk.rho1_root() == pytest.approx(0.461491, abs=1e-6)


def test_nnrank():
    r = citk.nonneg_rank([[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]])
    assert (r["lower"], r["upper"], r["linear_rank"]) == (4, 4, 3)


def test_errors_map_to_python():
    with pytest.raises(citk.DomainError):
        citk.wyner_ci_gauss(1.5)
    with pytest.raises(citk.Error):
        citk.nicd(5, 0.5, 0.5, 0.5)
