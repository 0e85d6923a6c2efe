from fractions import Fraction

import pytest

from escurves.errors import AuditError, PreconditionError
from escurves.es_model import ApSolution
from escurves.factor_terms import TermFactorization, factor_terms
from escurves.fixtures import TAMPERED_K, tampered_terms
from escurves.mass_increment import compare_scaled, mass_increment_audit, numeric_constant_checks


def test_numeric_constants():
    checks = numeric_constant_checks(12)
    assert checks["two_log_two"]["ok"] and checks["two_log_two"]["value"].startswith("1.386294361")
    assert checks["increment_constant"]["ok"]


def test_compare_scaled():
    # 0.3 * 100 / log 100 = 6.514...
    assert compare_scaled(7, Fraction(3, 10), 100)
    assert not compare_scaled(6, Fraction(3, 10), 100)


def test_speculative_trace_consistent():
    s = ApSolution(1, 1, None, 100, 5)
    trace = mass_increment_audit(factor_terms(s), 100, 5, 1)
    assert trace.consistent()
    d = trace.as_dict()
    assert d["small"] + d["R"] == d["I_size"]
    assert d["A_size"] <= d["distinct"] <= d["small"]


def test_distinct_large_terms_break_R_bound():
    # every a_i >= k and distinct: R = |I| and the rising factorial overflows k!
    k = 40
    terms = [TermFactorization(i, 41 + i, 1, 1, True) for i in range(k)]
    with pytest.raises(AuditError):
        mass_increment_audit(terms, k, 3, 1)
    big = [2**i for i in range(1, k + 1)]
    terms = [TermFactorization(i, 1, 1, 1, True) for i in range(k)]
    trace = mass_increment_audit(terms, k, 3, 1)
    assert trace.R == 0 and trace.consistent()


def test_inconsistent_terms():
    terms = factor_terms(ApSolution(1, 1, None, 10, 3))
    terms[3] = TermFactorization(3, terms[3].a, 8, 3, True)
    with pytest.raises(AuditError, match="index 3"):
        mass_increment_audit(terms, 10, 3, 1)


def test_small_k():
    with pytest.raises(PreconditionError):
        mass_increment_audit([], 2, 3, 1)


@pytest.fixture(scope="module")
def tampered():
    terms, d = tampered_terms()
    return terms, d, mass_increment_audit(terms, TAMPERED_K, 3, d)


def test_tampered_collision(tampered):
    terms, d, trace = tampered
    assert trace.broken == "accumulation"
    col = trace.collision
    assert col["A0"] == 28 and col["pairs"]
    for pair in col["pairs"]:
        i, j = pair["i"], pair["j"]
        assert terms[i].t ** 3 - terms[j].t ** 3 == col["A0"] * d**3
    assert trace.consistent()
