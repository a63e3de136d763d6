from pathlib import Path

import pytest

from adapters.expression import ExpressionEvaluator, read_expression_file
from core.algebra import WordAlgebra
from core.orthogonalizer import Orthogonalizer
from domain.entities import CriticalIndex, QTerm
from domain.values import GaussianRational
from utils.helpers import CompanionRetry, PreconditionError

INPUTS = Path(__file__).resolve().parent.parent / 'config' / 'inputs'


@pytest.fixture(scope="module")
def example_terms(alg3):
    return ExpressionEvaluator(alg3).qterms(read_expression_file(INPUTS / 'three_term_qform.alg'))


@pytest.fixture(scope="module")
def example_result(ortho3, example_terms):
    return ortho3.build(example_terms)


def _index(g3, m, n, h, h_prime):
    return CriticalIndex(m, n, g3(h), g3(h_prime), g3(0), 0)


# ========== LEVELS ==========

def test_common_level_example(ortho3, example_terms):
    split = ortho3.common_level(example_terms)
    assert split.M == 4
    assert [g.coords[0] for g in split.g_list] == [5, 10, 20]


def test_common_level_single_term(ortho3, g3):
    split = ortho3.common_level([QTerm(0, g3(0), g3(4), 2, g3(0), 0)])
    assert (split.M, split.N) == (2, 1)


def test_common_level_refines_coarse_projection(ortho3, g3):
    y = [QTerm(0, g3(0), g3(1), 1, g3(0), 0), QTerm(0, g3(0), g3(2), 2, g3(0), 0)]
    split = ortho3.common_level(y)
    assert split.M == 2
    assert [g.coords[0] for g in split.g_list] == [1, 2, 4, 7]
    assert len(split.terms) == 4


def test_common_level_rejects_empty(ortho3):
    with pytest.raises(PreconditionError):
        ortho3.common_level([])


# ========== EXPONENTS ==========

def test_critical_exponent_examples(ortho3, g3):
    first = _index(g3, 1, 2, -30, 2187)
    assert ortho3.critical_quantity(first, g3(86)) == g3(-1701)
    assert ortho3.critical_exponent(first, g3(86)) == 6
    second = _index(g3, 9, 7, 5, 0)
    assert ortho3.critical_quantity(second, g3(91)) == g3(-1592131)
    assert ortho3.critical_exponent(second, g3(91)) == 1


@pytest.mark.parametrize("h_i", [0, 1, 17, -40])
def test_equal_shifts_cancel_companion(ortho3, g3, h_i):
    idx = _index(g3, 2, 2, 18, 0)
    assert ortho3.critical_quantity(idx, g3(h_i)) == g3(18)
    assert ortho3.critical_exponent(idx, g3(h_i)) == 3


def test_vanishing_quantity_asks_for_retry(ortho3, g3):
    idx = _index(g3, 1, 0, 0, 0)
    with pytest.raises(CompanionRetry):
        ortho3.critical_exponent(idx, g3(0))


# ========== CONSTRUCTION ==========

def test_build_example(example_result, g3):
    assert example_result.M == 4
    assert example_result.N == 3
    assert example_result.p == 6
    assert sorted(example_result.per_term_exponents.values()) == [1, 6]
    assert example_result.h_list[0] == g3(86)
    for g, h in zip(example_result.g_list, example_result.h_list):
        assert (h - g).coords[0] % 81 == 0


def test_build_example_verifies_criterion(ortho3, example_terms, example_result):
    report = ortho3.verify_li(example_terms, example_result)
    assert report.verdicts == {'i': True, 'ii': True, 'iii': True, 'iv': True}
    assert report.iv_identity and report.iv_certificate
    assert report.expectation_norm_sq == report.compressed_norm_sq
    assert not report.failures


def test_undersized_exponent_fails_condition_iv(ortho3, example_terms, example_result):
    report = ortho3.verify_li(example_terms, ortho3.with_exponent(example_result, 1))
    assert not report.verdicts['iv']
    assert not report.iv_certificate


def test_larger_exponent_still_passes(ortho3, example_terms, example_result):
    report = ortho3.verify_li(example_terms, ortho3.with_exponent(example_result, example_result.p + 1))
    assert report.all_true


def test_expectation_keeps_only_the_diagonal_term(alg3, example_terms):
    # the first two terms have unequal shift exponents
    y = alg3.from_qform(example_terms)
    assert alg3.equals(alg3.expectation(y), alg3.from_qterm(example_terms[2]))


def test_projections_are_bounded_and_commute_with_expectation(ortho3, alg3, example_terms, example_result):
    assert ortho3.projections_bounded(example_result)
    E = alg3.expectation(alg3.from_qform(example_terms))
    for f in example_result.f_list:
        f = alg3.element(f)
        assert alg3.equals(alg3.mul(E, f), alg3.mul(f, E))


def test_identity_input(ortho3, g3):
    y = [QTerm(0, g3(0), g3(0), 0, g3(0), 0)]
    result = ortho3.build(y)
    assert result.M == 0
    assert result.p == 1
    assert result.per_term_exponents == {}
    report = ortho3.verify_li(y, result)
    assert report.all_true
    assert report.scalars == (GaussianRational.of(1),)


def test_rank_one_projection_input(alg3, ortho3):
    terms = ExpressionEvaluator(alg3).qterms(read_expression_file(INPUTS / 'rank_one_projection.alg'))
    result = ortho3.build(terms)
    report = ortho3.verify_li(terms, result)
    assert report.all_true
    assert result.p > result.M


def test_gaussian_criterion(gaussian):
    alg = WordAlgebra(gaussian)
    ortho = Orthogonalizer(alg)
    e = gaussian.zero()
    one = gaussian.element((1, 0))
    y = [QTerm(0, e, e, 1, e, 0), QTerm(1, e, e, 1, one, 1, GaussianRational(0, 1)),
         QTerm(1, one, e, 1, e, 1, GaussianRational(0, -1))]
    result = ortho.build(y)
    assert ortho.verify_li(y, result).all_true
