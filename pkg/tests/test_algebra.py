from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.algebra import WordAlgebra
from core.oracle import L2Oracle
from domain.entities import Letter, LetterKind, Monomial, QTerm
from domain.values import GaussianRational
from tests.conftest import make_context
from utils.helpers import CapExceeded, NotDiagonal

small = st.integers(min_value=-6, max_value=6)
wide = st.integers(min_value=-10, max_value=10)
exps = st.integers(min_value=0, max_value=3)
coeffs = st.integers(min_value=-3, max_value=3).filter(bool)


def letters(displacement=3):
    return st.one_of(
        st.builds(lambda v: ("u", v), st.integers(-displacement, displacement)),
        st.just(("s", None)),
        st.just(("s*", None)),
    )


def make_word(ctx, raw):
    word = []
    for kind, v in raw:
        if kind == "u":
            word.append(Letter(LetterKind.U, ctx.element((v,))))
        elif kind == "s":
            word.append(Letter(LetterKind.S))
        else:
            word.append(Letter(LetterKind.SSTAR))
    return word


words = st.lists(letters(), max_size=6)


# ========== CONSTRUCTION ==========

def test_from_word_examples(alg3, times3, g3):
    sstar, s = Letter(LetterKind.SSTAR), Letter(LetterKind.S)
    assert alg3.from_word([sstar, Letter(LetterKind.U, g3(1)), s]).is_zero_syntactically
    assert alg3.equals(alg3.from_word([sstar, Letter(LetterKind.U, g3(3)), s]), alg3.u(g3(1)))
    assert alg3.from_word([Letter(LetterKind.U, g3(2)), Letter(LetterKind.U, g3(3))]) == alg3.u(g3(5))


def test_from_word_length_bound(alg3):
    word = [Letter(LetterKind.S)] * (alg3.word_length_bound + 1)
    with pytest.raises(CapExceeded):
        alg3.from_word(word)


def test_monomial_is_canonical(alg3, g3):
    mono = alg3.monomial(g3(86), 4, 1, g3(0))
    assert mono == Monomial(g3(5), 4, 1, g3(3))
    assert mono.degree == 3


# ========== PRODUCTS ==========

def test_projection_products(alg3, g3):
    e = alg3.projection
    assert alg3.mul(e(g3(1), 1), e(g3(2), 1)).is_zero_syntactically
    assert alg3.mul(e(g3(1), 2), e(g3(1), 1)) == e(g3(1), 2)
    base = alg3.element(Monomial(g3(0), 1, 1, g3(0)))
    assert alg3.mul(base, base) == base


@given(wide, wide)
def test_group_relations(alg3, g, h):
    ctx = alg3.context
    x, y = ctx.element((g,)), ctx.element((h,))
    assert alg3.equals(alg3.mul(alg3.u(x), alg3.u(y)), alg3.u(x + y))
    assert alg3.equals(alg3.mul(alg3.s(), alg3.u(x)), alg3.mul(alg3.u(ctx.apply_endo(x, 1)), alg3.s()))
    assert alg3.equals(alg3.mul(alg3.u(x), alg3.s_star()), alg3.mul(alg3.s_star(), alg3.u(ctx.apply_endo(x, 1))))
    ss = alg3.mul(alg3.s(), alg3.s_star())
    phi_x = alg3.u(ctx.apply_endo(x, 1))
    assert alg3.equals(alg3.mul(phi_x, ss), alg3.mul(ss, phi_x))


@given(wide, wide, exps, exps)
def test_merged_relation(alg3, g, h, n, m):
    ctx = alg3.context
    x, y = ctx.element((g,)), ctx.element((h,))
    left = alg3.product(alg3.u(x), alg3.s(n), alg3.u(y), alg3.s(m))
    right = alg3.mul(alg3.u(x + ctx.apply_endo(y, n)), alg3.s(n + m))
    assert alg3.equals(left, right)


def test_linear_structure_lives_on_elements(alg3, g3):
    x, y = alg3.u(g3(1)), alg3.s()
    assert alg3.equals((x + y).scale(2) - y.scale(2), x.scale(2))
    assert not any(hasattr(WordAlgebra, name) for name in ('add', 'scale'))
    assert not hasattr(g3(1), 'scaled')


@pytest.mark.parametrize("fixture", ["times3", "gaussian", "double2", "mixed"])
def test_partition_of_unity(request, fixture):
    ctx = request.getfixturevalue(fixture)
    alg = WordAlgebra(ctx)
    total = alg.zero()
    for g in ctx.transversal(1):
        total = total + alg.projection(g, 1)
    assert alg.equals(total, alg.one())
    assert alg.equals(alg.mul(alg.s_star(), alg.s()), alg.one())


@given(words, words)
def test_adjoint_reverses_products(alg3, w1, w2):
    ctx = alg3.context
    x, y = alg3.from_word(make_word(ctx, w1)), alg3.from_word(make_word(ctx, w2))
    assert alg3.adjoint(alg3.adjoint(x)) == x
    assert alg3.equals(alg3.adjoint(alg3.mul(x, y)), alg3.mul(alg3.adjoint(y), alg3.adjoint(x)))


# ========== LEVELS AND NORMAL FORM ==========

def test_raise_level_of_one(alg3, g3):
    one = next(iter(alg3.one().terms))
    expected = alg3.projection(g3(0), 1) + alg3.projection(g3(1), 1) + alg3.projection(g3(2), 1)
    assert alg3.raise_level(one) == expected


def test_raise_level_of_projection(alg3, g3):
    mono = next(iter(alg3.projection(g3(1), 1).terms))
    raised = alg3.raise_level(mono)
    assert len(raised) == 3
    expected = alg3.zero()
    for g in (0, 1, 2):
        expected = expected + alg3.projection(g3(1 + 3 * g), 2)
    assert raised == expected


@given(small, exps, exps, small)
def test_raise_level_keeps_degree(alg3, a, p, q, b):
    ctx = alg3.context
    mono = alg3.monomial(ctx.element((a,)), p, q, ctx.element((b,)))
    raised = alg3.raise_level(mono)
    assert all(m.degree == mono.degree for m in raised.terms)
    assert alg3.equals(raised, alg3.element(mono))


def test_normal_form_examples(alg3, g3, identity_ctx):
    total = alg3.projection(g3(0), 1) + alg3.projection(g3(1), 1) + alg3.projection(g3(2), 1)
    assert alg3.normal_form(alg3.one() - total).is_zero_syntactically
    assert alg3.normal_form(alg3.u(g3(5))) == alg3.u(g3(5))

    alg1 = WordAlgebra(identity_ctx)
    one = identity_ctx.element((1,))
    commutator = alg1.mul(alg1.u(one), alg1.s()) - alg1.mul(alg1.s(), alg1.u(one))
    assert alg1.is_zero(commutator)


def test_equals_examples(alg3, g3):
    total = alg3.projection(g3(0), 1) + alg3.projection(g3(1), 1) + alg3.projection(g3(2), 1)
    assert alg3.equals(total, alg3.one())
    assert alg3.equals(alg3.mul(alg3.s_star(), alg3.s()), alg3.one())
    assert not alg3.equals(alg3.mul(alg3.s(), alg3.s_star()), alg3.one())


def test_index_one_collapses_range_projection(identity_ctx):
    alg = WordAlgebra(identity_ctx)
    assert alg.equals(alg.mul(alg.s(), alg.s_star()), alg.one())
    assert alg.normal_form(alg.product(alg.s(2), alg.s_star(3))) == alg.s_star()


@given(words)
def test_degree_components_decide_zero(alg3, raw):
    ctx = alg3.context
    x = alg3.from_word(make_word(ctx, raw))
    x = x - alg3.mul(alg3.s(), alg3.mul(x, alg3.s_star()))
    components = alg3.degree_components(x)
    assert alg3.is_zero(x) == all(alg3.is_zero(c) for c in components.values())


@given(exps, exps, st.lists(st.tuples(st.integers(0, 8), small, coeffs), min_size=1, max_size=5,
                            unique_by=lambda t: (t[0], t[1])))
def test_fixed_level_monomials_are_independent(alg3, oracle3, p, q, picks):
    ctx = alg3.context
    reps = ctx.transversal(p)
    pairs = []
    for index, b, c in picks:
        mono = alg3.monomial(reps[index % len(reps)], p, q, ctx.element((b,)))
        pairs.append((mono, GaussianRational.of(c)))
    x = alg3.zero()
    for mono, c in pairs:
        x = x + alg3.element(mono, c)
    if x.is_zero_syntactically:
        return
    assert not alg3.is_zero(x)
    assert oracle3.separating_point(x, oracle3.window(20)) is not None


# ========== EXPECTATION ==========

def test_expectation_examples(alg3, g3):
    f = alg3.projection(g3(5), 2)
    assert alg3.expectation(f) == f
    assert alg3.expectation(alg3.one()) == alg3.one()
    assert alg3.expectation(alg3.u(g3(1))).is_zero_syntactically
    assert alg3.expectation(alg3.s()).is_zero_syntactically


@given(words)
@settings(max_examples=100)
def test_expectation_is_idempotent_and_positive(alg3, raw):
    ctx = alg3.context
    z = alg3.normal_form(alg3.from_word(make_word(ctx, raw)))
    e = alg3.expectation(z)
    assert alg3.expectation(e) == e
    zz = alg3.normal_form(alg3.mul(alg3.adjoint(z), z))
    atoms = alg3.diagonal_atoms(alg3.expectation(zz))
    assert all(c.is_real and c.re >= 0 for c in atoms.values())


@given(words, st.integers(0, 8), st.integers(0, 2))
def test_expectation_is_diagonal_module_map(alg3, raw, g, k):
    ctx = alg3.context
    x = alg3.normal_form(alg3.from_word(make_word(ctx, raw)))
    d = alg3.projection(ctx.element((g,)), k)
    left = alg3.expectation(alg3.normal_form(alg3.mul(d, x)))
    right = alg3.mul(d, alg3.expectation(x))
    assert alg3.equals(left, right)


def test_diagonal_norm_examples(alg3, g3):
    assert alg3.diagonal_norm_sq(alg3.one()) == 1
    assert alg3.diagonal_norm_sq(alg3.projection(g3(0), 1) - alg3.projection(g3(1), 1)) == 1
    assert alg3.diagonal_norm_sq(alg3.projection(g3(0), 1) + alg3.projection(g3(0), 2)) == 4
    assert alg3.diagonal_norm_sq(alg3.scalar(GaussianRational(Fraction(1, 2), 1))) == Fraction(5, 4)
    assert alg3.diagonal_norm_sq(alg3.zero()) == 0


def test_diagonal_atoms_reject_off_diagonal(alg3, g3):
    with pytest.raises(NotDiagonal):
        alg3.diagonal_atoms(alg3.u(g3(1)))


def test_raise_to_respects_enum_cap():
    ctx = make_context([[3]], enum_cap=20)
    alg = WordAlgebra(ctx)
    with pytest.raises(CapExceeded):
        alg.normal_form(alg.one() + alg.projection(ctx.element((1,)), 3))


# ========== Q-FORM ==========

def test_qterm_projection_round_trip(alg3, g3):
    term = QTerm(0, g3(0), g3(5), 2, g3(0), 0)
    assert alg3.from_qterm(term) == alg3.projection(g3(5), 2)
    assert alg3.to_qform(alg3.projection(g3(5), 2)) == [term]


def test_first_critical_term_round_trip(alg3, g3):
    term = QTerm(2, g3(-30), g3(5), 4, g3(2187), 1, GaussianRational.of(2))
    x = alg3.from_qterm(term)
    expected = alg3.product(alg3.s_star(2), alg3.u(g3(30)), alg3.projection(g3(5), 4),
                            alg3.u(g3(2187)), alg3.s()).scale(2)
    assert alg3.equals(x, expected)
    assert alg3.equals(alg3.from_qform(alg3.to_qform(x)), x)


def test_interior_mismatch_reduces_to_zero(alg3, oracle3, g3):
    term = QTerm(1, g3(0), g3(1), 1, g3(0), 1)
    x = alg3.from_qterm(term)
    assert alg3.is_zero(x)
    assert oracle3.separating_point(x, oracle3.window(20)) is None


@given(words)
def test_qform_round_trip(alg3, raw):
    x = alg3.normal_form(alg3.from_word(make_word(alg3.context, raw)))
    assert alg3.equals(alg3.from_qform(alg3.to_qform(x)), x)


def test_gaussian_qform_round_trip(gaussian):
    alg = WordAlgebra(gaussian)
    x = alg.product(alg.s_star(2), alg.u(gaussian.element((1, 2))), alg.s()) + alg.s(3)
    assert alg.equals(alg.from_qform(alg.to_qform(x)), x)
    assert L2Oracle(alg).equal_on_window(alg.from_qform(alg.to_qform(x)), x, L2Oracle(alg).window(4))
