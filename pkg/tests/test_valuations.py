import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from okrwn.errors import InvariantError, OkrwnError
from okrwn.valuations import (
    ExactComplex,
    FlagSpec,
    Order,
    SparsePolynomial,
    WeightMatrix,
    beta_compare,
    beta_valuation,
    flag_valuation,
    homogenize,
    weighted_order,
)

LEX = WeightMatrix.identity(2)
STRAIGHT = WeightMatrix.straightened(2)


def poly(*pairs):
    return SparsePolynomial.from_terms(pairs)


# -- weight matrices and orders ---------------------------------------------------------


def test_weight_matrix_invariants():
    assert LEX.det == 1 and not LEX.infinitesimal
    assert STRAIGHT.infinitesimal and abs(STRAIGHT.det) == 1
    with pytest.raises(InvariantError):
        WeightMatrix(((1, 1), (2, 2)))
    with pytest.raises(InvariantError):
        WeightMatrix(((1, -1), (0, 1)))
    assert WeightMatrix.from_json(STRAIGHT.to_json()) == STRAIGHT


def test_beta_compare_examples():
    assert beta_compare((2, 1), (1, 3), LEX) is Order.GT
    assert STRAIGHT.T((2, 1)) == (3, 2) and STRAIGHT.T((1, 3)) == (4, 1)
    assert beta_compare((2, 1), (1, 3), STRAIGHT) is Order.LT
    assert beta_compare((4, 4), (4, 4), STRAIGHT) is Order.EQ
    with pytest.raises(InvariantError):
        beta_compare((1,), (1, 2), LEX)


exps2 = st.tuples(st.integers(0, 6), st.integers(0, 6))


@settings(max_examples=60, deadline=None)
@given(exps2, exps2, exps2)
def test_order_is_additive(a, g, c):
    for beta in (LEX, STRAIGHT, WeightMatrix(((2, 3), (1, 0)))):
        o = beta_compare(a, g, beta)
        shifted = beta_compare(tuple(x + y for x, y in zip(a, c)), tuple(x + y for x, y in zip(g, c)), beta)
        assert o is shifted
        assert (o is Order.EQ) == (a == g)


# -- valuations ----------------------------------------------------------------------


def test_beta_valuation_examples():
    f = poly((1, (2, 1)), (1, (1, 3)))
    assert beta_valuation(f, LEX).exponent == (1, 3)
    assert beta_valuation(f, STRAIGHT).exponent == (2, 1)
    m = SparsePolynomial.monomial((3, 5), Fraction(2, 3))
    for beta in (LEX, STRAIGHT):
        v = beta_valuation(m, beta)
        assert v.exponent == (3, 5) and v.coefficient == Fraction(2, 3)


def test_zero_polynomial_rejected():
    zero = SparsePolynomial(2, {})
    with pytest.raises(OkrwnError):
        beta_valuation(zero, LEX)
    with pytest.raises(OkrwnError):
        flag_valuation(zero, FlagSpec.identity(2))
    with pytest.raises(OkrwnError):
        homogenize(zero, j=0)


def test_no_zero_coefficients_stored():
    f = poly((1, (1, 0)), (-1, (1, 0)), (2, (0, 1)))
    assert f.support == [(0, 1)]


polys = st.lists(st.tuples(st.integers(-3, 3).filter(bool), st.tuples(*[st.integers(0, 6)] * 3)),
                 min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_valuation_is_additive(p, q):
    f, g = poly(*p), poly(*q)
    if f.is_zero() or g.is_zero():
        return
    for beta in (WeightMatrix.identity(3), WeightMatrix.straightened(3)):
        lhs = beta_valuation(f * g, beta).exponent
        rhs = tuple(a + b for a, b in zip(beta_valuation(f, beta).exponent, beta_valuation(g, beta).exponent))
        assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(polys)
def test_identity_flag_matches_lex(p):
    f = poly(*p)
    if f.is_zero():
        return
    assert flag_valuation(f, FlagSpec.identity(3)) == beta_valuation(f, WeightMatrix.identity(3)).exponent


# -- homogenization ------------------------------------------------------------------


def test_homogenize_examples():
    f = poly((1, (2, 0)), (1, (1, 1)))
    assert homogenize(f, j=0) == poly((1, (1, 1)))
    g = poly((1, (1, 0)), (1, (1, 1)), (1, (0, 3)))
    assert homogenize(g, j=0) == poly((1, (0, 3)))
    h = poly((1, (2, 0)), (3, (1, 1)), (1, (0, 2)))
    assert homogenize(h) == h


def test_weighted_order():
    f = poly((1, (2, 0)), (1, (0, 1)))
    assert weighted_order(f, (1, 2)) == 2
    assert homogenize(f, beta_row=(1, 2)) == f
    assert homogenize(f, beta_row=(1, 3)) == poly((1, (2, 0)))


@settings(max_examples=60, deadline=None)
@given(polys, st.tuples(*[st.integers(0, 3)] * 3), st.tuples(*[st.integers(0, 3)] * 3))
def test_homogenize_idempotent_and_shift_compatible(p, w, c):
    f = poly(*p)
    if f.is_zero():
        return
    h = homogenize(f, beta_row=w)
    assert homogenize(h, beta_row=w) == h
    assert homogenize(f.shift(c), beta_row=w) == h.shift(c)


# -- flags -------------------------------------------------------------------------------


def test_flag_valuation_examples():
    f = poly((1, (2, 1)), (1, (3, 0)))
    assert flag_valuation(f, FlagSpec((0, 1))) == (2, 1)
    assert flag_valuation(SparsePolynomial.monomial((4, 2)), FlagSpec.identity(2)) == (4, 2)
    a = poly((1, (1, 0)), (1, (0, 2)))
    b = poly((1, (1, 1)))
    fl = FlagSpec.identity(2)
    assert flag_valuation(a, fl) == (0, 2) and flag_valuation(b, fl) == (1, 1)
    assert flag_valuation(a * b, fl) == (1, 3)


def test_flag_permutation_checked():
    with pytest.raises(InvariantError):
        FlagSpec((0, 0))


def test_reversed_flag():
    f = poly((1, (2, 1)), (1, (3, 0)))
    assert flag_valuation(f, FlagSpec((1, 0))) == (0, 3)


# -- coefficients and serialization ----------------------------------------------------


def test_exact_json_roundtrip():
    f = poly((Fraction(1, 3), (1, 0)), (ExactComplex(Fraction(2), Fraction(-1, 2)), (0, 2)))
    back = SparsePolynomial.from_json(json.loads(json.dumps(f.to_json())))
    assert back == f and not back.inexact


def test_float_mode_flagged_and_pruned():
    f = poly((1.0, (1, 0)), (1e-14, (0, 1)))
    assert f.inexact and f.pruned == 1 and f.support == [(1, 0)]
    back = SparsePolynomial.from_json(json.loads(json.dumps(f.to_json())))
    assert back.inexact
