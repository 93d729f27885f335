from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hlwalk.group_algebra import (
    AlgebraElement,
    NotDivisibleError,
    Specialization,
    exact_divide,
    specialize,
    tp_add,
    tp_divexact,
    tp_eval,
    tp_mul,
    tp_sub,
    tp_trim,
    weyl_act,
)
from hlwalk.root_system import build_root_system

tpolys = st.lists(st.integers(-3, 3), max_size=3).map(lambda c: tuple(c))
cws = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
elements = st.dictionaries(cws, tpolys, max_size=4).map(lambda d: AlgebraElement(2, d))


@given(elements, elements, elements)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == AlgebraElement(2)
    assert a * AlgebraElement.one(2) == a


@given(tpolys, tpolys, st.fractions(max_denominator=5))
def test_tpoly_eval_is_homomorphism(p, r, t):
    assert tp_eval(tp_mul(p, r), t) == tp_eval(p, t) * tp_eval(r, t)
    assert tp_eval(tp_add(p, r), t) == tp_eval(p, t) + tp_eval(r, t)
    assert tp_eval(tp_sub(p, r), t) == tp_eval(p, t) - tp_eval(r, t)


@given(tpolys, st.lists(st.integers(-3, 3), min_size=1, max_size=3).filter(lambda c: c[-1] != 0))
def test_tp_divexact_inverts_mul(p, b):
    b = tuple(b)
    assert tp_divexact(tp_mul(p, b), b) == tp_trim(p)


def test_tp_divexact_rejects():
    with pytest.raises(ArithmeticError):
        tp_divexact((1, 0, 1), (1, 1))


@given(elements, st.sampled_from([(1, 0), (0, 1), (1, 1), (1, 2), (3, 2)]))
def test_exact_divide_inverts_multiplication(a, beta):
    factor = AlgebraElement.one(2) - AlgebraElement.monomial(tuple(-x for x in beta))
    assert exact_divide(a * factor, beta) == a


def test_exact_divide_not_divisible():
    a = AlgebraElement(1, {(0,): (1,), (-1,): (1,)})
    with pytest.raises(NotDivisibleError):
        exact_divide(a, (1,))


def test_specialize_and_weyl_act():
    rs = build_root_system({"family": "A", "rank": 2})
    a = AlgebraElement(2, {(1, 0): (1,), (0, 0): (1, -1)})
    theta = Specialization.principal(2, 2)
    assert specialize(a, theta, Fraction(1, 2)) == 2 + Fraction(1, 2)
    # orbit sum is invariant
    orbit = AlgebraElement(0 + 2)
    for w in rs.weyl_matrices:
        orbit = orbit + weyl_act(w, AlgebraElement.monomial((1, 1)))
    for w in rs.weyl_matrices:
        assert weyl_act(w, orbit) == orbit


def test_json_roundtrip():
    a = AlgebraElement(2, {(1, -1): (0, 2), (0, 0): (1,)})
    assert AlgebraElement.from_json(a.to_json()) == a
