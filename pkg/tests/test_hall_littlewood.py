from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hlwalk.group_algebra import AlgebraElement, tp_eval, weyl_act
from hlwalk.hall_littlewood import (
    HLExpansion,
    LRTable,
    hl_expand,
    lr_coefficients,
    numeric_oracle_check,
)
from hlwalk.root_system import NotDominantError, build_root_system, weyl_dimension

A1 = build_root_system({"family": "A", "rank": 1})


def rank_one_closed_form(m: int) -> dict:
    """e^m + (1 - t)(e^{m-1} + ... + e^{1-m}) + e^{-m} for m >= 1."""
    if m == 0:
        return {(0,): (1,)}
    out = {(m,): (1,), (-m,): (1,)}
    for j in range(1 - m, m):
        out[(j,)] = (1, -1)
    return out


@pytest.mark.parametrize("m", range(0, 8))
def test_rank_one_matches_closed_form(m):
    assert dict(hl_expand(A1, (m,)).coefficients) == rank_one_closed_form(m)


def test_a2_adjoint():
    # s_theta = P_theta + (t + t^2) P_0 and s_theta = m_theta + 2
    rs = build_root_system({"family": "A", "rank": 2})
    P = dict(hl_expand(rs, (1, 1)).coefficients)
    expected = {r: (1,) for r in [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)]}
    expected[(0, 0)] = (2, -1, -1)
    assert P == expected


def test_trivial_and_errors(systems):
    for rs in systems.values():
        assert dict(hl_expand(rs, (0,) * rs.rank).coefficients) == {(0,) * rs.rank: (1,)}
    with pytest.raises(NotDominantError):
        hl_expand(systems["A2"], (1, 0))


@pytest.mark.parametrize("label", ["A2", "C2", "G2"])
def test_weyl_invariance_and_oracle(systems, label):
    rs = systems[label]
    for lam in rs.dominant_coweights(5):
        P = hl_expand(rs, lam).element()
        for w in rs.weyl_matrices:
            assert weyl_act(w, P) == P
        assert numeric_oracle_check(rs, lam, trials=3, seed=sum(lam)).ok


def test_t_equals_one_is_orbit_sum(systems):
    rs = systems["C2"]
    for lam in rs.dominant_coweights(5):
        P = hl_expand(rs, lam)
        orbit = {tuple(int(x) for x in w @ lam) for w in rs.weyl_matrices}
        at_one = {k: tp_eval(c, 1) for k, c in P.coefficients.items()}
        assert {k for k, v in at_one.items() if v} == orbit
        assert all(at_one[k] == 1 for k in orbit)


@pytest.mark.parametrize("label", ["A1", "A2", "C2", "G2"])
def test_t_zero_sum_is_weyl_dimension(systems, label):
    rs = systems[label]
    for lam in rs.dominant_coweights(6):
        total = sum(tp_eval(c, 0) for c in hl_expand(rs, lam).coefficients.values())
        assert total == weyl_dimension(rs, lam)


def test_rank_one_lr():
    assert dict(lr_coefficients(A1, (1,), (1,)).coefficients) == {(2,): (1,), (1,): (1, -1), (0,): (1, 1)}


@pytest.mark.parametrize("label", ["A2", "C2", "G2"])
def test_lr_reconstructs_full_product(systems, label):
    rs = systems[label]
    lams = rs.dominant_coweights(3)
    for mu in lams:
        for nu in lams:
            table = lr_coefficients(rs, mu, nu)
            lhs = hl_expand(rs, mu).element() * hl_expand(rs, nu).element()
            rhs = AlgebraElement(rs.rank)
            for lam, c in table.coefficients.items():
                rhs = rhs + hl_expand(rs, lam).element().scale(c)
            assert lhs == rhs
            assert table.coefficients == lr_coefficients(rs, nu, mu).coefficients
            top = tuple(a + b for a, b in zip(mu, nu))
            assert table[top] == (1,)


@given(st.integers(0, 5), st.integers(0, 5))
def test_rank_one_lr_support(a, b):
    table = lr_coefficients(A1, (a,), (b,))
    assert set(table.coefficients) == set((k,) for k in range(abs(a - b), a + b + 1))


def test_json_roundtrips(systems):
    rs = systems["G2"]
    P = hl_expand(rs, (1, 2))
    assert HLExpansion.from_json(P.to_json()).coefficients == P.coefficients
    T = lr_coefficients(rs, (1, 2), (1, 2))
    back = LRTable.from_json(T.to_json())
    assert back.coefficients == T.coefficients and back.mu == T.mu


def test_specialize_positive_t():
    # sanity at a generic rational t: P_1 P_1 evaluated vs peeled expansion
    t = Fraction(2, 7)
    T = lr_coefficients(A1, (1,), (1,))
    assert tp_eval(T[(0,)], t) == 1 + t
