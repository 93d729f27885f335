from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlwalk.root_system import (
    CartanMatrixError,
    CartanSpec,
    InfiniteTypeError,
    NotDominantError,
    WeylCapExceeded,
    build_root_system,
    cartan_matrix,
    dominance_leq,
    dominant_representative,
    height,
    poincare_polynomial,
    stabilizer_poincare,
    weyl_dimension,
)
from hlwalk.group_algebra import tp_divexact

# |W|, number of positive roots and exponents-derived W(t) for the classical list
KNOWN = {
    ("A", 1): (2, 1), ("A", 2): (6, 3), ("A", 3): (24, 6), ("B", 2): (8, 4),
    ("B", 3): (48, 9), ("C", 2): (8, 4), ("C", 3): (48, 9), ("D", 4): (192, 12),
    ("G", 2): (12, 6), ("F", 4): (1152, 24),
}


@pytest.mark.parametrize("fam,rank", sorted(KNOWN))
def test_weyl_order_and_positive_roots(fam, rank):
    rs = build_root_system({"family": fam, "rank": rank})
    order, npos = KNOWN[(fam, rank)]
    assert rs.weyl_order == order
    assert len(rs.positive_roots) == npos == len(rs.positive_coroots)
    W = poincare_polynomial(rs)
    assert sum(W) == order
    assert len(W) - 1 == npos  # longest element has length |Phi+|


def test_poincare_products_of_exponents():
    # W(t) = prod (1 + t + ... + t^{e_i}) with exponents e_i
    def prod(exps):
        out = [1]
        for e in exps:
            new = [0] * (len(out) + e)
            for i, c in enumerate(out):
                for j in range(e + 1):
                    new[i + j] += c
            out = new
        return tuple(out)

    assert poincare_polynomial(build_root_system({"family": "A", "rank": 2})) == prod([1, 2])
    assert poincare_polynomial(build_root_system({"family": "C", "rank": 2})) == prod([1, 3])
    assert poincare_polynomial(build_root_system({"family": "G", "rank": 2})) == prod([1, 5])


def test_cartan_conventions():
    assert cartan_matrix("C", 2) == [[2, -1], [-2, 2]]
    assert cartan_matrix("G", 2) == [[2, -1], [-3, 2]]
    rs = build_root_system([[2, -1], [-3, 2]])
    assert len(rs.positive_roots) == 6 and rs.weyl_order == 12


def test_c2_rho_in_epsilon_coordinates(systems):
    # simple roots e1 - e2, 2 e2 ; rho = (2, 1)
    rs = systems["C2"]
    rho = rs.rho
    e = (np.array([1, -1]), np.array([0, 2]))
    vec = sum(Fraction(c) * v for c, v in zip(rho, e))
    assert [Fraction(x) for x in vec] == [2, 1]


def test_two_rho_vee_pairs_to_two(systems):
    for rs in systems.values():
        assert rs.pairings(rs.two_rho_vee) == (2,) * rs.rank


def test_invalid_cartan():
    with pytest.raises(CartanMatrixError):
        build_root_system([[2, 1], [-1, 2]])
    with pytest.raises(CartanMatrixError):
        build_root_system([[2, -1], [0, 2]])
    with pytest.raises(InfiniteTypeError):
        build_root_system([[2, -2], [-2, 2]])
    with pytest.raises(InfiniteTypeError):
        build_root_system([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_weyl_cap():
    with pytest.raises(WeylCapExceeded):
        build_root_system({"family": "F", "rank": 4}, weyl_cap=100)


def test_spec_json_roundtrip():
    for obj in ({"family": "B", "rank": 3}, {"cartan": [[2, -1], [-3, 2]]}):
        spec = CartanSpec.from_json(obj)
        assert CartanSpec.from_json(spec.to_json()) == spec


def test_weyl_group_invariants(systems):
    for rs in systems.values():
        mats = rs.weyl_matrices
        keys = {m.tobytes() for m in mats}
        assert len(keys) == rs.weyl_order
        for m in mats[:: max(1, len(mats) // 5)]:
            for r in rs.reflections:
                assert (m @ r).tobytes() in keys
        assert all(round(abs(np.linalg.det(m))) == 1 for m in mats)
        # sign is the determinant
        for m, l in zip(mats, rs.weyl_lengths):
            assert round(np.linalg.det(m)) == (-1) ** int(l)


def test_weyl_preserves_positive_coroot_set(systems):
    for rs in systems.values():
        coroots = set(rs.positive_coroots) | {tuple(-x for x in c) for c in rs.positive_coroots}
        for m in rs.weyl_matrices:
            for c in rs.positive_coroots:
                assert tuple(int(v) for v in m @ np.array(c)) in coroots


@given(st.integers(0, 4), st.integers(0, 4))
def test_stabilizer_divides_poincare(a, b):
    rs = build_root_system({"family": "C", "rank": 2})
    lam = (a, b)
    if not rs.is_dominant(lam):
        with pytest.raises(NotDominantError):
            stabilizer_poincare(rs, lam)
        return
    tp_divexact(poincare_polynomial(rs), stabilizer_poincare(rs, lam))


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_dominant_representative(nu):
    rs = build_root_system({"family": "G", "rank": 2})
    plus, w = dominant_representative(rs, nu)
    assert rs.is_dominant(plus)
    assert w.act(plus) == tuple(nu)
    assert dominance_leq(rs, tuple(nu), plus)


def test_dominance_and_height():
    assert height(None, (2, 3)) == 5
    assert dominance_leq(None, (0, 1), (1, 1))
    assert not dominance_leq(None, (2, 0), (1, 1))


def test_sufficiently_dominant(systems):
    for rs in systems.values():
        mu = rs.sufficiently_dominant(7)
        assert min(rs.pairings(mu)) >= 7


@pytest.mark.parametrize("label,lam,dim", [
    ("A1", (1,), 3), ("A2", (1, 1), 8), ("A2", (2, 1), 10), ("C2", (1, 1), 5),
    ("C2", (1, 2), 10), ("G2", (1, 2), 7), ("G2", (2, 3), 14),
])
def test_weyl_dimension_values(systems, label, lam, dim):
    # A2 coroot lattice: (1,1) adjoint, (2,1) = 3 omega_1; C2 coweights of the dual B2
    assert weyl_dimension(systems[label], lam) == dim
