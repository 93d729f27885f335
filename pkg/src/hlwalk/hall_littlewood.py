"""Hall-Littlewood polynomials over a finite root system and their structure constants."""

from __future__ import annotations

import random
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .group_algebra import (
    ONE,
    AlgebraElement,
    Specialization,
    divide_one_minus,
    specialize,
    tp_add,
    tp_divexact,
    tp_eval,
    tp_mul,
    tp_neg,
    _acc,
)
from .root_system import (
    Coweight,
    RootSystem,
    TPoly,
    poincare_polynomial,
    stabilizer_poincare,
)


@dataclass(frozen=True)
class HLExpansion:
    """Monomial expansion ``P_lam(t) = sum_nu u_{lam,nu}(t) e^nu`` over the full orbit support."""

    lam: Coweight
    coefficients: Mapping[Coweight, TPoly]
    dominant: Mapping[Coweight, TPoly] | None = None

    def __getitem__(self, nu: Sequence[int]) -> TPoly:
        return self.coefficients.get(tuple(nu), ())

    def element(self) -> AlgebraElement:
        return AlgebraElement._raw(len(self.lam), dict(self.coefficients))

    def dominant_part(self, rs: RootSystem) -> Mapping[Coweight, TPoly]:
        if self.dominant is not None:
            return self.dominant
        return {k: v for k, v in self.coefficients.items() if rs.is_dominant(k)}

    def to_json(self) -> dict:
        terms = sorted(self.coefficients.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
        return {"lambda": list(self.lam),
                "terms": [{"nu": list(k), "coeff": list(v)} for k, v in terms]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "HLExpansion":
        return cls(tuple(obj["lambda"]),
                   {tuple(t["nu"]): tuple(t["coeff"]) for t in obj["terms"]})


@dataclass(frozen=True)
class LRTable:
    """Nonzero ``c_{mu,nu}^lam(t)`` for ``P_mu P_nu = sum_lam c^lam P_lam``."""

    mu: Coweight
    nu: Coweight
    coefficients: Mapping[Coweight, TPoly]

    def __getitem__(self, lam: Sequence[int]) -> TPoly:
        return self.coefficients.get(tuple(lam), ())

    def to_json(self) -> dict:
        terms = sorted(self.coefficients.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
        return {"mu": list(self.mu), "nu": list(self.nu),
                "terms": [{"lambda": list(k), "coeff": list(v)} for k, v in terms]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "LRTable":
        return cls(tuple(obj["mu"]), tuple(obj["nu"]),
                   {tuple(t["lambda"]): tuple(t["coeff"]) for t in obj["terms"]})


# -- memo cache --------------------------------------------------------------


class _LRUCache:
    """Bounded insert-or-get cache; concurrent writers of the same key store equal values."""

    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            val = self._data.get(key)
            if val is not None:
                self._data.move_to_end(key)
            return val

    def put(self, key, val):
        with self._lock:
            self._data[key] = val
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self):
        with self._lock:
            self._data.clear()

    def __len__(self):
        return len(self._data)


_HL_CACHE = _LRUCache(512)


def clear_cache() -> None:
    _HL_CACHE.clear()


# -- P_lambda ----------------------------------------------------------------


def _numerator(rs: RootSystem, lam: Coweight) -> dict:
    """``sum_w eps(w) e^{w rho^vee - rho^vee} w(e^lam prod_{a>0}(1 - t e^{-a^vee}))``."""
    base: dict = {}
    for subset in product((0, 1), repeat=len(rs.positive_coroots)):
        exp = list(lam)
        for bit, a in zip(subset, rs.positive_coroots):
            if bit:
                for i, x in enumerate(a):
                    exp[i] -= x
        k = sum(subset)
        coeff = tuple([0] * k + [(-1) ** k])
        _acc(base, tuple(exp), coeff)
    keys = np.array(list(base), dtype=np.int64)
    coeffs = list(base.values())
    two_rho = np.array(rs.two_rho_vee, dtype=np.int64)
    mats = rs.weyl_matrices
    # rows: image of each exponent under each w, shifted by w rho^vee - rho^vee
    shifts = (mats @ two_rho - two_rho) // 2
    images = np.einsum("wij,kj->wki", mats, keys) + shifts[:, None, :]
    out: dict = {}
    for wi in range(len(mats)):
        neg = rs.weyl_lengths[wi] % 2 == 1
        for img, c in zip(images[wi].tolist(), coeffs):
            _acc(out, tuple(img), tp_neg(c) if neg else c)
    return out


def _hl_uncached(rs: RootSystem, lam: Coweight) -> HLExpansion:
    terms = _numerator(rs, lam)
    for beta in rs.positive_coroots:
        terms = divide_one_minus(terms, beta)
    w_lam = stabilizer_poincare(rs, lam)
    out = {}
    for k, v in terms.items():
        try:
            out[k] = tp_divexact(v, w_lam)
        except ArithmeticError as exc:
            raise ArithmeticError(
                f"internal error: coefficient of e^{list(k)} in W_lam(t) P_lam is not "
                f"divisible by W_lam(t)") from exc
    if out.get(lam) != ONE:
        raise ArithmeticError(f"internal error: P_{list(lam)} is not monic")
    return HLExpansion(lam, out, {k: v for k, v in out.items() if rs.is_dominant(k)})


def hl_expand(rs: RootSystem, lam: Sequence[int]) -> HLExpansion:
    """Hall-Littlewood polynomial ``P_lam(t)`` of a dominant coweight, memoized."""
    lam = rs.require_dominant(lam)
    key = (rs.label, id(rs), lam)
    hit = _HL_CACHE.get(key)
    if hit is not None:
        return hit
    res = _hl_uncached(rs, lam)
    _HL_CACHE.put(key, res)
    return res


# -- Littlewood-Richardson coefficients ---------------------------------------


def _order_key(cw: Coweight):
    return (sum(cw), cw)


def _box(top: Coweight):
    return product(*(range(x + 1) for x in top))


def dominant_product_part(rs: RootSystem, P_mu: HLExpansion, P_nu: HLExpansion) -> dict:
    """Coefficients of ``P_mu P_nu`` at dominant exponents only.

    Dominant exponents of the product lie in the box ``0 <= eta <= mu + nu``.
    """
    big, small = (P_mu, P_nu) if len(P_mu.coefficients) >= len(P_nu.coefficients) else (P_nu, P_mu)
    top = tuple(a + b for a, b in zip(P_mu.lam, P_nu.lam))
    out: dict = {}
    bc = big.coefficients
    for eta in _box(top):
        if not rs.is_dominant(eta):
            continue
        acc = ()
        for zeta, b in small.coefficients.items():
            a = bc.get(tuple(x - y for x, y in zip(eta, zeta)))
            if a is not None:
                acc = tp_add(acc, tp_mul(a, b))
        if acc:
            out[eta] = acc
    return out


def peel(rs: RootSystem, remainder: dict) -> dict[Coweight, TPoly]:
    """Expand a W-invariant element, given by its dominant coefficients, in the P basis.

    Repeatedly takes the top remaining exponent in (height, lex) order, which is
    dominance-maximal, records its coefficient and subtracts that multiple of
    ``P_kappa``.
    """
    remainder = dict(remainder)
    out: dict = {}
    prev = None
    while remainder:
        kappa = max(remainder, key=_order_key)
        if prev is not None and not _order_key(kappa) < _order_key(prev):
            raise RuntimeError(f"peeling did not descend: {list(kappa)} after {list(prev)}")
        prev = kappa
        c = remainder[kappa]
        out[kappa] = c
        for eta, u in hl_expand(rs, kappa).dominant_part(rs).items():
            _acc(remainder, eta, tp_neg(tp_mul(c, u)))
    return out


def lr_coefficients(rs: RootSystem, mu: Sequence[int], nu: Sequence[int]) -> LRTable:
    """Structure constants ``c_{mu,nu}^lam(t)`` of ``P_mu P_nu`` in the P basis.

    Since both sides are W-invariant, only the coefficients at dominant
    exponents are needed to peel off the P-expansion.
    """
    mu = rs.require_dominant(mu, "mu")
    nu = rs.require_dominant(nu, "nu")
    dom = dominant_product_part(rs, hl_expand(rs, mu), hl_expand(rs, nu))
    return LRTable(mu, nu, peel(rs, dom))


# -- independent numeric check -----------------------------------------------


@dataclass
class OracleCheckReport:
    lam: Coweight
    trials: int
    agreements: int
    resamples: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return self.agreements == self.trials and not self.mismatches


def raw_hl_value(rs: RootSystem, lam: Sequence[int], t0: Fraction,
                 x: Sequence[Fraction]) -> Fraction:
    """Evaluate the symmetrized rational sum defining ``P_lam`` at one point.

    ``x[i]`` is the value of ``e^{alpha_i^vee}``.  Raises ``ZeroDivisionError``
    at a pole.
    """
    spec = Specialization(tuple(Fraction(v) for v in x))
    total = Fraction(0)
    lam = np.asarray(lam, dtype=np.int64)
    pos = np.asarray(rs.positive_coroots, dtype=np.int64)
    for m in rs.weyl_matrices:
        term = spec(tuple(int(v) for v in m @ lam))
        for a in pos:
            y = spec(tuple(int(-v) for v in m @ a))
            term *= (1 - t0 * y) / (1 - y)
        total += term
    w_lam = tp_eval(stabilizer_poincare(rs, tuple(int(v) for v in lam)), t0)
    return total / w_lam


def numeric_oracle_check(rs: RootSystem, lam: Sequence[int], trials: int = 10,
                         seed: int = 0, max_retries: int = 100) -> OracleCheckReport:
    """Compare :func:`hl_expand` against direct evaluation at random rational points."""
    lam = rs.require_dominant(lam)
    P = hl_expand(rs, lam).element()
    rng = random.Random(seed)
    agree = 0
    resamples = 0
    mismatches = []
    for _ in range(trials):
        for _attempt in range(max_retries):
            t0 = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            x = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
                 for _ in range(rs.rank)]
            try:
                lhs = raw_hl_value(rs, lam, t0, x)
            except ZeroDivisionError:
                resamples += 1
                continue
            break
        else:
            raise RuntimeError("could not find a pole-free sample point")
        rhs = specialize(P, Specialization(tuple(x)), t0)
        if lhs == rhs:
            agree += 1
        else:
            mismatches.append((t0, tuple(x), lhs, rhs))
    return OracleCheckReport(lam, trials, agree, resamples, mismatches)


def poincare_ratio_at(rs: RootSystem, lam: Coweight, t: Fraction) -> Fraction:
    """``W(t) / W_lam(t)`` evaluated exactly."""
    return tp_eval(poincare_polynomial(rs), t) / tp_eval(stabilizer_poincare(rs, lam), t)
