"""Sparse arithmetic in the coweight group algebra with coefficients in Z[t].

A ``TPoly`` is a tuple of Python ints, ascending in powers of ``t`` with
trailing zeros trimmed (the zero polynomial is ``()``).  An
:class:`AlgebraElement` maps coweights to nonzero ``TPoly`` coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .root_system import Coweight, TPoly, WeylElement

Rational = Fraction | int

# -- polynomials in t --------------------------------------------------------

ZERO: TPoly = ()
ONE: TPoly = (1,)


def tp_trim(c: Sequence[int]) -> TPoly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def tp_add(a: TPoly, b: TPoly) -> TPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return tp_trim(out)


def tp_neg(a: TPoly) -> TPoly:
    return tuple(-x for x in a)


def tp_sub(a: TPoly, b: TPoly) -> TPoly:
    return tp_add(a, tp_neg(b))


def tp_scale(a: TPoly, k: int) -> TPoly:
    return tp_trim([k * x for x in a]) if k else ZERO


def tp_mul(a: TPoly, b: TPoly) -> TPoly:
    if not a or not b:
        return ZERO
    if len(a) == 1:
        return tp_scale(b, a[0])
    if len(b) == 1:
        return tp_scale(a, b[0])
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tp_trim(out)


def tp_eval(a: TPoly, t: Rational) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * t + c
    return acc


def tp_degree(a: TPoly) -> int:
    return len(a) - 1


def tp_divexact(a: TPoly, b: TPoly) -> TPoly:
    """Exact quotient ``a / b`` in Z[t]; raises ``ArithmeticError`` on a remainder."""
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        if rem:
            raise ArithmeticError(f"{a} is not divisible by {b}")
        return ZERO
    quot = [0] * (len(rem) - db)
    lead = b[-1]
    for k in range(len(quot) - 1, -1, -1):
        c = rem[k + db]
        if c % lead:
            raise ArithmeticError(f"{a} is not divisible by {b} over Z")
        c //= lead
        quot[k] = c
        if c:
            for j, y in enumerate(b):
                rem[k + j] -= c * y
    if any(rem):
        raise ArithmeticError(f"{a} is not divisible by {b}")
    return tp_trim(quot)


def tp_format(a: TPoly, var: str = "t") -> str:
    if not a:
        return "0"
    terms = []
    for k, c in enumerate(a):
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ")


# -- group algebra elements --------------------------------------------------


def _acc(d: dict, key, coeff: TPoly) -> None:
    cur = d.get(key)
    new = tp_add(cur, coeff) if cur is not None else coeff
    if new:
        d[key] = new
    elif cur is not None:
        del d[key]


class AlgebraElement:
    """Finitely supported map coweight -> TPoly, i.e. an element of Z[t][R^vee]."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Mapping[Coweight, TPoly] | None = None):
        self.rank = rank
        self.terms: dict[Coweight, TPoly] = {}
        for k, v in (terms or {}).items():
            k = tuple(int(x) for x in k)
            if len(k) != rank:
                raise ValueError(f"coweight {k} does not have rank {rank}")
            v = tp_trim(v)
            if v:
                self.terms[k] = v

    @classmethod
    def _raw(cls, rank: int, terms: dict) -> "AlgebraElement":
        obj = cls.__new__(cls)
        obj.rank = rank
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, cw: Sequence[int], coeff: TPoly = ONE) -> "AlgebraElement":
        return cls(len(cw), {tuple(cw): coeff})

    @classmethod
    def one(cls, rank: int) -> "AlgebraElement":
        return cls._raw(rank, {(0,) * rank: ONE})

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return AlgebraElement._raw(self.rank, out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement._raw(self.rank, {k: tp_neg(v) for k, v in self.terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                _acc(out, tuple(a + b for a, b in zip(k1, k2)), tp_mul(v1, v2))
        return AlgebraElement._raw(self.rank, out)

    def scale(self, c: TPoly) -> "AlgebraElement":
        c = tp_trim(c)
        if not c:
            return AlgebraElement(self.rank)
        return AlgebraElement._raw(self.rank, {k: tp_mul(v, c) for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement) and self.rank == other.rank
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, cw: Sequence[int]) -> TPoly:
        return self.terms.get(tuple(cw), ZERO)

    def __repr__(self) -> str:
        body = ", ".join(f"{list(k)}: {tp_format(v)}" for k, v in self.sorted_terms())
        return f"AlgebraElement({{{body}}})"

    def sorted_terms(self) -> list[tuple[Coweight, TPoly]]:
        """Terms in descending graded order (height, then lexicographic)."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def to_json(self) -> list[dict]:
        return [{"coweight": list(k), "coeff": list(v)} for k, v in self.sorted_terms()]

    @classmethod
    def from_json(cls, items: list[dict], rank: int | None = None) -> "AlgebraElement":
        if rank is None:
            if not items:
                raise ValueError("cannot infer rank of an empty element")
            rank = len(items[0]["coweight"])
        out: dict = {}
        for it in items:
            _acc(out, tuple(int(x) for x in it["coweight"]), tp_trim(int(c) for c in it["coeff"]))
        return cls._raw(rank, out)


def weyl_act(w: WeylElement | np.ndarray, a: AlgebraElement) -> AlgebraElement:
    """``w(e^lam) = e^{w lam}``, extended linearly."""
    m = w.array if isinstance(w, WeylElement) else np.asarray(w, dtype=np.int64)
    if not a.terms:
        return AlgebraElement(a.rank)
    keys = list(a.terms)
    images = np.asarray(keys, dtype=np.int64) @ m.T
    return AlgebraElement._raw(
        a.rank, {tuple(int(x) for x in img): a.terms[k] for k, img in zip(keys, images)})


class NotDivisibleError(ArithmeticError):
    def __init__(self, divisor: Coweight, residual: Coweight, coeff: TPoly):
        self.divisor = divisor
        self.residual = residual
        self.coeff = coeff
        super().__init__(f"not divisible by (1 - e^-{list(divisor)}): nonzero residual "
                         f"{tp_format(coeff)} at monomial e^{list(residual)}")


def divide_one_minus(terms: Mapping[Coweight, TPoly], beta: Sequence[int]) -> dict:
    """Exact quotient of ``terms`` by ``(1 - e^{-beta})`` as a raw dict.

    Leading-term elimination in descending graded order.  Elimination never
    mixes monomials from different cosets of ``Z beta``, so each line
    ``m + Z beta`` is swept on its own: the quotient at position ``k`` is the
    sum of the dividend at positions ``>= k``.
    """
    beta = tuple(beta)
    piv = next(i for i, b in enumerate(beta) if b)
    b = beta[piv]
    lines: dict[Coweight, list] = {}
    for m, c in terms.items():
        k = m[piv] // b
        rep = tuple(x - k * y for x, y in zip(m, beta))
        lines.setdefault(rep, []).append((k, c))
    out: dict = {}
    for rep, items in lines.items():
        items.sort(reverse=True)
        running: TPoly = ZERO
        prev_k = None
        for k, c in items:
            # fill positions between the previous term and this one with the running sum
            if running and prev_k is not None:
                for j in range(prev_k - 1, k, -1):
                    out[tuple(x + j * y for x, y in zip(rep, beta))] = running
            running = tp_add(running, c)
            if running:
                out[tuple(x + k * y for x, y in zip(rep, beta))] = running
            prev_k = k
        if running:
            k_last = items[-1][0]
            raise NotDivisibleError(beta, tuple(x + k_last * y for x, y in zip(rep, beta)), running)
    return out


def exact_divide(a: AlgebraElement, beta: Sequence[int]) -> AlgebraElement:
    """Quotient ``q`` with ``q * (1 - e^{-beta}) == a``; raises :class:`NotDivisibleError`."""
    if not any(beta):
        raise ValueError("beta must be nonzero")
    return AlgebraElement._raw(a.rank, divide_one_minus(a.terms, beta))


# -- specializations ---------------------------------------------------------


@dataclass(frozen=True)
class Specialization:
    """Multiplicative map coweight -> rational, given by its values on simple coroots."""

    generators: tuple[Fraction, ...]
    name: str = ""

    def __call__(self, cw: Sequence[int]) -> Fraction:
        out = Fraction(1)
        for g, k in zip(self.generators, cw):
            if k:
                out *= g ** k
        return out

    @classmethod
    def theta0(cls, rank: int) -> "Specialization":
        return cls((Fraction(1),) * rank, "theta0")

    @classmethod
    def principal(cls, rank: int, q: Rational) -> "Specialization":
        """``e^nu -> q^{<nu, rho>}``: every simple coroot goes to ``q``."""
        q = Fraction(q)
        return cls((q,) * rank, f"theta_q(q={q})")


def specialize(a: AlgebraElement, s: Specialization | Callable[[Coweight], Fraction],
               t_value: Rational) -> Fraction:
    """``sum_nu coeff_nu(t_value) * s(nu)`` in exact rational arithmetic."""
    t_value = Fraction(t_value)
    return sum((tp_eval(c, t_value) * s(k) for k, c in a.terms.items()), Fraction(0))


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def product_of(factors: Iterable[AlgebraElement], rank: int) -> AlgebraElement:
    out = AlgebraElement.one(rank)
    for f in factors:
        out = out * f
    return out
