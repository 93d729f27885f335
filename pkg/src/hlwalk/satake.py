"""Transition laws for singular numbers and corners, and Hecke structure constants.

Every quantity here is an exact rational for a fixed rational ``q > 1``; the
Hall-Littlewood parameter is always specialized at ``t = 1/q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .group_algebra import Specialization, specialize, tp_eval
from .hall_littlewood import hl_expand, lr_coefficients, poincare_ratio_at
from .root_system import Coweight, RootSystem, TPoly, build_root_system, height


def as_fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class ProbabilityContext:
    rs: RootSystem
    q: Fraction

    def __post_init__(self):
        q = as_fraction(self.q)
        if q <= 1:
            raise ValueError(f"q must exceed 1, got {q}")
        object.__setattr__(self, "q", q)

    @property
    def t(self) -> Fraction:
        return 1 / self.q

    @property
    def q_is_integer(self) -> bool:
        return self.q.denominator == 1


class InvalidDistribution(ValueError):
    pass


@dataclass(frozen=True)
class LatticeDistribution:
    """Finitely supported exact probability law on coweights."""

    support: Mapping[Coweight, Fraction]
    q: Fraction | None = None

    def __post_init__(self):
        clean = {}
        for k, p in self.support.items():
            p = as_fraction(p)
            if p < 0:
                raise InvalidDistribution(f"negative probability {p} at {list(k)}")
            if p:
                clean[tuple(int(x) for x in k)] = p
        if sum(clean.values(), Fraction(0)) != 1:
            raise InvalidDistribution(
                f"probabilities sum to {sum(clean.values(), Fraction(0))}, not 1")
        object.__setattr__(self, "support", clean)

    @classmethod
    def point_mass(cls, cw: Sequence[int], q=None) -> "LatticeDistribution":
        return cls({tuple(cw): Fraction(1)}, q)

    def __getitem__(self, cw: Sequence[int]) -> Fraction:
        return self.support.get(tuple(cw), Fraction(0))

    def __len__(self) -> int:
        return len(self.support)

    def items(self):
        return self.sorted_items()

    def sorted_items(self) -> list[tuple[Coweight, Fraction]]:
        return sorted(self.support.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def shift(self, by: Sequence[int]) -> "LatticeDistribution":
        return LatticeDistribution(
            {tuple(a + b for a, b in zip(k, by)): p for k, p in self.support.items()}, self.q)

    def mean(self) -> tuple[Fraction, ...]:
        n = len(next(iter(self.support)))
        return tuple(sum((p * k[i] for k, p in self.support.items()), Fraction(0))
                     for i in range(n))

    def expect(self, f) -> Fraction:
        return sum((p * Fraction(f(k)) for k, p in self.support.items()), Fraction(0))

    def to_json(self) -> dict:
        out: dict = {}
        if self.q is not None:
            out["q"] = str(self.q)
        out["support"] = [{"coweight": list(k), "p": str(p)} for k, p in self.sorted_items()]
        return out

    @classmethod
    def from_json(cls, obj: Mapping | list) -> "LatticeDistribution":
        """Accepts ``{"q":..., "support": [{"coweight":..., "p":...}]}`` or a bare atom list.

        Atoms may use ``"coweight"`` or the short key ``"cw"``.
        """
        if isinstance(obj, Mapping):
            q = as_fraction(obj["q"]) if "q" in obj else None
            atoms = obj["support"]
        else:
            q, atoms = None, obj
        sup: dict = {}
        for a in atoms:
            cw = tuple(int(x) for x in (a["coweight"] if "coweight" in a else a["cw"]))
            sup[cw] = sup.get(cw, Fraction(0)) + as_fraction(a["p"])
        return cls(sup, q)


def convolve(a: LatticeDistribution, b: LatticeDistribution) -> LatticeDistribution:
    out: dict = {}
    for k1, p1 in a.support.items():
        for k2, p2 in b.support.items():
            k = tuple(x + y for x, y in zip(k1, k2))
            out[k] = out.get(k, Fraction(0)) + p1 * p2
    return LatticeDistribution(out, a.q)


def mixture(weights: Iterable[tuple[Fraction, LatticeDistribution]]) -> LatticeDistribution:
    out: dict = {}
    q = None
    for w, d in weights:
        q = d.q if q is None else q
        for k, p in d.support.items():
            out[k] = out.get(k, Fraction(0)) + w * p
    return LatticeDistribution(out, q)


# -- closed forms ------------------------------------------------------------


def principal_specialization(ctx: ProbabilityContext, lam: Sequence[int]) -> Fraction:
    """``P_lam(theta; 1/q) = W(1/q) / W_lam(1/q) * q^{height(lam)}``."""
    lam = ctx.rs.require_dominant(lam)
    return poincare_ratio_at(ctx.rs, lam, ctx.t) * ctx.q ** height(ctx.rs, lam)


def direct_principal_specialization(ctx: ProbabilityContext, lam: Sequence[int]) -> Fraction:
    """Substitute ``e^nu -> q^{height(nu)}`` and ``t = 1/q`` into the expansion of ``P_lam``."""
    P = hl_expand(ctx.rs, lam).element()
    return specialize(P, Specialization.principal(ctx.rs.rank, ctx.q), ctx.t)


def orbit_volume(ctx: ProbabilityContext, lam: Sequence[int]) -> Fraction:
    """Number of left K-cosets in ``K pi_lam K``: ``q^{2 height} W(1/q) / W_lam(1/q)``."""
    lam = ctx.rs.require_dominant(lam)
    return ctx.q ** (2 * height(ctx.rs, lam)) * poincare_ratio_at(ctx.rs, lam, ctx.t)


def g_coefficient(ctx: ProbabilityContext, mu, nu, lam) -> Fraction:
    """Hecke structure constant ``q^{height(mu+nu-lam)} c_{mu,nu}^lam(1/q)``."""
    rs = ctx.rs
    mu, nu, lam = (rs.require_dominant(x, n) for x, n in ((mu, "mu"), (nu, "nu"), (lam, "lambda")))
    c = lr_coefficients(rs, mu, nu)[lam]
    gap = height(rs, mu) + height(rs, nu) - height(rs, lam)
    return ctx.q ** gap * tp_eval(c, ctx.t)


def g_polynomial(rs: RootSystem, mu, nu, lam) -> TPoly:
    """``g_{mu,nu}^lam`` as an integer polynomial in ``q``.

    With ``h = height(mu+nu-lam)``, ``q^h c(1/q)`` is the coefficient list of
    ``c`` reversed and padded to length ``h+1``; raises if ``deg c > h``.
    """
    c = lr_coefficients(rs, mu, nu)[lam]
    h = height(rs, mu) + height(rs, nu) - height(rs, lam)
    if not c:
        return ()
    if len(c) - 1 > h:
        raise ArithmeticError(f"deg c = {len(c) - 1} exceeds height gap {h}")
    padded = list(c) + [0] * (h + 1 - len(c))
    out = padded[::-1]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


# -- transition laws ---------------------------------------------------------


def product_transition(ctx: ProbabilityContext, mu, nu) -> LatticeDistribution:
    """Law of ``SN(AB)`` for bi-K-invariant ``A, B`` with ``SN(A) = mu``, ``SN(B) = nu``."""
    rs = ctx.rs
    mu = rs.require_dominant(mu, "mu")
    nu = rs.require_dominant(nu, "nu")
    table = lr_coefficients(rs, mu, nu)
    denom = principal_specialization(ctx, mu) * principal_specialization(ctx, nu)
    sup = {lam: tp_eval(c, ctx.t) * principal_specialization(ctx, lam) / denom
           for lam, c in table.coefficients.items()}
    return LatticeDistribution(sup, ctx.q)


def corners_distribution(ctx: ProbabilityContext, lam) -> LatticeDistribution:
    """Law of ``Cor(A)`` for bi-K-invariant ``A`` with ``SN(A) = lam``.

    ``P(nu | lam) = u_{lam,nu}(1/q) q^{height(nu)} / P_lam(theta; 1/q)`` over all
    coweights ``nu`` in the support of ``P_lam``.
    """
    rs = ctx.rs
    lam = rs.require_dominant(lam)
    norm = principal_specialization(ctx, lam)
    sup = {nu: tp_eval(u, ctx.t) * ctx.q ** height(rs, nu) / norm
           for nu, u in hl_expand(rs, lam).coefficients.items()}
    return LatticeDistribution(sup, ctx.q)


def expected_corner_height(ctx: ProbabilityContext, lam) -> Fraction:
    return corners_distribution(ctx, lam).expect(sum)


def corner_tail_mass(ctx: ProbabilityContext, lam, threshold: int) -> Fraction:
    """``P(height(lam - Cor) >= threshold)`` under the corners law of ``lam``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    lam = ctx.rs.require_dominant(lam)
    h = height(ctx.rs, lam)
    d = corners_distribution(ctx, lam)
    return sum((p for nu, p in d.support.items() if h - sum(nu) >= threshold), Fraction(0))


def monomial_mass(ctx: ProbabilityContext, lam) -> Fraction:
    """``sum_nu u_{lam,nu}(1/q)``, the quantity whose polynomial growth bounds the corner tails."""
    return sum((tp_eval(u, ctx.t) for u in hl_expand(ctx.rs, lam).coefficients.values()),
               Fraction(0))


def corners_via_dominant_shift(ctx: ProbabilityContext, lam, mu=None) -> tuple[Coweight, LatticeDistribution]:
    """``product_transition(mu, lam)`` shifted back by ``mu``, for a sufficiently dominant ``mu``.

    Default ``mu`` has every simple-root pairing at least ``2 height(lam) + 2``.
    """
    rs = ctx.rs
    lam = rs.require_dominant(lam)
    if mu is None:
        mu = rs.sufficiently_dominant(2 * height(rs, lam) + 2)
    mu = rs.require_dominant(mu, "mu")
    law = product_transition(ctx, mu, lam)
    return mu, law.shift(tuple(-x for x in mu))


def context(spec, q) -> ProbabilityContext:
    rs = spec if isinstance(spec, RootSystem) else build_root_system(spec)
    return ProbabilityContext(rs, as_fraction(q))
