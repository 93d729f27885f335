"""Brute-force ground truth in type A: Haar matrices in SL_{n+1} over truncated p-adics.

A :class:`PadicMatrix` is stored as ``p^{-scale} * E`` with ``E`` an integer
matrix known modulo ``p^N``.  Valuations below ``N`` read off ``E`` are exact;
anything that would need more digits raises :class:`PrecisionExhausted`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from .root_system import Coweight, build_root_system, height
from .satake import LatticeDistribution, ProbabilityContext, corners_distribution, product_transition


class PrecisionExhausted(ArithmeticError):
    """A valuation could not be resolved at the working precision; raise ``N``."""


def valuation(x: int, p: int, cap: int | None = None) -> int:
    """p-adic valuation of an integer; ``cap`` (or infinity) for zero."""
    if x == 0:
        if cap is None:
            raise ValueError("valuation of 0")
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


@dataclass(frozen=True)
class PadicScalar:
    """``p^valuation * unit`` with ``unit`` a p-adic unit known mod ``p^N``, or exact zero."""

    p: int
    N: int
    valuation: int = 0
    unit: int = 1
    is_zero: bool = False

    def __post_init__(self):
        if not self.is_zero and self.unit % self.p == 0:
            raise ValueError("unit part must be prime to p")

    @classmethod
    def from_int(cls, x: int, p: int, N: int, valuation_shift: int = 0) -> "PadicScalar":
        """Scalar ``p^{-valuation_shift} * x`` where ``x`` is known mod ``p^N``."""
        x %= p**N
        if x == 0:
            return cls(p, N, is_zero=True)
        v = valuation(x, p)
        return cls(p, N - v, v - valuation_shift, x // p**v % p ** (N - v))

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        if self.is_zero or other.is_zero:
            return PadicScalar(self.p, min(self.N, other.N), is_zero=True)
        prec = min(self.N, other.N)
        return PadicScalar(self.p, prec, self.valuation + other.valuation,
                           self.unit * other.unit % self.p**prec)

    def inverse(self) -> "PadicScalar":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero")
        return PadicScalar(self.p, self.N, -self.valuation, pow(self.unit, -1, self.p**self.N))

    def __repr__(self) -> str:
        if self.is_zero:
            return f"O({self.p}^{self.N})"
        return f"{self.p}^{self.valuation}*{self.unit} (+O)"


def _det(M: list[list[int]]) -> int:
    """Exact integer determinant by Bareiss elimination."""
    A = [row[:] for row in M]
    n = len(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


@dataclass(frozen=True)
class PadicMatrix:
    entries: tuple[tuple[int, ...], ...]
    p: int
    N: int
    scale: int = 0

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @classmethod
    def from_rows(cls, rows, p: int, N: int, scale: int = 0) -> "PadicMatrix":
        mod = p**N
        return cls(tuple(tuple(int(x) % mod for x in r) for r in rows), p, N, scale)

    @classmethod
    def diagonal(cls, vals: Sequence[int], p: int, N: int) -> "PadicMatrix":
        """``diag(p^{vals[0]}, ...)``, scaled to be integral."""
        m = max(0, -min(vals))
        n = len(vals)
        rows = [[p ** (vals[i] + m) if i == j else 0 for j in range(n)] for i in range(n)]
        return cls.from_rows(rows, p, N, m)

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        if (self.p, self.N) != (other.p, other.N):
            raise ValueError("precision or prime mismatch")
        mod = self.modulus
        cols = list(zip(*other.entries))
        rows = tuple(tuple(sum(a * b for a, b in zip(r, c)) % mod for c in cols)
                     for r in self.entries)
        return PadicMatrix(rows, self.p, self.N, self.scale + other.scale)

    def scalar(self, i: int, j: int) -> PadicScalar:
        return PadicScalar.from_int(self.entries[i][j], self.p, self.N, self.scale)

    def det_mod(self) -> int:
        return _det([list(r) for r in self.entries]) % self.modulus


# -- coordinates -------------------------------------------------------------


def valuations_to_coweight(vals: Sequence[int]) -> Coweight:
    """Diagonal valuations summing to 0 -> coroot coordinates (partial sums)."""
    if sum(vals) != 0:
        raise ValueError(f"valuations {list(vals)} do not sum to 0")
    out, acc = [], 0
    for v in vals[:-1]:
        acc += v
        out.append(acc)
    return tuple(out)


def coweight_to_valuations(cw: Sequence[int]) -> tuple[int, ...]:
    c = [0, *cw, 0]
    return tuple(c[i + 1] - c[i] for i in range(len(c) - 1))


def pi_matrix(cw: Sequence[int], p: int, N: int) -> PadicMatrix:
    return PadicMatrix.diagonal(coweight_to_valuations(cw), p, N)


# -- sampling ----------------------------------------------------------------


def haar_sample_sl(n: int, p: int, N: int, rng: np.random.Generator) -> PadicMatrix:
    """Uniform element of ``SL_{n+1}(Z / p^N)``.

    Draws a uniform matrix until its determinant is a unit, then rescales the
    first row by the inverse determinant; det fibres are equinumerous so the
    result is uniform on SL.
    """
    mod = p**N
    size = n + 1
    while True:
        if mod < 2**62:
            raw = rng.integers(0, mod, size=(size, size)).tolist()
        else:
            raw = [[_uniform_below(rng, mod) for _ in range(size)] for _ in range(size)]
        d = _det(raw) % mod
        if d % p:
            break
    inv = pow(d, -1, mod)
    raw[0] = [x * inv % mod for x in raw[0]]
    return PadicMatrix(tuple(tuple(r) for r in raw), p, N, 0)


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    bits = bound.bit_length()
    words = -(-bits // 32)
    while True:
        x = 0
        for w in rng.integers(0, 2**32, size=words, dtype=np.uint64).tolist():
            x = (x << 32) | int(w)
        x >>= words * 32 - bits
        if x < bound:
            return x


# -- invariants of a matrix --------------------------------------------------


def elementary_valuations(A: PadicMatrix, guard: int = 0) -> list[int]:
    """Valuations of the elementary divisors of the integral part ``E``, ascending.

    Gaussian elimination with a minimal-valuation pivot at each step.
    """
    p, N = A.p, A.N
    mod = A.modulus
    M = [list(r) for r in A.entries]
    n = len(M)
    m = len(M[0])
    out = []
    for k in range(min(n, m)):
        best = None
        for i in range(k, n):
            for j in range(k, m):
                v = valuation(M[i][j], p, N)
                if best is None or v < best[0]:
                    best = (v, i, j)
                    if v == 0:
                        break
            if best[0] == 0:
                break
        v, i, j = best
        if v >= N - guard:
            raise PrecisionExhausted(f"pivot valuation >= {N - guard} at step {k}")
        M[k], M[i] = M[i], M[k]
        for row in M:
            row[k], row[j] = row[j], row[k]
        pk = p**v
        unit_inv = pow(M[k][k] // pk, -1, mod)
        for i2 in range(k + 1, n):
            if M[i2][k]:
                f = (M[i2][k] // pk) * unit_inv % mod
                M[i2] = [(a - f * b) % mod for a, b in zip(M[i2], M[k])]
        out.append(v)
    return out


def snf_coweight(A: PadicMatrix, guard: int = 0) -> Coweight:
    """Singular numbers of ``A`` in SL_{n+1}(F) as a dominant coweight."""
    vals = [v - A.scale for v in elementary_valuations(A, guard)]
    vals.sort(reverse=True)
    if sum(vals) != 0:
        raise PrecisionExhausted(f"singular numbers {vals} do not sum to 0")
    return valuations_to_coweight(vals)


def min_minor_valuation(rows: Sequence[Sequence[int]], p: int, N: int, guard: int = 0) -> int:
    """Valuation of the gcd of the maximal minors of a wide integral matrix."""
    k = len(rows)
    best = N
    for cols in combinations(range(len(rows[0])), k):
        d = _det([[r[c] for c in cols] for r in rows]) % p**N
        if d:
            best = min(best, valuation(d, p, N))
            if best == 0:
                break
    if best >= N - guard:
        raise PrecisionExhausted(f"all {k}x{k} minors vanish to order {N - guard}")
    return best


def corners_coweight(A: PadicMatrix, guard: int = 0) -> Coweight:
    """Corners of ``A``: ``nu_i = s_i - s_{i+1}`` where ``s_i`` is the total singular
    number of the bottom rows ``i..n+1``, read off the gcd of maximal minors."""
    size = A.size
    s = [0] * (size + 1)
    for i in range(size):
        rows = A.entries[i:]
        k = len(rows)
        s[i] = min_minor_valuation(rows, A.p, A.N, guard) - k * A.scale
    if s[0] != 0:
        raise PrecisionExhausted(f"determinant valuation {s[0]} != 0")
    return valuations_to_coweight([s[i] - s[i + 1] for i in range(size)])


# -- validation runs ---------------------------------------------------------


def default_precision(lam: Sequence[int], mu: Sequence[int] = ()) -> int:
    return 8 * (1 + height(None, lam) + height(None, mu))


@dataclass
class OracleReport:
    kind: str
    n: int
    p: int
    N: int
    samples: int
    counts: dict[Coweight, int]
    exact: LatticeDistribution
    precision_failures: int = 0
    z_scores: dict[Coweight, float] = field(default_factory=dict)
    chi2: float = 0.0
    chi2_pvalue: float = 1.0

    def __post_init__(self):
        self._score()

    @property
    def valid(self) -> int:
        return sum(self.counts.values())

    @property
    def frequencies(self) -> dict[Coweight, Fraction]:
        tot = self.valid
        return {k: Fraction(c, tot) for k, c in self.counts.items()} if tot else {}

    def _score(self):
        n = self.valid
        atoms = set(self.counts) | set(self.exact.support)
        self.z_scores = {}
        chi2 = 0.0
        for a in sorted(atoms):
            p = float(self.exact[a])
            ph = self.counts.get(a, 0) / n if n else 0.0
            sd = math.sqrt(ph * (1 - ph) / n) if n else 0.0
            if sd > 0:
                z = (ph - p) / sd
            else:
                z = 0.0 if ph == p else math.inf
            self.z_scores[a] = z
            if p > 0:
                chi2 += (self.counts.get(a, 0) - n * p) ** 2 / (n * p)
            elif self.counts.get(a, 0):
                chi2 = math.inf
        self.chi2 = chi2
        dof = max(1, len(self.exact.support) - 1)
        self.chi2_pvalue = float(stats.chi2.sf(chi2, dof)) if math.isfinite(chi2) else 0.0

    @property
    def max_abs_z(self) -> float:
        return max((abs(z) for z in self.z_scores.values()), default=0.0)

    def passed(self, z_limit: float = 3.0) -> bool:
        return self.precision_failures == 0 and self.max_abs_z < z_limit

    def to_json(self) -> dict:
        freq = self.frequencies
        atoms = sorted(set(self.counts) | set(self.exact.support),
                       key=lambda k: (sum(k), k), reverse=True)
        return {
            "kind": self.kind, "n": self.n, "p": self.p, "N": self.N,
            "samples": self.samples, "precision_failures": self.precision_failures,
            "atoms": [{"coweight": list(a), "count": self.counts.get(a, 0),
                       "frequency": str(freq.get(a, Fraction(0))),
                       "exact": str(self.exact[a]),
                       "z": _finite(self.z_scores[a])} for a in atoms],
            "chi2": _finite(self.chi2), "chi2_pvalue": self.chi2_pvalue,
            "max_abs_z": _finite(self.max_abs_z), "passed": self.passed(),
        }


def _finite(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _block_rngs(seed: int, samples: int, block: int) -> Iterator[tuple[np.random.Generator, int]]:
    ss = np.random.SeedSequence(seed)
    nblocks = -(-samples // block)
    for b, child in enumerate(ss.spawn(nblocks)):
        yield np.random.Generator(np.random.Philox(child)), min(block, samples - b * block)


def _run(kind, sample_fn, samples, seed, threads, block, on_sample=None):
    counts: dict = {}
    failures = 0

    def work(args):
        rng, cnt = args
        out = []
        for _ in range(cnt):
            try:
                out.append(sample_fn(rng))
            except PrecisionExhausted:
                out.append(None)
        return out

    blocks = list(_block_rngs(seed, samples, block))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    idx = 0
    for res in results:
        for cw in res:
            if on_sample is not None:
                on_sample(idx, cw)
            idx += 1
            if cw is None:
                failures += 1
            else:
                counts[cw] = counts.get(cw, 0) + 1
    return counts, failures


def validate_corners(n: int, p: int, N: int | None, lam: Sequence[int], samples: int,
                     seed: int = 0, threads: int = 1, block: int = 10_000,
                     on_sample=None) -> OracleReport:
    """Empirical law of ``Cor(U pi_lam V)`` against the exact corners law at ``q = p``."""
    lam = tuple(lam)
    rs = build_root_system({"family": "A", "rank": n})
    exact = corners_distribution(ProbabilityContext(rs, Fraction(p)), lam)
    N = N or default_precision(lam)
    D = pi_matrix(lam, p, N)

    def one(rng):
        A = haar_sample_sl(n, p, N, rng) @ D @ haar_sample_sl(n, p, N, rng)
        return corners_coweight(A)

    counts, fails = _run("corners", one, samples, seed, threads, block, on_sample)
    return OracleReport("corners", n, p, N, samples, counts, exact, fails)


def validate_products(n: int, p: int, N: int | None, lam: Sequence[int], mu: Sequence[int],
                      samples: int, seed: int = 0, threads: int = 1, block: int = 10_000,
                      on_sample=None) -> OracleReport:
    """Empirical law of ``SN(U pi_mu V U' pi_lam V')`` against :func:`product_transition`."""
    lam, mu = tuple(lam), tuple(mu)
    rs = build_root_system({"family": "A", "rank": n})
    exact = product_transition(ProbabilityContext(rs, Fraction(p)), mu, lam)
    N = N or default_precision(lam, mu)
    Dm, Dl = pi_matrix(mu, p, N), pi_matrix(lam, p, N)

    def one(rng):
        U, V, U2, V2 = (haar_sample_sl(n, p, N, rng) for _ in range(4))
        return snf_coweight(U @ Dm @ V @ U2 @ Dl @ V2)

    counts, fails = _run("product", one, samples, seed, threads, block, on_sample)
    return OracleReport("product", n, p, N, samples, counts, exact, fails)
