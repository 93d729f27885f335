"""Finite root systems built from Cartan data.

Coweights live in the simple-coroot basis throughout: a coweight is an integer
vector ``c`` standing for ``sum_i c[i] * alpha_i^vee``.  With the Cartan
convention ``C[i][j] = <alpha_j^vee, alpha_i>`` the pairing of a coweight with
the simple roots is ``C @ c`` and the simple reflection ``s_i`` acts on
coweights by ``c -> c - (C @ c)[i] * e_i``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Coweight = tuple[int, ...]
TPoly = tuple[int, ...]

DEFAULT_WEYL_CAP = 10**6


class CartanMatrixError(ValueError):
    """The input is not a valid (symmetrizable, generalized) Cartan matrix."""


class InfiniteTypeError(ValueError):
    """The Cartan matrix is valid but not of finite type."""


class WeylCapExceeded(RuntimeError):
    """Weyl group enumeration ran past the configured element cap."""


class NotDominantError(ValueError):
    """A coweight that must be dominant is not."""


# -- Cartan data -------------------------------------------------------------


def _simple_roots(family: str, rank: int) -> list[tuple[Fraction, ...]]:
    n = rank
    half = Fraction(1, 2)

    def e(i: int, dim: int) -> list[Fraction]:
        v = [Fraction(0)] * dim
        v[i] = Fraction(1)
        return v

    def sub(a, b):
        return tuple(x - y for x, y in zip(a, b))

    def add(a, b):
        return tuple(x + y for x, y in zip(a, b))

    if family == "A":
        return [sub(e(i, n + 1), e(i + 1, n + 1)) for i in range(n)]
    if family in "BCD":
        roots = [sub(e(i, n), e(i + 1, n)) for i in range(n - 1)]
        if family == "B":
            roots.append(tuple(e(n - 1, n)))
        elif family == "C":
            roots.append(tuple(2 * x for x in e(n - 1, n)))
        else:
            roots.append(add(e(n - 2, n), e(n - 1, n)))
        return roots
    if family == "F":
        return [
            sub(e(1, 4), e(2, 4)),
            sub(e(2, 4), e(3, 4)),
            tuple(e(3, 4)),
            (half, -half, -half, -half),
        ]
    if family == "G":
        return [
            (Fraction(1), Fraction(-1), Fraction(0)),
            (Fraction(-2), Fraction(1), Fraction(1)),
        ]
    raise CartanMatrixError(f"unknown family {family!r}")


def _e_cartan(rank: int) -> list[list[int]]:
    # Bourbaki labels: chain 1-3-4-5-...-rank, node 2 attached to node 4.
    edges = [(1, 3), (3, 4), (2, 4)] + [(k, k + 1) for k in range(4, rank)]
    C = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    for a, b in edges:
        C[a - 1][b - 1] = C[b - 1][a - 1] = -1
    return C


def cartan_matrix(family: str, rank: int) -> list[list[int]]:
    """Cartan matrix of a classical or exceptional family.

    Entries follow ``C[i][j] = 2 (alpha_i, alpha_j) / (alpha_j, alpha_j)``.
    """
    family = family.upper()
    if rank < 1:
        raise CartanMatrixError("rank must be positive")
    allowed = {"E": (6, 7, 8), "F": (4,), "G": (2,)}
    if family in allowed and rank not in allowed[family]:
        raise CartanMatrixError(f"{family}{rank} is not a root system")
    if family == "D" and rank < 2:
        raise CartanMatrixError("D_n needs n >= 2")
    if family == "E":
        return _e_cartan(rank)
    roots = _simple_roots(family, rank)

    def ip(a, b):
        return sum(x * y for x, y in zip(a, b))

    C = []
    for a in roots:
        row = []
        for b in roots:
            v = 2 * ip(a, b) / ip(b, b)
            assert v.denominator == 1
            row.append(int(v))
        C.append(row)
    return C


def _symmetrizer(C: np.ndarray) -> list[Fraction]:
    """Solve ``C[i][j] d[j] = C[j][i] d[i]``, normalized so each component's max is 1."""
    n = len(C)
    d: list[Fraction | None] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        comp = [start]
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if i == j or C[i][j] == 0:
                    continue
                dj = Fraction(int(C[j][i])) * d[i] / int(C[i][j])
                if d[j] is None:
                    d[j] = dj
                    comp.append(j)
                    queue.append(j)
                elif d[j] != dj:
                    raise CartanMatrixError("Cartan matrix is not symmetrizable")
        top = max(d[i] for i in comp)
        for i in comp:
            d[i] = d[i] / top
    return d  # type: ignore[return-value]


def _is_positive_definite(B: list[list[Fraction]]) -> bool:
    M = [row[:] for row in B]
    n = len(M)
    for k in range(n):
        if M[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = M[i][k] / M[k][k]
            for j in range(k, n):
                M[i][j] -= f * M[k][j]
    return True


def validate_cartan(matrix: Sequence[Sequence[int]]) -> np.ndarray:
    C = np.array(matrix, dtype=np.int64)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise CartanMatrixError("Cartan matrix must be square and non-empty")
    n = C.shape[0]
    for i in range(n):
        if C[i, i] != 2:
            raise CartanMatrixError(f"diagonal entry C[{i}][{i}] = {C[i, i]} != 2")
        for j in range(n):
            if i != j and C[i, j] > 0:
                raise CartanMatrixError(f"off-diagonal entry C[{i}][{j}] > 0")
            if (C[i, j] == 0) != (C[j, i] == 0):
                raise CartanMatrixError(f"C[{i}][{j}] and C[{j}][{i}] must vanish together")
    return C


# -- Weyl group elements -----------------------------------------------------


@dataclass(frozen=True)
class WeylElement:
    """Integer matrix acting on coroot coordinates, with cached length and sign."""

    matrix: tuple[tuple[int, ...], ...]
    length: int
    sign: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sign", -1 if self.length % 2 else 1)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def act(self, cw: Sequence[int]) -> Coweight:
        return tuple(sum(r * x for r, x in zip(row, cw)) for row in self.matrix)

    def is_identity(self) -> bool:
        return self.length == 0


@dataclass(frozen=True)
class CartanSpec:
    """Either ``(family, rank)`` or an explicit Cartan ``matrix``."""

    family: str | None = None
    rank: int | None = None
    matrix: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def from_json(cls, obj: Mapping) -> "CartanSpec":
        keys = set(obj)
        if keys == {"family", "rank"}:
            return cls(family=str(obj["family"]).upper(), rank=int(obj["rank"]))
        if keys == {"cartan"}:
            return cls(matrix=tuple(tuple(int(x) for x in row) for row in obj["cartan"]))
        raise CartanMatrixError(
            'expected {"family": ..., "rank": ...} or {"cartan": [[...]]}, got keys '
            f"{sorted(keys)}"
        )

    def to_json(self) -> dict:
        if self.matrix is not None:
            return {"cartan": [list(r) for r in self.matrix]}
        return {"family": self.family, "rank": self.rank}

    def cartan(self) -> list[list[int]]:
        if self.matrix is not None:
            return [list(r) for r in self.matrix]
        if self.family is None or self.rank is None:
            raise CartanMatrixError("CartanSpec needs family and rank, or a matrix")
        return cartan_matrix(self.family, self.rank)

    @property
    def label(self) -> str:
        if self.matrix is not None:
            return "cartan" + str([list(r) for r in self.matrix]).replace(" ", "")
        return f"{self.family}{self.rank}"


# -- the root system ---------------------------------------------------------


class RootSystem:
    """Finite crystallographic root system with its fully enumerated Weyl group.

    Instances are immutable after construction; build them with
    :func:`build_root_system`.
    """

    def __init__(self, cartan: Sequence[Sequence[int]], weyl_cap: int = DEFAULT_WEYL_CAP,
                 label: str | None = None):
        C = validate_cartan(cartan)
        n = C.shape[0]
        self.cartan = C
        self.cartan.setflags(write=False)
        self._rows = tuple(tuple(int(x) for x in row) for row in C)
        self.rank = n
        self.label = label or "cartan" + str(C.tolist()).replace(" ", "")
        self.symmetrizer = _symmetrizer(C)
        # Gram matrix of simple roots: (alpha_i, alpha_j) = C[i][j] * d[j].
        self.gram = [[Fraction(int(C[i, j])) * self.symmetrizer[j] for j in range(n)]
                     for i in range(n)]
        if not _is_positive_definite(self.gram):
            raise InfiniteTypeError("Cartan matrix is not of finite type")

        eye = np.eye(n, dtype=np.int64)
        # s_i on coweights: c -> c - (C c)_i e_i
        self.reflections = [eye - np.outer(eye[i], C[i]) for i in range(n)]
        # s_i on roots (root basis): a -> a - <alpha_i^vee, a> e_i = a - (C^T a)_i e_i
        self._root_reflections = [eye - np.outer(eye[i], C[:, i]) for i in range(n)]

        self.positive_coroots = _positive_closure(self.reflections, n)
        self.positive_roots = _positive_closure(self._root_reflections, n)
        if len(self.positive_coroots) != len(self.positive_roots):
            raise CartanMatrixError("root and coroot counts disagree")

        self._weyl_mats, self._weyl_lengths = _enumerate_weyl(self.reflections, weyl_cap)
        self._weyl_mats.setflags(write=False)
        self._weyl_index = {m.tobytes(): k for k, m in enumerate(self._weyl_mats)}

        two_rho_vee = np.sum(np.array(self.positive_coroots, dtype=np.int64), axis=0)
        self.two_rho_vee: Coweight = tuple(int(x) for x in two_rho_vee)
        two_rho = np.sum(np.array(self.positive_roots, dtype=np.int64), axis=0)
        self.two_rho: tuple[int, ...] = tuple(int(x) for x in two_rho)

    def __repr__(self) -> str:
        return f"RootSystem({self.label}, |W|={self.weyl_order})"

    # basic data

    @property
    def weyl_order(self) -> int:
        return len(self._weyl_mats)

    @property
    def weyl_matrices(self) -> np.ndarray:
        """All Weyl group matrices, shape ``(|W|, n, n)``, in BFS (length) order."""
        return self._weyl_mats

    @property
    def weyl_lengths(self) -> np.ndarray:
        return self._weyl_lengths

    @property
    def rho_vee(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, 2) for x in self.two_rho_vee)

    @property
    def rho(self) -> tuple[Fraction, ...]:
        """Weyl vector in the simple-root basis."""
        return tuple(Fraction(x, 2) for x in self.two_rho)

    @cached_property
    def _weyl_elements(self) -> tuple[WeylElement, ...]:
        return tuple(
            WeylElement(tuple(tuple(int(x) for x in row) for row in m), int(l))
            for m, l in zip(self._weyl_mats, self._weyl_lengths)
        )

    def weyl_element(self, matrix: np.ndarray) -> WeylElement:
        k = self._weyl_index[np.asarray(matrix, dtype=np.int64).tobytes()]
        return self._weyl_elements[k]

    @property
    def identity(self) -> WeylElement:
        return self._weyl_elements[0]

    # pairings

    def pairings(self, cw: Sequence[int]) -> tuple[int, ...]:
        """``<cw, alpha_i>`` for each simple root."""
        return tuple(sum(a * b for a, b in zip(row, cw)) for row in self._rows)

    def pair_root(self, cw: Sequence[int], root: Sequence[int]) -> int:
        """Natural pairing of a coweight with a root given in the simple-root basis."""
        return int(np.asarray(root, dtype=np.int64) @ self.cartan @ np.asarray(cw, dtype=np.int64))

    def inner(self, x: Sequence, y: Sequence) -> Fraction:
        """Euclidean inner product of two vectors given in the simple-root basis."""
        return sum((Fraction(a) * self.gram[i][j] * Fraction(b)
                    for i, a in enumerate(x) for j, b in enumerate(y)), Fraction(0))

    def coweight_to_root_basis(self, cw: Sequence) -> tuple[Fraction, ...]:
        """Embed a coweight in V: ``alpha_i^vee = alpha_i / d_i``."""
        return tuple(Fraction(c) / d for c, d in zip(cw, self.symmetrizer))

    def is_dominant(self, cw: Sequence[int]) -> bool:
        for row in self._rows:
            if sum(a * b for a, b in zip(row, cw)) < 0:
                return False
        return True

    def require_dominant(self, cw: Sequence[int], what: str = "coweight") -> Coweight:
        cw = self.coweight(cw)
        if not self.is_dominant(cw):
            raise NotDominantError(f"{what} {list(cw)} is not dominant "
                                   f"(pairings {list(self.pairings(cw))})")
        return cw

    def coweight(self, cw: Iterable[int]) -> Coweight:
        cw = tuple(int(x) for x in cw)
        if len(cw) != self.rank:
            raise ValueError(f"coweight {list(cw)} has length {len(cw)}, rank is {self.rank}")
        return cw

    def reflect(self, i: int, cw: Sequence[int]) -> Coweight:
        p = self.pairings(cw)[i]
        out = list(cw)
        out[i] -= p
        return tuple(out)

    def dominant_coweights(self, max_height: int) -> list[Coweight]:
        """Dominant coweights of height at most ``max_height``, by height then lex."""
        out = [cw for cw in _compositions_upto(self.rank, max_height) if self.is_dominant(cw)]
        out.sort(key=lambda c: (sum(c), c))
        return out

    def sufficiently_dominant(self, bound: int) -> Coweight:
        """A dominant coweight whose simple-root pairings are all at least ``bound``.

        Returns ``m * 2 rho^vee`` with the smallest such ``m``; ``2 rho^vee`` pairs
        to 2 with every simple root.
        """
        m = max(0, -(-bound // 2))
        return tuple(m * x for x in self.two_rho_vee)


def _compositions_upto(n: int, h: int):
    def rec(prefix, left, k):
        if k == 0:
            yield tuple(prefix)
            return
        for x in range(left + 1):
            prefix.append(x)
            yield from rec(prefix, left - x, k - 1)
            prefix.pop()

    yield from rec([], h, n)


def _positive_closure(gens: list[np.ndarray], n: int) -> list[tuple[int, ...]]:
    eye = np.eye(n, dtype=np.int64)
    seen = {tuple(int(x) for x in eye[i]) for i in range(n)}
    queue = deque(seen)
    while queue:
        v = np.array(queue.popleft(), dtype=np.int64)
        for g in gens:
            w = tuple(int(x) for x in g @ v)
            if w not in seen:
                if len(seen) > 10**5:
                    raise InfiniteTypeError("root closure does not terminate")
                seen.add(w)
                queue.append(w)
    pos = [v for v in seen if all(x >= 0 for x in v)]
    pos.sort(key=lambda v: (sum(v), v))
    return pos


def _enumerate_weyl(gens: list[np.ndarray], cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Breadth-first closure over right multiplication by simple reflections.

    BFS depth on the Cayley graph with simple generators is the Coxeter length.
    """
    n = gens[0].shape[0]
    eye = np.eye(n, dtype=np.int64)
    mats = [eye]
    lengths = [0]
    seen = {eye.tobytes()}
    frontier = [eye]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for g in frontier:
            for s in gens:
                h = g @ s
                key = h.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(h)
                    mats.append(h)
                    lengths.append(depth)
                    if len(mats) > cap:
                        raise WeylCapExceeded(
                            f"Weyl group has more than {cap} elements; raise weyl_cap to build it")
        frontier = nxt
    return np.array(mats, dtype=np.int64), np.array(lengths, dtype=np.int64)


# -- public operations -------------------------------------------------------


def build_root_system(spec: CartanSpec | Mapping | Sequence[Sequence[int]],
                      weyl_cap: int = DEFAULT_WEYL_CAP) -> RootSystem:
    """Build a root system from a :class:`CartanSpec`, its JSON form, or a bare matrix."""
    if isinstance(spec, Mapping):
        spec = CartanSpec.from_json(spec)
    if isinstance(spec, CartanSpec):
        return RootSystem(spec.cartan(), weyl_cap=weyl_cap, label=spec.label)
    return RootSystem(spec, weyl_cap=weyl_cap)


def enumerate_weyl(rs: RootSystem) -> tuple[WeylElement, ...]:
    return rs._weyl_elements


def _length_poly(lengths: Iterable[int]) -> TPoly:
    lengths = list(lengths)
    coeffs = [0] * (max(lengths) + 1)
    for l in lengths:
        coeffs[l] += 1
    return tuple(coeffs)


def poincare_polynomial(rs: RootSystem) -> TPoly:
    """``W(t) = sum_w t^{n(w)}`` as an ascending coefficient tuple."""
    return _length_poly(int(l) for l in rs.weyl_lengths)


def stabilizer_mask(rs: RootSystem, lam: Sequence[int]) -> np.ndarray:
    images = rs.weyl_matrices @ np.asarray(lam, dtype=np.int64)
    return np.all(images == np.asarray(lam, dtype=np.int64), axis=1)


def stabilizer_poincare(rs: RootSystem, lam: Sequence[int]) -> TPoly:
    """Poincare polynomial of the stabilizer ``{w : w lam = lam}`` of a dominant coweight."""
    lam = rs.require_dominant(lam)
    mask = stabilizer_mask(rs, lam)
    return _length_poly(int(l) for l in rs.weyl_lengths[mask])


def height(rs: RootSystem | None, lam: Sequence[int]) -> int:
    """``<lam, rho>``, the coordinate sum in the simple-coroot basis."""
    return int(sum(lam))


def dominance_leq(rs: RootSystem | None, nu: Sequence[int], lam: Sequence[int]) -> bool:
    """``nu <= lam``: the difference ``lam - nu`` has nonnegative coroot coordinates."""
    return all(b - a >= 0 for a, b in zip(nu, lam))


def dominant_representative(rs: RootSystem, nu: Sequence[int]) -> tuple[Coweight, WeylElement]:
    """Return ``(nu_plus, w)`` with ``nu_plus`` dominant and ``w nu_plus == nu``."""
    cur = rs.coweight(nu)
    w = np.eye(rs.rank, dtype=np.int64)
    while True:
        p = rs.pairings(cur)
        neg = [i for i, x in enumerate(p) if x < 0]
        if not neg:
            break
        i = neg[0]
        cur = rs.reflect(i, cur)
        w = w @ rs.reflections[i]
    return cur, rs.weyl_element(w)


def weyl_dimension(rs: RootSystem, lam: Sequence[int]) -> int:
    """Dimension of the irreducible character with highest coweight ``lam``.

    Evaluates ``prod_{alpha > 0} (lam + rho^vee, alpha) / (rho^vee, alpha)`` with the
    Euclidean inner product; the coweight side carries the coroot Weyl vector.
    """
    lam = rs.require_dominant(lam)
    shifted = rs.coweight_to_root_basis(tuple(Fraction(l) + r for l, r in zip(lam, rs.rho_vee)))
    rho_v = rs.coweight_to_root_basis(rs.rho_vee)
    out = Fraction(1)
    for alpha in rs.positive_roots:
        out *= rs.inner(shifted, alpha) / rs.inner(rho_v, alpha)
    if out.denominator != 1:
        raise ArithmeticError(f"non-integral dimension {out}")
    return int(out)
