"""Monte Carlo for the singular-number chain and the corner-sum walk.

Randomness comes from counter-based Philox generators; trajectory ``i`` of a
run with master seed ``s`` always uses ``SeedSequence(s, spawn_key=(i,))``, so
results do not depend on execution order or thread count.
"""

from __future__ import annotations

import bisect
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import networkx as nx
import numpy as np
from scipy import stats

from .padic_oracle import _uniform_below as uniform_below
from .root_system import Coweight, dominance_leq
from .satake import (
    LatticeDistribution,
    ProbabilityContext,
    convolve,
    corners_distribution,
    mixture,
    product_transition,
)

DEFAULT_STATE_CAP = 200_000


class StateSpaceExceeded(RuntimeError):
    pass


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    ss = np.random.SeedSequence(seed) if index is None else np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


class ExactSampler:
    """Inverse-CDF sampler over integer thresholds on the common denominator."""

    __slots__ = ("atoms", "cumulative", "denominator")

    def __init__(self, weights: dict):
        items = sorted(weights.items(), key=lambda kv: (str(kv[0]),))
        den = 1
        for _, p in items:
            den = lcm(den, Fraction(p).denominator)
        cum, acc, atoms = [], 0, []
        for k, p in items:
            p = Fraction(p)
            if p == 0:
                continue
            acc += p.numerator * (den // p.denominator)
            atoms.append(k)
            cum.append(acc)
        if acc != den:
            raise ValueError("weights do not sum to 1")
        self.atoms = atoms
        self.cumulative = cum
        self.denominator = den

    def draw(self, rng: np.random.Generator):
        if len(self.atoms) == 1:
            return self.atoms[0]
        u = uniform_below(rng, self.denominator)
        return self.atoms[bisect.bisect_right(self.cumulative, u)]


def sample_from(dist: LatticeDistribution, rng: np.random.Generator) -> Coweight:
    return ExactSampler(dist.support).draw(rng)


# -- kernels -----------------------------------------------------------------


class Kernels:
    """Per-context cache of exact transition samplers (insert-or-get)."""

    def __init__(self, ctx: ProbabilityContext, state_cap: int = DEFAULT_STATE_CAP):
        self.ctx = ctx
        self.state_cap = state_cap
        self._product: dict = {}
        self._corners: dict = {}
        self._coupling: dict = {}
        self._states: set = set()
        self._lock = threading.Lock()

    def _register(self, state):
        if state not in self._states:
            with self._lock:
                self._states.add(state)
                if len(self._states) > self.state_cap:
                    raise StateSpaceExceeded(
                        f"more than {self.state_cap} reachable states; raise state_cap")

    def product_law(self, lam: Coweight, step: Coweight) -> LatticeDistribution:
        key = (lam, step)
        hit = self._product.get(key)
        if hit is None:
            self._register(lam)
            law = product_transition(self.ctx, lam, step)
            hit = self._product.setdefault(key, (law, ExactSampler(law.support)))
        return hit[0]

    def product(self, lam: Coweight, step: Coweight) -> ExactSampler:
        hit = self._product.get((lam, step))
        if hit is None:
            self.product_law(lam, step)
            hit = self._product[(lam, step)]
        return hit[1]

    def corners_law(self, step: Coweight) -> LatticeDistribution:
        hit = self._corners.get(step)
        if hit is None:
            law = corners_distribution(self.ctx, step)
            hit = self._corners.setdefault(step, (law, ExactSampler(law.support)))
        return hit[0]

    def corners(self, step: Coweight) -> ExactSampler:
        self.corners_law(step)
        return self._corners[step][1]

    def coupling(self, lam: Coweight, gap: Coweight, step: Coweight) -> tuple[ExactSampler, Fraction]:
        key = (lam, gap, step)
        hit = self._coupling.get(key)
        if hit is None:
            joint, unmatched = couple_step(self.product_law(lam, step), self.corners_law(step), lam, gap)
            hit = self._coupling.setdefault(key, (ExactSampler(joint), unmatched))
        return hit


def couple_step(law_lam: LatticeDistribution, law_cor: LatticeDistribution,
                lam: Coweight, gap: Coweight) -> tuple[dict, Fraction]:
    """Joint law of (next singular numbers, corner increment) with the given marginals.

    A pair ``(x, c)`` keeps ``x - (nu + c)`` in the positive coroot cone exactly
    when ``x - lam + gap - c >= 0`` coordinatewise, with ``gap = lam - nu``.
    Pairs with ``x = lam + c`` (gap unchanged) are filled first; the residual
    mass is routed by an integer max-flow over admissible pairs.  Any mass the
    flow cannot place is paired arbitrarily and returned as ``unmatched``.
    """
    joint: dict = {}
    r1 = dict(law_lam.support)
    r2 = dict(law_cor.support)
    for c in list(r2):
        x = tuple(a + b for a, b in zip(lam, c))
        m = min(r1.get(x, Fraction(0)), r2[c])
        if m:
            joint[(x, c)] = m
            r1[x] -= m
            r2[c] -= m
    r1 = {k: v for k, v in r1.items() if v}
    r2 = {k: v for k, v in r2.items() if v}
    unmatched = Fraction(0)
    if r1:
        den = 1
        for v in list(r1.values()) + list(r2.values()):
            den = lcm(den, v.denominator)
        G = nx.DiGraph()
        for x, v in r1.items():
            G.add_edge("s", ("x", x), capacity=int(v * den))
        for c, v in r2.items():
            G.add_edge(("c", c), "t", capacity=int(v * den))
        for x in r1:
            for c in r2:
                if all(xi - li + gi - ci >= 0 for xi, li, gi, ci in zip(x, lam, gap, c)):
                    G.add_edge(("x", x), ("c", c))
        if G.has_node("t") and G.has_node("s"):
            _, flow = nx.maximum_flow(G, "s", "t")
        else:
            flow = {}
        for x in r1:
            for node, f in flow.get(("x", x), {}).items():
                if f:
                    c = node[1]
                    m = Fraction(f, den)
                    joint[(x, c)] = joint.get((x, c), Fraction(0)) + m
                    r1[x] -= m
                    r2[c] -= m
        left1 = sorted((k, v) for k, v in r1.items() if v)
        left2 = sorted((k, v) for k, v in r2.items() if v)
        unmatched = sum((v for _, v in left1), Fraction(0))
        i = j = 0
        while i < len(left1) and j < len(left2):
            (x, a), (c, b) = left1[i], left2[j]
            m = min(a, b)
            joint[(x, c)] = joint.get((x, c), Fraction(0)) + m
            left1[i] = (x, a - m)
            left2[j] = (c, b - m)
            if left1[i][1] == 0:
                i += 1
            if left2[j][1] == 0:
                j += 1
    return joint, unmatched


# -- step laws ---------------------------------------------------------------


def as_step_sequence(steps, K: int) -> list[LatticeDistribution]:
    if isinstance(steps, LatticeDistribution):
        return [steps] * K
    steps = list(steps)
    if len(steps) == 1:
        return steps * K
    if len(steps) < K:
        raise ValueError(f"{len(steps)} step laws given for K={K} steps")
    return steps[:K]


def check_step_law(ctx: ProbabilityContext, law: LatticeDistribution) -> None:
    for cw in law.support:
        ctx.rs.require_dominant(cw, "step atom")


# -- trajectories ------------------------------------------------------------


@dataclass
class Trajectory:
    seed: int
    index: int
    lambdas: list[Coweight] = field(default_factory=list)
    nus: list[Coweight] = field(default_factory=list)
    steps: list[Coweight] = field(default_factory=list)


def _step_samplers(steps: list[LatticeDistribution]) -> list[ExactSampler]:
    cache: dict = {}
    out = []
    for s in steps:
        key = id(s)
        if key not in cache:
            cache[key] = ExactSampler(s.support)
        out.append(cache[key])
    return out


def simulate_product_chain(ctx: ProbabilityContext, steps, K: int, rng: np.random.Generator,
                           kernels: Kernels | None = None, seed: int = 0,
                           index: int = 0) -> Trajectory:
    """``lambda(k) ~ product_transition(lambda(k-1), SN(A_k))`` from ``lambda(0) = 0``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    kernels = kernels or Kernels(ctx)
    laws = as_step_sequence(steps, K)
    samplers = _step_samplers(laws)
    lam = (0,) * ctx.rs.rank
    tr = Trajectory(seed, index)
    for k in range(K):
        s = samplers[k].draw(rng)
        lam = kernels.product(lam, s).draw(rng)
        tr.steps.append(s)
        tr.lambdas.append(lam)
    return tr


def simulate_corner_sum(ctx: ProbabilityContext, steps, K: int, rng: np.random.Generator,
                        kernels: Kernels | None = None, seed: int = 0,
                        index: int = 0) -> Trajectory:
    """``nu(k) = sum_{j <= k} Cor_j`` with independent ``Cor_j ~ corners(SN(A_j))``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    kernels = kernels or Kernels(ctx)
    laws = as_step_sequence(steps, K)
    samplers = _step_samplers(laws)
    nu = [0] * ctx.rs.rank
    tr = Trajectory(seed, index)
    for k in range(K):
        s = samplers[k].draw(rng)
        c = kernels.corners(s).draw(rng)
        nu = [a + b for a, b in zip(nu, c)]
        tr.steps.append(s)
        tr.nus.append(tuple(nu))
    return tr


@dataclass
class DiscrepancyResult:
    """Per-trajectory outcome of a coupled (lambda, nu) run."""

    trajectory: Trajectory
    epsilon: float
    violations: int
    last_violation: int
    dominance_failures: int
    unmatched_mass: Fraction

    def clean_after(self, k0: int) -> bool:
        return self.last_violation <= k0


def joint_discrepancy_run(ctx: ProbabilityContext, steps, K: int, rng: np.random.Generator,
                          epsilon: float = 0.5, kernels: Kernels | None = None,
                          seed: int = 0, index: int = 0) -> DiscrepancyResult:
    """Simulate (lambda(k), nu(k)) jointly and count ``height(lambda - nu) > height(lambda)^eps``.

    Each step draws ``SN(A_k)`` once and then the pair (next lambda, corner
    increment) from :func:`couple_step`; both marginal processes are exact.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if K < 1:
        raise ValueError("K must be at least 1")
    kernels = kernels or Kernels(ctx)
    laws = as_step_sequence(steps, K)
    samplers = _step_samplers(laws)
    n = ctx.rs.rank
    lam = (0,) * n
    nu = (0,) * n
    tr = Trajectory(seed, index)
    violations = last = failures = 0
    unmatched = Fraction(0)
    for k in range(1, K + 1):
        s = samplers[k - 1].draw(rng)
        gap = tuple(a - b for a, b in zip(lam, nu))
        sampler, um = kernels.coupling(lam, gap, s)
        unmatched += um
        x, c = sampler.draw(rng)
        lam = x
        nu = tuple(a + b for a, b in zip(nu, c))
        tr.steps.append(s)
        tr.lambdas.append(lam)
        tr.nus.append(nu)
        if not dominance_leq(ctx.rs, nu, lam):
            failures += 1
        h = sum(lam)
        if sum(lam) - sum(nu) > (h ** epsilon if h > 0 else 0.0):
            violations += 1
            last = k
    return DiscrepancyResult(tr, epsilon, violations, last, failures, unmatched)


# -- exact laws for small k --------------------------------------------------


def exact_chain_marginal(ctx: ProbabilityContext, steps, k: int,
                         kernels: Kernels | None = None) -> LatticeDistribution:
    """Law of ``lambda(k)`` by exact kernel composition."""
    kernels = kernels or Kernels(ctx)
    laws = as_step_sequence(steps, k)
    cur = LatticeDistribution.point_mass((0,) * ctx.rs.rank, ctx.q)
    for law in laws:
        parts = []
        for lam, p in cur.support.items():
            for s, ps in law.support.items():
                parts.append((p * ps, kernels.product_law(lam, s)))
        cur = mixture(parts)
    return cur


def exact_corner_sum(ctx: ProbabilityContext, steps, k: int) -> LatticeDistribution:
    """Law of ``nu(k)`` as the convolution of the per-step corner laws."""
    laws = as_step_sequence(steps, k)
    cur = LatticeDistribution.point_mass((0,) * ctx.rs.rank, ctx.q)
    for law in laws:
        cur = convolve(cur, step_corner_law(ctx, law))
    return cur


def corners_of_chain(ctx: ProbabilityContext, steps, k: int) -> LatticeDistribution:
    """Law of ``Cor(A_1...A_k)`` obtained from the chain marginal, using that the
    product is bi-K-invariant so its corners given ``lambda(k)`` follow the corners law."""
    marg = exact_chain_marginal(ctx, steps, k)
    return mixture((p, corners_distribution(ctx, lam)) for lam, p in marg.support.items())


def step_corner_law(ctx: ProbabilityContext, step: LatticeDistribution) -> LatticeDistribution:
    return mixture((p, corners_distribution(ctx, s)) for s, p in step.support.items())


# -- asymptotics -------------------------------------------------------------


def _pairing_matrix(ctx: ProbabilityContext) -> np.ndarray:
    return ctx.rs.cartan.astype(float)


def exact_moments(ctx: ProbabilityContext, step: LatticeDistribution):
    """Exact mean and covariance of one corner increment, in coroot coordinates."""
    law = step_corner_law(ctx, step)
    n = ctx.rs.rank
    mean = law.mean()
    cov = [[law.expect(lambda c, i=i, j=j: c[i] * c[j]) - mean[i] * mean[j] for j in range(n)]
           for i in range(n)]
    return mean, cov


@dataclass
class AsymptoticsReport:
    K: int
    M: int
    seed: int
    exact_drift: list[Fraction]
    exact_cov: list[list[Fraction]]
    empirical_drift: list[float]
    drift_z: list[float]
    exact_pairing_cov: list[list[float]]
    empirical_pairing_cov: list[list[float]]
    empirical_cov: list[list[float]]
    fluct_mean_z: list[float]
    cov_rel_error: list[float]
    anderson: list[dict]
    discrepancy: dict | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def covariance_psd(self) -> bool:
        C = np.asarray(self.empirical_pairing_cov, dtype=float)
        sym = np.allclose(C, C.T)
        return sym and bool(np.all(np.linalg.eigvalsh(C) >= -1e-9 * max(1.0, np.abs(C).max())))

    def to_json(self) -> dict:
        def f(x):
            return float(f"{x:.17g}")

        out = {
            "K": self.K, "M": self.M, "seed": self.seed,
            "exact_drift": [str(x) for x in self.exact_drift],
            "exact_cov": [[str(x) for x in r] for r in self.exact_cov],
            "empirical_drift": [f(x) for x in self.empirical_drift],
            "drift_z": [f(x) for x in self.drift_z],
            "exact_pairing_cov": [[f(x) for x in r] for r in self.exact_pairing_cov],
            "empirical_pairing_cov": [[f(x) for x in r] for r in self.empirical_pairing_cov],
            "empirical_cov": [[f(x) for x in r] for r in self.empirical_cov],
            "fluct_mean_z": [f(x) for x in self.fluct_mean_z],
            "cov_rel_error": [f(x) for x in self.cov_rel_error],
            "anderson_darling": self.anderson,
            "covariance_psd": self.covariance_psd,
            "metadata": self.metadata,
        }
        if self.discrepancy is not None:
            out["discrepancy"] = self.discrepancy
        return out


def run_trajectories(fn, M: int, seed: int, threads: int = 1) -> list:
    """Run ``fn(index, rng)`` for ``M`` trajectories, results in index order."""
    def one(i):
        return fn(i, make_rng(seed, i))

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, range(M)))
    return [one(i) for i in range(M)]


def lln_clt_report(ctx: ProbabilityContext, step: LatticeDistribution, K: int, M: int,
                   seed: int = 0, threads: int = 1, epsilon: float | None = None,
                   burn_in: int = 100, kernels: Kernels | None = None) -> AsymptoticsReport:
    """Law of large numbers and CLT diagnostics for i.i.d. steps.

    Runs ``M`` trajectories of length ``K``.  With ``epsilon`` set, the
    trajectories are the coupled (lambda, nu) runs and discrepancy counts are
    included; otherwise plain product chains.
    """
    check_step_law(ctx, step)
    kernels = kernels or Kernels(ctx)
    n = ctx.rs.rank
    mean, cov = exact_moments(ctx, step)
    C = _pairing_matrix(ctx)

    if epsilon is None:
        trajs = run_trajectories(
            lambda i, rng: simulate_product_chain(ctx, step, K, rng, kernels, seed, i),
            M, seed, threads)
        disc = None
    else:
        results = run_trajectories(
            lambda i, rng: joint_discrepancy_run(ctx, step, K, rng, epsilon, kernels, seed, i),
            M, seed, threads)
        trajs = [r.trajectory for r in results]
        disc = summarize_discrepancy(results, burn_in)

    final = np.array([t.lambdas[-1] for t in trajs], dtype=float)
    mean_f = np.array([float(x) for x in mean])
    cov_f = np.array([[float(x) for x in r] for r in cov])
    emp_drift = final.mean(axis=0) / K
    sd = np.sqrt(np.maximum(np.diag(cov_f), 0) / (K * M))
    drift_z = np.where(sd > 0, (emp_drift - mean_f) / np.where(sd > 0, sd, 1), 0.0)

    fluct = (final - K * mean_f) / math.sqrt(K)
    pair_fluct = fluct @ C.T
    exact_pair_cov = C @ cov_f @ C.T
    emp_cov = np.atleast_2d(np.cov(fluct, rowvar=False, ddof=1)) if M > 1 else np.zeros((n, n))
    emp_pair_cov = np.atleast_2d(np.cov(pair_fluct, rowvar=False, ddof=1)) if M > 1 else np.zeros((n, n))
    psd = np.sqrt(np.maximum(np.diag(exact_pair_cov), 0) / M)
    fluct_z = np.where(psd > 0, pair_fluct.mean(axis=0) / np.where(psd > 0, psd, 1), 0.0)
    diag = np.diag(exact_pair_cov)
    rel = np.where(diag > 0, np.abs(np.diag(emp_pair_cov) - diag) / np.where(diag > 0, diag, 1),
                   np.abs(np.diag(emp_pair_cov)))

    ad = []
    for i in range(n):
        x = fluct[:, i]
        if M >= 8 and np.std(x) > 0:
            res = stats.anderson(x, dist="norm")
            crit = dict(zip(res.significance_level.tolist(), res.critical_values.tolist()))
            ad.append({"coordinate": i, "statistic": float(res.statistic),
                       "critical_1pct": crit.get(1.0), "passes_1pct": bool(res.statistic < crit.get(1.0))})
        else:
            ad.append({"coordinate": i, "statistic": None, "critical_1pct": None,
                       "passes_1pct": None})

    meta = {"root_system": ctx.rs.label, "q": str(ctx.q),
            "step": step.to_json()["support"],
            "chain": "product" if epsilon is None else "coupled",
            "coupling": "gap-preserving diagonal first, residual by max-flow over pairs "
                        "keeping lambda - nu in the positive coroot cone"}
    return AsymptoticsReport(
        K, M, seed, list(mean), cov, emp_drift.tolist(), drift_z.tolist(),
        exact_pair_cov.tolist(), emp_pair_cov.tolist(), emp_cov.tolist(),
        fluct_z.tolist(), rel.tolist(), ad, disc, meta)


def summarize_discrepancy(results: Sequence[DiscrepancyResult], burn_in: int = 100) -> dict:
    M = len(results)
    clean = sum(r.clean_after(burn_in) for r in results)
    return {
        "epsilon": results[0].epsilon if results else None,
        "trajectories": M,
        "burn_in": burn_in,
        "clean_after_burn_in": clean,
        "clean_fraction": clean / M if M else 0.0,
        "total_violations": sum(r.violations for r in results),
        "max_last_violation": max((r.last_violation for r in results), default=0),
        "dominance_failures": sum(r.dominance_failures for r in results),
        "unmatched_coupling_mass": str(sum((r.unmatched_mass for r in results), Fraction(0))),
    }


def discrepancy_runs(ctx: ProbabilityContext, step, K: int, M: int, seed: int = 0,
                     epsilon: float = 0.5, threads: int = 1,
                     kernels: Kernels | None = None) -> list[DiscrepancyResult]:
    kernels = kernels or Kernels(ctx)
    return run_trajectories(
        lambda i, rng: joint_discrepancy_run(ctx, step, K, rng, epsilon, kernels, seed, i),
        M, seed, threads)
