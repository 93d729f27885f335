from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hlwalk.markov_sim import (
    ExactSampler,
    Kernels,
    StateSpaceExceeded,
    corners_of_chain,
    couple_step,
    discrepancy_runs,
    exact_chain_marginal,
    exact_corner_sum,
    exact_moments,
    joint_discrepancy_run,
    lln_clt_report,
    make_rng,
    run_trajectories,
    sample_from,
    simulate_corner_sum,
    simulate_product_chain,
)
from hlwalk.root_system import dominance_leq
from hlwalk.satake import LatticeDistribution, context, corners_distribution

A1 = context({"family": "A", "rank": 1}, 2)
ALPHA = LatticeDistribution.point_mass((1,))
ZERO1 = LatticeDistribution.point_mass((0,))


def chi2_pvalue(samples, law):
    atoms = sorted(law.support)
    counts = [sum(1 for s in samples if s == a) for a in atoms]
    assert sum(counts) == len(samples)
    expected = [float(law.support[a]) * len(samples) for a in atoms]
    return stats.chisquare(counts, expected).pvalue


def test_exact_sampler_distribution():
    law = LatticeDistribution({(0,): F(1, 7), (1,): F(2, 7), (2,): F(4, 7)})
    rng = make_rng(1)
    xs = [sample_from(law, rng) for _ in range(20000)]
    assert chi2_pvalue(xs, law) > 1e-3


def test_exact_sampler_huge_denominator():
    p = F(1, 3 ** 50)
    s = ExactSampler({(0,): p, (1,): 1 - p})
    rng = make_rng(2)
    assert s.denominator == 3 ** 50
    assert all(s.draw(rng) in ((0,), (1,)) for _ in range(100))
    with pytest.raises(ValueError):
        ExactSampler({(0,): F(1, 2)})


def test_zero_steps_stay_at_zero():
    rng = make_rng(0)
    tr = simulate_product_chain(A1, ZERO1, 20, rng)
    assert set(tr.lambdas) == {(0,)}
    tr = simulate_corner_sum(A1, ZERO1, 20, rng)
    assert set(tr.nus) == {(0,)}
    r = joint_discrepancy_run(A1, ZERO1, 20, rng, 0.5)
    assert r.violations == 0 and r.dominance_failures == 0


def test_k1_reproduces_step_law():
    ctx = context({"family": "A", "rank": 2}, 3)
    step = LatticeDistribution({(0, 0): F(1, 4), (1, 1): F(1, 2), (2, 1): F(1, 4)})
    kern = Kernels(ctx)
    trajs = run_trajectories(lambda i, rng: simulate_product_chain(ctx, step, 1, rng, kern, 7, i),
                             100_000, 7)
    assert chi2_pvalue([t.lambdas[0] for t in trajs], step) > 1e-3


def test_k1_corner_sum_is_corners_law():
    kern = Kernels(A1)
    trajs = run_trajectories(lambda i, rng: simulate_corner_sum(A1, ALPHA, 1, rng, kern, 3, i),
                             100_000, 3)
    assert chi2_pvalue([t.nus[0] for t in trajs], corners_distribution(A1, (1,))) > 1e-3


def test_three_step_kernel_composition():
    # by hand from P_a P_1 = P_{a+1} + (1-t) P_a + P_{a-1} (a >= 2) at q = 2
    assert exact_chain_marginal(A1, ALPHA, 2).support == {(2,): F(2, 3), (1,): F(1, 6), (0,): F(1, 6)}
    assert exact_chain_marginal(A1, ALPHA, 3).support == {
        (3,): F(4, 9), (2,): F(2, 9), (1,): F(11, 36), (0,): F(1, 36)}


def test_two_step_empirical_marginal():
    kern = Kernels(A1)
    trajs = run_trajectories(lambda i, rng: simulate_product_chain(A1, ALPHA, 2, rng, kern, 5, i),
                             20_000, 5)
    assert chi2_pvalue([t.lambdas[1] for t in trajs], exact_chain_marginal(A1, ALPHA, 2)) > 1e-3


@pytest.mark.parametrize("spec,step", [
    ({"family": "A", "rank": 1}, {(1,): F(1, 2), (0,): F(1, 4), (2,): F(1, 4)}),
    ({"family": "A", "rank": 2}, {(1, 1): F(2, 3), (0, 0): F(1, 3)}),
    ({"family": "C", "rank": 2}, {(1, 1): F(1)}),
])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_corner_sum_matches_chain_corners(spec, step, k):
    ctx = context(spec, 3)
    law = LatticeDistribution(step)
    assert corners_of_chain(ctx, law, k).support == exact_corner_sum(ctx, law, k).support


@settings(max_examples=40)
@given(st.integers(0, 6), st.integers(0, 3), st.integers(1, 3), st.sampled_from([2, 3]))
def test_coupling_marginals_and_feasibility(m, gap, s, q):
    ctx = context({"family": "A", "rank": 1}, q)
    gap = min(gap, m)
    kern = Kernels(ctx)
    joint, unmatched = couple_step(kern.product_law((m,), (s,)), kern.corners_law((s,)), (m,), (gap,))
    assert unmatched == 0
    m1, m2 = {}, {}
    for (x, c), p in joint.items():
        m1[x] = m1.get(x, 0) + p
        m2[c] = m2.get(c, 0) + p
        assert x[0] - (m - gap + c[0]) >= 0
    assert m1 == kern.product_law((m,), (s,)).support
    assert m2 == kern.corners_law((s,)).support


def test_rank_two_coupled_paths_stay_dominated():
    ctx = context({"family": "A", "rank": 2}, 2)
    step = LatticeDistribution({(1, 1): F(1, 2), (2, 1): F(1, 2)})
    results = discrepancy_runs(ctx, step, 40, 20, seed=3, epsilon=0.5)
    for r in results:
        assert r.dominance_failures == 0
        assert r.unmatched_mass == 0
        for lam, nu in zip(r.trajectory.lambdas, r.trajectory.nus):
            assert dominance_leq(ctx.rs, nu, lam)


def test_subadditivity_pathwise():
    ctx = context({"family": "C", "rank": 2}, 3)
    step = LatticeDistribution({(1, 1): F(1, 2), (1, 2): F(1, 2)})
    tr = simulate_product_chain(ctx, step, 30, make_rng(4))
    prev = (0, 0)
    for s, lam in zip(tr.steps, tr.lambdas):
        assert dominance_leq(ctx.rs, lam, tuple(a + b for a, b in zip(prev, s)))
        prev = lam


def test_epsilon_range():
    for eps in (0, 1, -0.1, 1.5):
        with pytest.raises(ValueError):
            joint_discrepancy_run(A1, ALPHA, 5, make_rng(0), eps)


def test_exact_moments():
    mean, cov = exact_moments(A1, ALPHA)
    assert mean == (F(1, 2),) and cov == [[F(7, 12)]]
    mean, cov = exact_moments(A1, ZERO1)
    assert mean == (0,) and cov == [[0]]


def test_determinism_and_thread_independence():
    def run(threads):
        return run_trajectories(lambda i, rng: simulate_product_chain(A1, ALPHA, 50, rng, None, 9, i),
                                16, 9, threads)
    a, b, c = run(1), run(1), run(4)
    assert [t.lambdas for t in a] == [t.lambdas for t in b] == [t.lambdas for t in c]
    assert make_rng(9, 3).integers(0, 10**9) == make_rng(9, 3).integers(0, 10**9)


def test_state_cap():
    kern = Kernels(A1, state_cap=3)
    with pytest.raises(StateSpaceExceeded):
        simulate_product_chain(A1, LatticeDistribution.point_mass((2,)), 10, make_rng(0), kern)


def test_small_report():
    rep = lln_clt_report(A1, ALPHA, 200, 40, seed=1, epsilon=0.5, burn_in=20)
    js = rep.to_json()
    assert js["exact_drift"] == ["1/2"] and js["exact_cov"] == [["7/12"]]
    assert rep.covariance_psd
    assert js["discrepancy"]["dominance_failures"] == 0
    assert abs(rep.drift_z[0]) < 5
    zero = lln_clt_report(A1, ZERO1, 10, 5, seed=1)
    assert zero.empirical_drift == [0.0] and zero.exact_cov == [[0]]
