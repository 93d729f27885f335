# Singular numbers of a product of random SL_2(Q_2) matrices drift like a
# random walk with the corner increments.  We look at the exact one-step laws,
# then simulate both processes and compare the drift.
from fractions import Fraction

import numpy as np

from hlwalk.markov_sim import exact_chain_marginal, exact_corner_sum, lln_clt_report
from hlwalk.satake import LatticeDistribution, context, corners_distribution, product_transition

ctx = context({"family": "A", "rank": 1}, 2)
step = LatticeDistribution.point_mass((1,))

print("corners law of alpha:", corners_distribution(ctx, (1,)).to_json()["support"])
print("product law alpha*alpha:", product_transition(ctx, (1,), (1,)).to_json()["support"])

# after three steps the singular numbers and the corner sum have different laws,
# but both are exact rationals
print("lambda(3):", exact_chain_marginal(ctx, step, 3).to_json()["support"])
print("nu(3):    ", exact_corner_sum(ctx, step, 3).to_json()["support"])

rep = lln_clt_report(ctx, step, K=500, M=100, seed=1, epsilon=0.5, burn_in=50)
print("exact drift", rep.exact_drift[0], "empirical", round(rep.empirical_drift[0], 4))
print("exact variance", rep.exact_cov[0][0], "empirical", round(rep.empirical_cov[0][0], 4))
print("discrepancy:", rep.discrepancy)

# standardized fluctuations (m(K) - K/2)/sqrt(K) against N(0, 7/12)
ad = rep.anderson[0]
print("Anderson-Darling", round(ad["statistic"], 3), "1% critical value", ad["critical_1pct"])
print("sd", round(float(np.sqrt(rep.empirical_cov[0][0])), 4), "vs", round(float(np.sqrt(float(Fraction(7, 12)))), 4))
