"""Which alternatives can a single detector cover?

The detector built for a reference (a, M) keeps its miss exponent against a
candidate (b, V) when ln f(b, V) is below a sub-linear allowance. This script
evaluates ln f, checks its defining expectation by simulation, and looks at
the shape of the member set in two special cases.
"""

import math

import numpy as np

from gaussminimax import (
    CandidatePair,
    HypothesisPair,
    expected_ratio_mc,
    f_report,
    k_unknown_mean,
    log_f_zero_mean,
    membership,
)

ref = HypothesisPair.diagonal([2.0])
for nu in (4.0, 0.9, 1.0 / 1.5):
    cand = CandidatePair.diagonal([nu])
    rep = f_report(ref, cand)
    v = membership(ref, cand, slack=0.0)
    line = f"V = {nu:.3f}: ln f = {rep.log_f:8.4f}  {v.status.value:10s}"
    if rep.b_pd:
        est = expected_ratio_mc(ref, cand, 10**6, seed=1)
        line += f"  E ratio: MC {est.value:.4f} +- {est.std_err:.4f}, sqrt(f) = {math.exp(rep.log_f / 2):.4f}"
    print(line)

# Known covariance, unknown mean: with unit variances, K(b) = 2 (a, b - a),
# so members at zero slack form the half-space (a, b - a) >= 0.
a = np.array([1.0, 0.5, 0.0])
for b in (a, a + np.array([0.0, 0.0, 3.0]), 1.2 * a, 0.8 * a):
    K = k_unknown_mean(np.ones(3), a, b)
    print(f"b = {b}:  K = {K:+.3f}  2(a, b-a) = {2 * a @ (b - a):+.3f}  member: {K >= 0}")

# Zero means: ln f depends only on the covariances.
print("\nM = 2I, V = 4I, n = 5:", log_f_zero_mean(2 * np.eye(5), 4 * np.eye(5)), "=", 5 * math.log(2 / 3))
print("M = I, any V:", log_f_zero_mean(np.eye(2), [[3.0, 1.0], [1.0, 2.0]]))

# The member set is not convex in general: with M = 2 and V = M, ln f(b) is concave in b.
ref = HypothesisPair.diagonal([2.0], [1.0])
for b in (1.5, -3.5, -1.0):
    print(f"b = {b:5.2f}: ln f = {f_report(ref, CandidatePair.diagonal([2.0], [b])).log_f:+.4f}")
