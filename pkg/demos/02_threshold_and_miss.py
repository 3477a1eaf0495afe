"""Calibrating the likelihood-ratio detector and measuring its miss rate.

For a pair (a, M) the detector decides "noise only" when the log-likelihood
ratio r(y) is at least gamma. We pick gamma so the false-alarm rate is alpha,
then estimate the miss probability beta. In one dimension both are known in
closed form, so the Monte Carlo numbers can be checked directly.
"""

import math

import numpy as np
from scipy.stats import norm

from gaussminimax import HypothesisPair, calibrate_threshold, estimate_beta, exact_beta_1d

# Variance 4 at alpha = 5%: the detector rejects when |y| exceeds the two-sided 5% point.
pair = HypothesisPair.diagonal([4.0])
th = calibrate_threshold(pair, 0.05, 400_000, seed=1)
est = estimate_beta(pair, pair, th.gamma, 400_000, seed=2)
gamma, beta = exact_beta_1d(4.0, 0.0, 0.05)
t = norm.isf(0.025)
print(f"gamma: MC {th.gamma:.5f}  exact {gamma:.5f}  closed form {math.log(2) - 0.375 * t * t:.5f}")
print(f"beta:  MC {est.value:.5f} +- {est.std_err:.5f}  exact {beta:.5f}  closed form {2 * norm.cdf(t / 2) - 1:.5f}")

# Rare misses: a 40-dimensional unit mean shift has beta around 1e-9.
# Plain sampling sees no misses; the exponentially tilted sampler does.
n, a, alpha = 40, 1.0, 0.1
pair = HypothesisPair.diagonal(np.ones(n), np.full(n, a))
gamma = 0.5 * n * a * a - a * math.sqrt(n) * norm.isf(alpha)
exact = norm.logcdf(norm.isf(alpha) - a * math.sqrt(n))
for method in ("plain", "tilted"):
    e = estimate_beta(pair, pair, gamma, 50_000, seed=3, method=method)
    print(f"{method:6s}: ln beta = {e.log_value:9.4f}  (hits {e.hits}, rel err {e.rel_err:.3g})   exact {exact:.4f}")

# The detector built for one pair can be run against a different truth.
decision = HypothesisPair.diagonal([2.0, 2.0])
truth = HypothesisPair.diagonal([3.0, 1.5], [0.2, -0.1])
th = calibrate_threshold(decision, 0.1, 200_000, seed=4)
print("\nmismatched truth: beta =", estimate_beta(decision, truth, th.gamma, 200_000, seed=5).value)
