"""Bracketing the log miss probability.

For level alpha and divergence D,

    -(D + h(alpha)) / (1 - alpha)  <=  ln beta  <=  -D + mu0,

with mu0 the gap between D and the alpha-quantile of r under noise. mu0 can
be estimated, bounded through a moment inequality, or bounded by Chebyshev's
inequality under a variance condition. The bounds are not clamped.
"""

import math

import numpy as np

from gaussminimax import HypothesisPair, beta_bounds, calibrate_threshold, estimate_beta, kl_null_vs

pair = HypothesisPair.diagonal(np.tile([2.0, 0.5], 64), np.full(128, 0.1))
alpha = 0.1
th = calibrate_threshold(pair, alpha, 200_000, seed=1)
est = estimate_beta(pair, pair, th.gamma, 200_000, seed=2)
print(f"n = 128: ln beta_hat = {est.log_value:.3f} (+- {3 * est.rel_err:.3f})")
# smallest constant satisfying Var r <= C^2 D for this pair
rep = kl_null_vs(pair)
C = math.sqrt(rep.ll_variance / rep.kl)
methods = [("empirical", {"n_samples": 200_000, "seed": 1}), ("lemma1", {"p": 2.0}), ("chebyshev", {"C": C})]
for method, kw in methods:
    bb = beta_bounds(pair, alpha, method, **kw)
    print(f"{method:9s}: {bb.lower_log_beta:9.3f} <= ln beta <= {bb.upper_log_beta:9.3f}   (mu0 = {bb.mu0:.3f})")

# The moment bound grows like n^(1/p) while D grows like n, so the exponent is unaffected.
for n in (64, 256, 1024):
    bb = beta_bounds(HypothesisPair.diagonal(np.tile([2.0, 0.5], n // 2)), alpha, "lemma1", p=2.0)
    print(f"n = {n:5d}: D/n = {bb.kl / n:.4f}  mu0/n = {bb.mu0 / n:.4f}")
