"""Minimax detection of Gaussian signals in white Gaussian noise.

Likelihood-ratio testing of ``N(0, I)`` against ``N(a, M)``, divergence-based
bounds on the miss probability, and a membership oracle for the set of
alternatives that a single reference pair can stand in for.
"""

from .bounds import BetaBounds, beta_bounds, binary_entropy, mu0_empirical, mu0_lemma1, mu_chebyshev, stein_lower
from .hypotheses import (
    DivergenceReport,
    HypothesisPair,
    check_assumptions,
    check_condition_iii,
    kl_null_vs,
    ll_variance,
    read_pair,
)
from .lrtest import (
    DegenerateLr,
    ErrorEstimate,
    InsufficientSamples,
    LrThreshold,
    calibrate_threshold,
    estimate_alpha,
    estimate_beta,
    exact_beta_1d,
    log_lr,
)
from .maximalset import (
    CandidatePair,
    FReport,
    MembershipVerdict,
    expected_ratio_mc,
    f_report,
    k_unknown_mean,
    log_f_diag,
    log_f_zero_mean,
    membership,
)
from .pdlinalg import NotPositiveDefinite, SymMatrix, chol_logdet, eigen_sym, is_pd, solve_pd

__version__ = "0.1.0"
