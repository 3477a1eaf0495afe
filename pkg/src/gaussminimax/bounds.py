"""Analytic sandwich on the log miss probability of the LR detector.

For false-alarm level ``alpha`` and divergence ``D``::

    -(D + h(alpha)) / (1 - alpha)  <=  ln beta(alpha)  <=  -D + mu0

where ``h`` is the binary entropy in nats and ``mu0`` is the gap between
``D`` and the ``alpha``-quantile of the log-likelihood ratio under the null.
``mu0`` can be estimated, bounded through a moment inequality, or bounded by
Chebyshev's inequality under a variance condition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import xlogy

from .hypotheses import HypothesisPair, check_condition_iii, kl_null_vs
from .lrtest import DegenerateLr, calibrate_threshold

Mu0Method = Literal["lemma1", "empirical", "chebyshev"]


class ConditionIIIWarning(UserWarning):
    """The supplied constant does not satisfy the variance-to-divergence condition."""


@dataclass(frozen=True)
class BetaBounds:
    """Lower and upper bounds on ``ln beta`` at level ``alpha``.

    The bounds are reported as computed; with a loose ``mu0`` the upper
    bound may fall below the lower one.
    """

    kl: float
    lower_log_beta: float
    upper_log_beta: float
    mu0: float
    mu0_method: str
    alpha: float


def binary_entropy(alpha: float) -> float:
    """``-a ln a - (1 - a) ln(1 - a)`` in nats."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return float(-xlogy(alpha, alpha) - xlogy(1.0 - alpha, 1.0 - alpha))


def stein_lower(pair: HypothesisPair, alpha: float) -> float:
    D = kl_null_vs(pair).kl
    return -(D + binary_entropy(alpha)) / (1.0 - alpha)


def mu0_lemma1(pair: HypothesisPair, alpha: float, p: float | None = None, delta: float = 1.0) -> float:
    """Moment-inequality upper bound on ``mu0``.

    ``(24/alpha * sum|1/l_i - 1|^p)^(1/p) + 3 ||M^-1 a|| sqrt(ln(1/alpha))``
    with ``1 < p <= 2``; ``p`` defaults to ``min(2, 1 + delta)``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if p is None:
        p = min(2.0, 1.0 + delta)
    if not 1.0 < p <= 2.0:
        raise ValueError("p must satisfy 1 < p <= 2")
    lam, _ = pair.spectrum()
    moment = float(np.sum(np.abs(1.0 / lam - 1.0) ** p))
    shift = float(np.linalg.norm(pair.precision_mean))
    return (24.0 / alpha * moment) ** (1.0 / p) + 3.0 * shift * math.sqrt(math.log(1.0 / alpha))


def mu0_empirical(pair: HypothesisPair, alpha: float, n_samples: int, seed: int, workers: int = 1) -> float:
    """``D - gamma`` with ``gamma`` the calibrated threshold."""
    th = calibrate_threshold(pair, alpha, n_samples, seed, workers=workers)
    return kl_null_vs(pair).kl - th.gamma


def mu_chebyshev(pair: HypothesisPair, alpha: float, C: float) -> float:
    """``C * sqrt(D / alpha)``; warns if ``C`` fails the variance condition for this pair."""
    if C <= 0:
        raise ValueError("C must be positive")
    if not check_condition_iii(pair, C):
        warnings.warn(
            f"log-ratio variance exceeds C^2 * D for C={C}; the Chebyshev value is not a valid bound",
            ConditionIIIWarning,
            stacklevel=2,
        )
    return C * math.sqrt(kl_null_vs(pair).kl / alpha)


def beta_bounds(
    pair: HypothesisPair,
    alpha: float,
    mu0_method: Mu0Method = "empirical",
    *,
    p: float | None = None,
    delta: float = 1.0,
    C: float | None = None,
    n_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> BetaBounds:
    D = kl_null_vs(pair).kl
    lower = -(D + binary_entropy(alpha)) / (1.0 - alpha)
    if mu0_method == "lemma1":
        mu0 = mu0_lemma1(pair, alpha, p, delta)
    elif mu0_method == "empirical":
        mu0 = mu0_empirical(pair, alpha, n_samples, seed, workers)
    elif mu0_method == "chebyshev":
        if C is None:
            raise ValueError("chebyshev method needs C")
        mu0 = mu_chebyshev(pair, alpha, C)
    else:
        raise ValueError(f"unknown mu0 method {mu0_method!r}")
    return BetaBounds(D, lower, -D + mu0, mu0, mu0_method, alpha)


__all__ = [
    "BetaBounds",
    "ConditionIIIWarning",
    "DegenerateLr",
    "beta_bounds",
    "binary_entropy",
    "mu0_empirical",
    "mu0_lemma1",
    "mu_chebyshev",
    "stein_lower",
]
