"""Likelihood-ratio detector for ``N(0, I)`` against ``N(a, M)``.

The statistic is ``r(y) = ln p_I(y) - ln p_{a,M}(y)``; the detector decides
for the null on the closed set ``{r >= gamma}``. The threshold is the
empirical ``alpha``-quantile of ``r`` under the null.

Miss probabilities decay like ``exp(-D)`` in the dimension, so plain Monte
Carlo sees no hits beyond a few dozen coordinates. :func:`estimate_beta`
therefore defaults to exponential tilting: ``r`` is quadratic, so the tilted
law ``q(y) exp(theta r(y)) / E_q exp(theta r)`` is again Gaussian with
closed-form normaliser, and ``theta`` is chosen so the tilted mean of ``r``
sits at the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla
from scipy.optimize import brentq
from scipy.special import logsumexp
from scipy.stats import norm

from . import _mc
from .hypotheses import HypothesisPair
from .pdlinalg import SymMatrix, factor


class DegenerateLr(ValueError):
    """The alternative coincides with the null, so ``r`` is identically zero."""


class InsufficientSamples(ValueError):
    pass


@dataclass(frozen=True)
class ErrorEstimate:
    """Estimate of an error probability.

    ``rel_err`` is the standard error divided by the estimate; for small
    values it is also the standard error of ``log_value``. ``hits`` counts
    the samples that landed in the event.
    """

    value: float
    log_value: float
    n_samples: int
    std_err: float
    seed: int
    hits: int
    rel_err: float
    method: str = "plain"

    def log_interval(self, z: float = 3.0) -> tuple[float, float]:
        """Interval ``log_value +/- z`` standard errors, mapped through ``log``."""
        if self.hits == 0:
            return -math.inf, self.log_value
        lo = self.log_value + math.log1p(-z * self.rel_err) if z * self.rel_err < 1 else -math.inf
        return lo, self.log_value + math.log1p(z * self.rel_err)

    @classmethod
    def exact(cls, value: float) -> "ErrorEstimate":
        log_value = math.log(value) if value > 0 else -math.inf
        return cls(value, log_value, 0, 0.0, 0, 0, 0.0, "exact")

    @classmethod
    def from_count(cls, hits: int, n: int, seed: int) -> "ErrorEstimate":
        p = hits / n
        if hits >= 50:
            se = math.sqrt(p * (1.0 - p) / n)
        else:
            # Wilson score interval at z = 1; its half-width stays positive at 0 hits.
            se = math.sqrt(p * (1.0 - p) / n + 1.0 / (4.0 * n * n)) / (1.0 + 1.0 / n)
        log_value = math.log(p) if hits else -math.inf
        rel = se / p if hits else math.inf
        return cls(p, log_value, n, se, seed, hits, rel, "plain")

    @classmethod
    def from_log_weights(
        cls, log_s1: float, log_s2: float, hits: int, n: int, seed: int, method: str
    ) -> "ErrorEstimate":
        if hits == 0 or not np.isfinite(log_s1):
            return cls(0.0, -math.inf, n, 0.0, seed, 0, math.inf, method)
        log_value = log_s1 - math.log(n)
        excess = math.exp(min(log_s2 + math.log(n) - 2.0 * log_s1, 700.0)) - 1.0
        rel = math.sqrt(max(excess, 0.0) / n)
        value = math.exp(log_value)
        return cls(value, log_value, n, value * rel, seed, hits, rel, method)


@dataclass(frozen=True)
class LrThreshold:
    gamma: float
    target_alpha: float
    achieved_alpha: ErrorEstimate
    method: str


# -- the statistic -------------------------------------------------------------


@dataclass(frozen=True)
class _LogLr:
    """``r(y) = (c + y'Ay - 2 y'h) / 2`` with ``A = M^-1 - I``, ``h = M^-1 a``.

    ``A`` is a vector when the covariance is diagonal.
    """

    A: NDArray
    h: NDArray
    c: float

    @classmethod
    def of(cls, pair: HypothesisPair) -> "_LogLr":
        h = pair.precision_mean
        c = pair.logdet() + float(pair.mean @ h)
        if pair.is_diagonal:
            A = 1.0 / pair.cov.diag - 1.0
        else:
            A = pair.chol.inverse().dense() - np.eye(pair.dim)
        return cls(A, h, c)

    @property
    def diagonal(self) -> bool:
        return self.A.ndim == 1

    def __call__(self, y: NDArray) -> NDArray:
        if self.diagonal:
            quad = (y * y) @ self.A
        else:
            quad = np.einsum("ij,ij->i", y @ self.A, y)
        return 0.5 * (self.c + quad - 2.0 * (y @ self.h))


def log_lr(pair: HypothesisPair, y: ArrayLike) -> float | NDArray:
    """``ln p_I(y) - ln p_{a,M}(y)``; rows of a 2-D ``y`` are evaluated separately."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != pair.dim:
        raise ValueError(f"observation has length {y.shape[-1]}, pair dimension {pair.dim}")
    out = _LogLr.of(pair)(np.atleast_2d(y))
    return float(out[0]) if y.ndim == 1 else out


def decide_null(pair: HypothesisPair, gamma: float, y: ArrayLike) -> bool | NDArray:
    """True where the detector decides for the null, i.e. ``r(y) >= gamma``."""
    return log_lr(pair, y) >= gamma


def _null_stats(pair: HypothesisPair, n_samples: int, seed: int, stream: int, workers: int) -> NDArray:
    stat = _LogLr.of(pair)

    def chunk(rng: np.random.Generator, rows: int) -> NDArray:
        return stat(rng.standard_normal((rows, pair.dim)))

    return np.concatenate(_mc.map_chunks(chunk, n_samples, pair.dim, seed, stream, workers))


def _empirical_quantile(x: NDArray, alpha: float) -> float:
    # smallest order statistic with empirical CDF >= alpha
    k = max(1, math.ceil(alpha * x.size))
    return float(np.partition(x, k - 1)[k - 1])


def calibrate_threshold(
    pair: HypothesisPair,
    alpha: float,
    n_samples: int,
    seed: int,
    method: Literal["mc_quantile", "exact_1d"] = "mc_quantile",
    workers: int = 1,
    null_tol: float = 1e-12,
) -> LrThreshold:
    """Threshold ``gamma`` with ``P_I{r <= gamma} = alpha``.

    With ``mc_quantile`` the threshold is the empirical ``alpha``-quantile of
    ``n_samples`` null draws; ``achieved_alpha`` is re-estimated on an
    independent stream. ``exact_1d`` is available for one-dimensional pairs.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if pair.is_null(null_tol):
        raise DegenerateLr("alternative equals the null; no threshold attains alpha")
    if method == "exact_1d":
        if pair.dim != 1:
            raise ValueError("exact_1d requires a one-dimensional pair")
        gamma, _ = exact_beta_1d(float(pair.cov.diag[0]), float(pair.mean[0]), alpha)
        return LrThreshold(gamma, alpha, ErrorEstimate.exact(exact_alpha_1d(
            float(pair.cov.diag[0]), float(pair.mean[0]), gamma)), method)
    if method != "mc_quantile":
        raise ValueError(f"unknown method {method!r}")
    if n_samples < 10.0 / alpha:
        raise InsufficientSamples(f"need at least {math.ceil(10 / alpha)} samples for alpha={alpha}")
    stats = _null_stats(pair, n_samples, seed, _mc.NULL, workers)
    gamma = _empirical_quantile(stats, alpha)
    achieved = _estimate_alpha(pair, gamma, n_samples, seed, _mc.NULL_CHECK, workers)
    return LrThreshold(gamma, alpha, achieved, method)


def _estimate_alpha(pair, gamma, n_samples, seed, stream, workers) -> ErrorEstimate:
    if gamma == -math.inf:
        return ErrorEstimate.from_count(0, n_samples, seed)
    if gamma == math.inf:
        return ErrorEstimate.from_count(n_samples, n_samples, seed)
    stat = _LogLr.of(pair)

    def chunk(rng: np.random.Generator, rows: int) -> int:
        return int(np.count_nonzero(stat(rng.standard_normal((rows, pair.dim))) <= gamma))

    hits = sum(_mc.map_chunks(chunk, n_samples, pair.dim, seed, stream, workers))
    return ErrorEstimate.from_count(hits, n_samples, seed)


def estimate_alpha(
    pair: HypothesisPair, gamma: float, n_samples: int, seed: int, workers: int = 1
) -> ErrorEstimate:
    """Plain Monte Carlo estimate of the false-alarm probability ``P_I{r <= gamma}``."""
    return _estimate_alpha(pair, gamma, n_samples, seed, _mc.NULL, workers)


# -- miss probability ----------------------------------------------------------


@dataclass(frozen=True)
class _Tilt:
    """Gaussian ``N(mean, prec^-1)`` proportional to ``q_{b,V}(y) exp(theta r(y))``."""

    theta: float
    mean: NDArray
    prec: NDArray  # vector if diagonal
    prec_chol: NDArray | None
    log_mgf: float  # ln E_q exp(theta r)

    def sample(self, rng: np.random.Generator, rows: int) -> NDArray:
        z = rng.standard_normal((rows, self.mean.shape[0]))
        if self.prec_chol is None:
            return self.mean + z / np.sqrt(self.prec)
        return self.mean + sla.solve_triangular(self.prec_chol, z.T, lower=True, trans="T").T


def _tilt_parts(stat: _LogLr, truth: HypothesisPair):
    """Pieces that do not depend on theta."""
    vinv_b = truth.precision_mean
    const = -0.5 * float(truth.mean @ vinv_b) - 0.5 * truth.logdet()
    if stat.diagonal and truth.is_diagonal:
        vinv = 1.0 / truth.cov.diag
    else:
        vinv = truth.chol.inverse().dense()
    return vinv, vinv_b, const


def _make_tilt(stat: _LogLr, truth: HypothesisPair, theta: float, parts) -> tuple[_Tilt, float]:
    """Tilted law at ``theta`` and the tilted mean of ``r``."""
    vinv, vinv_b, const = parts
    u = vinv_b - theta * stat.h
    if vinv.ndim == 1:
        prec = vinv - theta * stat.A
        if np.any(prec <= 0):
            raise np.linalg.LinAlgError("tilt leaves the positive-definite cone")
        w = u / prec
        logdet = float(np.sum(np.log(prec)))
        tr = float(np.sum(stat.A / prec))
        chol = None
        aw = stat.A * w
    else:
        A = stat.A if stat.A.ndim == 2 else np.diag(stat.A)
        prec = vinv - theta * A
        f = factor(SymMatrix(0.5 * (prec + prec.T)), pd_tol=0.0)
        w = f.solve(u)
        logdet = f.logdet()
        tr = float(np.trace(f.solve(A)))
        chol = f.lower
        aw = A @ w
    log_mgf = 0.5 * theta * stat.c + const - 0.5 * logdet + 0.5 * float(u @ w)
    mean_r = 0.5 * (stat.c + tr + float(w @ aw) - 2.0 * float(w @ stat.h))
    return _Tilt(theta, w, prec, chol, log_mgf), mean_r


def _theta_max(stat: _LogLr, truth: HypothesisPair) -> float:
    if stat.diagonal and truth.is_diagonal:
        kappa = float(np.max(stat.A * truth.cov.diag))
    else:
        A = stat.A if stat.A.ndim == 2 else np.diag(stat.A)
        low = truth.chol.lower if truth.chol.lower is not None else np.diag(np.sqrt(truth.cov.diag))
        kappa = float(np.max(np.linalg.eigvalsh(low.T @ A @ low)))
    return 1.0 / kappa if kappa > 0 else math.inf


def choose_tilt(decision: HypothesisPair, truth: HypothesisPair, gamma: float) -> _Tilt:
    """Tilt whose mean of ``r`` equals ``gamma`` (no tilt if ``gamma`` is not in the upper tail)."""
    stat = _LogLr.of(decision)
    parts = _tilt_parts(stat, truth)
    base, mean0 = _make_tilt(stat, truth, 0.0, parts)
    if mean0 >= gamma:
        return base
    tmax = _theta_max(stat, truth)

    def excess(theta: float) -> float:
        return _make_tilt(stat, truth, theta, parts)[1] - gamma

    if math.isfinite(tmax):
        hi = tmax * (1.0 - 1e-9)
    else:
        hi = 1.0
        while excess(hi) < 0 and hi < 1e6:
            hi *= 2.0
    if excess(hi) < 0:
        # threshold beyond reach of the tilted family; sample at the edge
        return _make_tilt(stat, truth, hi, parts)[0]
    theta = brentq(excess, 0.0, hi, xtol=1e-12, rtol=1e-12, maxiter=500)
    return _make_tilt(stat, truth, theta, parts)[0]


def estimate_beta(
    decision_pair: HypothesisPair,
    true_pair: HypothesisPair,
    gamma: float,
    n_samples: int,
    seed: int,
    method: Literal["tilted", "plain"] = "tilted",
    workers: int = 1,
) -> ErrorEstimate:
    """Miss probability ``P{r_decision(eta) >= gamma}`` with ``eta ~ N(b, V)``.

    This is the probability that the detector built for ``decision_pair``
    decides for the null when the data come from ``true_pair``. The default
    estimator samples from the exponentially tilted law (see module notes);
    ``method="plain"`` counts hits among direct draws.
    """
    if decision_pair.dim != true_pair.dim:
        raise ValueError("decision and true pair dimensions differ")
    if gamma == math.inf:
        return ErrorEstimate(0.0, -math.inf, n_samples, 0.0, seed, 0, math.inf, method)
    if gamma == -math.inf:
        return ErrorEstimate(1.0, 0.0, n_samples, 0.0, seed, n_samples, 0.0, method)
    stat = _LogLr.of(decision_pair)
    n = decision_pair.dim

    if method == "plain":
        b, col = true_pair.mean, true_pair.chol

        def count(rng: np.random.Generator, rows: int) -> int:
            eta = b + col.color(rng.standard_normal((rows, n)))
            return int(np.count_nonzero(stat(eta) >= gamma))

        hits = sum(_mc.map_chunks(count, n_samples, n, seed, _mc.ALTERNATIVE, workers))
        return ErrorEstimate.from_count(hits, n_samples, seed)
    if method != "tilted":
        raise ValueError(f"unknown method {method!r}")

    tilt = choose_tilt(decision_pair, true_pair, gamma)

    def weigh(rng: np.random.Generator, rows: int) -> tuple[float, float, int]:
        y = tilt.sample(rng, rows)
        r = stat(y)
        lw = -tilt.theta * r[r >= gamma] + tilt.log_mgf
        if lw.size == 0:
            return -math.inf, -math.inf, 0
        return float(logsumexp(lw)), float(logsumexp(2.0 * lw)), int(lw.size)

    parts = _mc.map_chunks(weigh, n_samples, n, seed, _mc.ALTERNATIVE, workers)
    s1, s2 = _mc.logsumexp_pair([(p[0], p[1]) for p in parts])
    hits = sum(p[2] for p in parts)
    return ErrorEstimate.from_log_weights(s1, s2, hits, n_samples, seed, "tilted")


# -- exact one-dimensional oracle ----------------------------------------------


def _coeffs(lam: float, a: float) -> tuple[float, float, float]:
    # 2 r(y) = c2 y^2 + c1 y + c0
    return 1.0 / lam - 1.0, -2.0 * a / lam, math.log(lam) + a * a / lam


def _interval(lo: float, hi: float, loc: float, scale: float) -> float:
    if lo >= hi:
        return 0.0
    zl, zh = (lo - loc) / scale, (hi - loc) / scale
    if zl > 0:
        return float(norm.sf(zl) - norm.sf(zh))
    return float(norm.cdf(zh) - norm.cdf(zl))


def _tails(lo: float, hi: float, loc: float, scale: float) -> float:
    return float(norm.cdf((lo - loc) / scale) + norm.sf((hi - loc) / scale))


def _region_prob(lam: float, a: float, gamma: float, loc: float, scale: float, reject: bool) -> float:
    """Measure under ``N(loc, scale^2)`` of ``{r <= gamma}`` (reject) or ``{r > gamma}``."""
    c2, c1, c0 = _coeffs(lam, a)
    rhs = 2.0 * gamma - c0
    if c2 == 0.0:
        cut = rhs / c1
        below = c1 > 0  # {r <= gamma} is {y <= cut} when the slope is positive
        if below == reject:
            return float(norm.cdf((cut - loc) / scale))
        return float(norm.sf((cut - loc) / scale))
    disc = c1 * c1 + 4.0 * c2 * rhs
    if disc <= 0.0:
        # r - gamma has constant sign: positive if c2 > 0, negative otherwise
        inside_reject = c2 < 0
        return 1.0 if inside_reject == reject else 0.0
    sq = math.sqrt(disc)
    r1, r2 = (-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)
    lo, hi = min(r1, r2), max(r1, r2)
    between = c2 > 0  # {r <= gamma} is the interval between the roots
    if between == reject:
        return _interval(lo, hi, loc, scale)
    return _tails(lo, hi, loc, scale)


def exact_alpha_1d(lam: float, a: float, gamma: float) -> float:
    """``P{r(xi) <= gamma}`` for ``xi ~ N(0, 1)`` via the normal CDF."""
    return _region_prob(lam, a, gamma, 0.0, 1.0, reject=True)


def exact_miss_1d(lam: float, a: float, gamma: float, b: float | None = None, v: float | None = None) -> float:
    """``P{r(eta) > gamma}`` for ``eta ~ N(b, v)``; defaults to ``N(a, lam)``."""
    b = a if b is None else b
    v = lam if v is None else v
    return _region_prob(lam, a, gamma, b, math.sqrt(v), reject=False)


def exact_beta_1d(lam: float, a: float, alpha: float, tol: float = 1e-10) -> tuple[float, float]:
    """Exact threshold and miss probability of the one-dimensional LR test.

    ``gamma`` is found by bisection until the standard-normal measure of the
    rejection region ``{r <= gamma}`` is within ``tol`` of ``alpha``; the
    miss probability is the ``N(a, lam)`` measure of the complement.
    """
    if lam <= 0:
        raise ValueError("variance must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if lam == 1.0 and a == 0.0:
        raise DegenerateLr("lambda = 1 and a = 0 give r = 0")

    lo, hi = -1.0, 1.0
    while exact_alpha_1d(lam, a, lo) > alpha:
        lo = 2.0 * lo
    while exact_alpha_1d(lam, a, hi) < alpha:
        hi = 2.0 * hi
    gamma = 0.5 * (lo + hi)
    for _ in range(500):
        gamma = 0.5 * (lo + hi)
        err = exact_alpha_1d(lam, a, gamma) - alpha
        if abs(err) <= tol:
            break
        if err < 0:
            lo = gamma
        else:
            hi = gamma
    else:
        raise RuntimeError("bisection for the threshold did not converge")
    return gamma, exact_miss_1d(lam, a, gamma)
