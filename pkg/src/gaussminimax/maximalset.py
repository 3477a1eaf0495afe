"""Membership oracle for the maximal replaceable set of a reference pair.

For a reference ``(a, M)`` and candidate ``(b, V)`` let

    B = I + V^-1 - M^-1
    d = B^-1 (V^-1 b - M^-1 a)
    K = b'V^-1 b - a'M^-1 a - d'B d
    ln f = ln|M| - ln|V| - ln|B| - K

Then ``E_I[p_{b,V} / p_{a,M}] = f ** 0.5`` when ``B`` is positive definite
and is infinite otherwise. A candidate belongs to the set when ``B`` is
positive definite and ``ln f`` stays below a sub-linear allowance, which at
finite ``n`` is a caller-supplied ``slack``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _mc
from .hypotheses import HypothesisPair
from .pdlinalg import PD_TOL, MatrixLike, SymMatrix, as_sym, factor, is_pd


class CandidatePair(HypothesisPair):
    """A pair ``(b, V)`` tested for membership against a reference pair."""


@dataclass(frozen=True)
class FReport:
    log_f: float
    B: SymMatrix
    d: NDArray | None
    K: float
    b_pd: bool


class Status(str, Enum):
    MEMBER = "member"
    NON_MEMBER = "non_member"
    INFINITE = "infinite"


@dataclass(frozen=True)
class MembershipVerdict:
    status: Status
    log_f: float
    slack_used: float

    @property
    def is_member(self) -> bool:
        return self.status is Status.MEMBER


def _check_dims(ref: HypothesisPair, cand: HypothesisPair) -> None:
    if ref.dim != cand.dim:
        raise ValueError(f"reference has dimension {ref.dim}, candidate {cand.dim}")


def f_report(ref: HypothesisPair, cand: HypothesisPair, pd_tol: float = PD_TOL) -> FReport:
    """Evaluate ``B``, ``d``, ``K`` and ``ln f`` for a reference/candidate pair.

    All products with inverse covariances go through Cholesky solves.
    When ``B`` fails the positive-definiteness test ``log_f`` is ``+inf``
    and ``d``, ``K`` are not defined (``None`` and ``nan``).
    """
    _check_dims(ref, cand)
    mia, vib = ref.precision_mean, cand.precision_mean
    if ref.is_diagonal and cand.is_diagonal:
        B = SymMatrix(1.0 + 1.0 / cand.cov.diag - 1.0 / ref.cov.diag, diagonal=True)
    else:
        n = ref.dim
        Bd = np.eye(n) + cand.chol.inverse().dense() - ref.chol.inverse().dense()
        B = SymMatrix(0.5 * (Bd + Bd.T))
    if not is_pd(B, pd_tol):
        return FReport(math.inf, B, None, math.nan, False)
    fb = factor(B, pd_tol=0.0)
    g = vib - mia
    d = fb.solve(g)
    K = float(cand.mean @ vib) - float(ref.mean @ mia) - float(g @ d)
    log_f = ref.logdet() - cand.logdet() - fb.logdet() - K
    return FReport(log_f, B, d, K, True)


def log_f_diag(
    lambdas: ArrayLike, a: ArrayLike, nus: ArrayLike, b: ArrayLike, pd_tol: float = PD_TOL
) -> float:
    """``ln f`` when both covariances are diagonal, via ``mu_i = 1 + 1/nu_i - 1/lambda_i``."""
    lam, nu = np.asarray(lambdas, float), np.asarray(nus, float)
    a, b = np.asarray(a, float), np.asarray(b, float)
    if np.any(lam <= 0) or np.any(nu <= 0):
        raise ValueError("variances must be positive")
    mu = 1.0 + 1.0 / nu - 1.0 / lam
    if np.min(mu) <= pd_tol * max(1.0, float(np.max(np.abs(mu)))):
        return math.inf
    K = np.sum(b * b / nu - a * a / lam - (b / nu - a / lam) ** 2 / mu)
    return float(np.sum(np.log(lam) - np.log(nu) - np.log(mu)) - K)


def slack_for(rule: str, n: int, c: float = 1.0) -> float:
    """Finite-``n`` stand-in for the sub-linear allowance.

    ``"zero"`` gives the core set ``ln f <= 0``; ``"c_sqrt_n"`` gives ``c * sqrt(n)``.
    """
    if rule == "zero":
        return 0.0
    if rule == "c_sqrt_n":
        return c * math.sqrt(n)
    raise ValueError(f"unknown slack rule {rule!r}")


def membership(
    ref: HypothesisPair, cand: HypothesisPair, slack: float = 0.0, pd_tol: float = PD_TOL
) -> MembershipVerdict:
    if slack < 0:
        raise ValueError("slack must be non-negative")
    rep = f_report(ref, cand, pd_tol)
    if not rep.b_pd:
        return MembershipVerdict(Status.INFINITE, math.inf, slack)
    status = Status.MEMBER if rep.log_f <= slack else Status.NON_MEMBER
    return MembershipVerdict(status, rep.log_f, slack)


@dataclass(frozen=True)
class RatioEstimate:
    """Monte Carlo estimate of ``E_I[p_{b,V} / p_{a,M}]``.

    When ``b_pd`` is false the target is infinite and the estimate, whatever
    its value, does not converge; ``diverging`` is then set.
    """

    value: float
    log_value: float
    std_err: float
    rel_err: float
    n_samples: int
    seed: int
    b_pd: bool
    diverging: bool


def expected_ratio_mc(
    ref: HypothesisPair,
    cand: HypothesisPair,
    n_samples: int,
    seed: int,
    workers: int = 1,
    pd_tol: float = PD_TOL,
) -> RatioEstimate:
    """Average of ``p_{b,V}(xi) / p_{a,M}(xi)`` over ``xi ~ N(0, I)``.

    Ratios are accumulated as log-sum-exp per chunk, so densities spanning
    hundreds of nats do not overflow.
    """
    _check_dims(ref, cand)
    n = ref.dim
    b_pd = f_report(ref, cand, pd_tol).b_pd
    const = 0.5 * (ref.logdet() - cand.logdet())
    fa, fb = ref.chol, cand.chol
    a, b = ref.mean, cand.mean

    def chunk(rng: np.random.Generator, rows: int) -> tuple[float, float]:
        x = rng.standard_normal((rows, n))
        qa = np.sum(fa.whiten(x - a) ** 2, axis=1)
        qb = np.sum(fb.whiten(x - b) ** 2, axis=1)
        lr = const + 0.5 * (qa - qb)
        m = float(np.max(lr))
        s1 = m + math.log(float(np.sum(np.exp(lr - m))))
        s2 = 2 * m + math.log(float(np.sum(np.exp(2 * (lr - m)))))
        return s1, s2

    s1, s2 = _mc.logsumexp_pair(_mc.map_chunks(chunk, n_samples, n, seed, _mc.RATIO, workers))
    log_value = s1 - math.log(n_samples)
    excess = math.exp(min(s2 + math.log(n_samples) - 2 * s1, 700.0)) - 1.0
    rel = math.sqrt(max(excess, 0.0) / n_samples)
    value = math.exp(log_value)
    return RatioEstimate(value, log_value, value * rel, rel, n_samples, seed, b_pd, not b_pd)


def k_unknown_mean(lambdas: ArrayLike, a: ArrayLike, b: ArrayLike) -> float:
    """``K`` for a candidate sharing the reference covariance, ``V = M = diag(lambdas)``.

    Then ``ln f = -K`` and membership at slack ``s`` reads ``K >= -s``.
    """
    lam = np.asarray(lambdas, float)
    if np.any(lam <= 0):
        raise ValueError("variances must be positive")
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.sum((b * b - a * a) / lam - (b - a) ** 2 / (lam * lam)))


def log_f_zero_mean(M: MatrixLike, V: MatrixLike, pd_tol: float = PD_TOL) -> float:
    """``ln|M| - ln|V| - ln|I + V^-1 - M^-1|`` for zero means, ``+inf`` off the domain."""
    M, V = as_sym(M), as_sym(V)
    if M.order != V.order:
        raise ValueError("M and V differ in order")
    fm, fv = factor(M, pd_tol), factor(V, pd_tol)
    if M.is_diagonal and V.is_diagonal:
        B = SymMatrix(1.0 + 1.0 / V.diag - 1.0 / M.diag, diagonal=True)
    else:
        Bd = np.eye(M.order) + fv.inverse().dense() - fm.inverse().dense()
        B = SymMatrix(0.5 * (Bd + Bd.T))
    if not is_pd(B, pd_tol):
        return math.inf
    return fm.logdet() - fv.logdet() - factor(B, pd_tol=0.0).logdet()
