"""Null (0, I) versus Gaussian alternative (a, M): data model and functionals.

The divergence ``D(P_I || Q_{a,M})`` and the variance of the log-likelihood
ratio under the null drive every bound in :mod:`gaussminimax.bounds`.
General covariances are rotated to their eigenbasis first; the null law is
invariant under that rotation, so per-coordinate formulas then apply.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .pdlinalg import (
    PD_TOL,
    EigenDecomposition,
    MatrixLike,
    PDFactor,
    SymMatrix,
    as_sym,
    eigen_sym,
    factor,
    format_matrix,
    parse_matrix,
)


@dataclass(frozen=True, eq=False)
class HypothesisPair:
    """Mean vector and covariance of a Gaussian alternative ``N(mean, cov)``.

    The covariance is checked for positive definiteness on construction and
    the Cholesky factor is cached.
    """

    mean: NDArray
    cov: SymMatrix
    pd_tol: float = PD_TOL
    _factor: PDFactor = field(init=False, repr=False)

    def __init__(self, mean: ArrayLike, cov: MatrixLike, pd_tol: float = PD_TOL):
        cov = as_sym(cov)
        mean = np.array(mean, dtype=float, copy=True).reshape(-1)
        if mean.shape[0] != cov.order:
            raise ValueError(f"mean has length {mean.shape[0]}, covariance order {cov.order}")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "pd_tol", pd_tol)
        object.__setattr__(self, "_factor", factor(cov, pd_tol))

    @classmethod
    def null(cls, n: int) -> "HypothesisPair":
        return cls(np.zeros(n), SymMatrix.identity(n))

    @classmethod
    def diagonal(cls, variances: ArrayLike, mean: ArrayLike | None = None) -> "HypothesisPair":
        variances = np.asarray(variances, dtype=float).reshape(-1)
        if mean is None:
            mean = np.zeros_like(variances)
        return cls(mean, SymMatrix(variances, diagonal=True))

    @property
    def dim(self) -> int:
        return self.cov.order

    @property
    def is_diagonal(self) -> bool:
        return self.cov.is_diagonal

    @property
    def chol(self) -> PDFactor:
        return self._factor

    @cached_property
    def eigen(self) -> EigenDecomposition:
        return eigen_sym(self.cov)

    @cached_property
    def precision_mean(self) -> NDArray:
        """``M^{-1} a``, obtained by a solve."""
        return self._factor.solve(self.mean)

    def logdet(self) -> float:
        return self._factor.logdet()

    def spectrum(self) -> tuple[NDArray, NDArray]:
        """Eigenvalues of the covariance and the mean in the eigenbasis.

        For diagonal storage the coordinates are left in their given order.
        """
        if self.is_diagonal:
            return np.array(self.cov.diag), np.array(self.mean)
        eig = self.eigen
        return np.array(eig.eigenvalues), eig.basis.T @ self.mean

    def rotated(self, t: NDArray) -> "HypothesisPair":
        """The pair ``(t' a, t' M t)`` for an orthogonal ``t``."""
        m = t.T @ self.cov.dense() @ t
        return HypothesisPair(t.T @ self.mean, SymMatrix(0.5 * (m + m.T)), self.pd_tol)

    def is_null(self, tol: float = 1e-12) -> bool:
        """True when the pair coincides with ``(0, I)`` up to ``tol``."""
        if np.max(np.abs(self.mean), initial=0.0) > tol:
            return False
        return bool(np.max(np.abs(self.cov.dense() - np.eye(self.dim))) <= tol)

    def __repr__(self) -> str:
        return f"HypothesisPair(dim={self.dim}, cov={self.cov!r})"


@dataclass(frozen=True)
class DivergenceReport:
    kl: float
    ll_variance: float
    per_coordinate: NDArray | None = None


def _kl_terms(lam: NDArray, a: NDArray) -> NDArray:
    return np.log(lam) + 1.0 / lam - 1.0 + a * a / lam


def _var_terms(lam: NDArray, a: NDArray) -> NDArray:
    return (1.0 - 1.0 / lam) ** 2 + 2.0 * a * a / (lam * lam)


def kl_null_vs(pair: HypothesisPair) -> DivergenceReport:
    """Kullback-Leibler divergence of ``N(0, I)`` from ``N(a, M)``, in nats.

    Diagonal covariances use the per-coordinate form and fill
    ``per_coordinate``; dense ones go through the eigenvalues of ``M`` and a
    solve for ``a' M^{-1} a``.
    """
    if pair.is_diagonal:
        lam, a = pair.cov.diag, pair.mean
        terms = _kl_terms(lam, a)
        return DivergenceReport(
            kl=0.5 * float(np.sum(terms)),
            ll_variance=0.5 * float(np.sum(_var_terms(lam, a))),
            per_coordinate=terms,
        )
    lam = pair.eigen.eigenvalues
    quad = float(pair.mean @ pair.precision_mean)
    kl = 0.5 * (float(np.sum(np.log(lam) + 1.0 / lam - 1.0)) + quad)
    return DivergenceReport(kl=kl, ll_variance=ll_variance(pair))


def ll_variance(pair: HypothesisPair) -> float:
    """Variance of the log-likelihood ratio ``ln p_I/p_{a,M}`` under the null."""
    lam, a = pair.spectrum()
    return 0.5 * float(np.sum(_var_terms(lam, a)))


def check_condition_iii(pair: HypothesisPair, C: float) -> bool:
    """Whether the log-ratio variance is at most ``C**2`` times the divergence."""
    rep = kl_null_vs(pair)
    return rep.ll_variance <= C * C * rep.kl


@dataclass(frozen=True)
class AssumptionReport:
    """Finite-n trend diagnostics for the two growth assumptions.

    ``mean_kl_term[k]`` is ``(1/n) sum(ln l + 1/l - 1)`` at ``ns[k]`` and
    ``mean_power_term[k]`` is ``(1/n) sum |1/l - 1|^(1+delta)``.
    """

    ns: NDArray
    mean_kl_term: NDArray
    mean_power_term: NDArray
    delta: float
    not_cauchy: bool
    unbounded: bool
    cauchy_tol: float
    growth_tol: float

    @property
    def clear(self) -> bool:
        return not (self.not_cauchy or self.unbounded)


def check_assumptions(
    family: Callable[[int], HypothesisPair] | Iterable[HypothesisPair],
    delta: float,
    ns: Sequence[int] | None = None,
    cauchy_tol: float = 1e-3,
    growth_tol: float = 0.25,
) -> AssumptionReport:
    """Advisory check of the limit and boundedness assumptions on a family.

    ``family`` is either a callable ``n -> HypothesisPair`` evaluated at
    ``ns``, or an iterable of pairs of increasing dimension. The first
    sequence is flagged when any successive difference exceeds
    ``cauchy_tol``. The second is flagged as unbounded when its log-log
    slope against ``n`` over the upper half of the sizes exceeds
    ``growth_tol``, which catches power-law growth but not slow drift.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if callable(family):
        if ns is None:
            raise ValueError("ns is required when family is a callable")
        pairs = [family(int(n)) for n in ns]
    else:
        pairs = list(family)
    sizes = np.array([p.dim for p in pairs])
    if np.any(np.diff(sizes) <= 0):
        raise ValueError("family dimensions must be strictly increasing")

    first, second = [], []
    for p in pairs:
        lam, _ = p.spectrum()
        first.append(float(np.mean(np.log(lam) + 1.0 / lam - 1.0)))
        second.append(float(np.mean(np.abs(1.0 / lam - 1.0) ** (1.0 + delta))))
    first_arr, second_arr = np.array(first), np.array(second)

    not_cauchy = bool(np.any(np.abs(np.diff(first_arr)) > cauchy_tol))
    unbounded = False
    tail = slice(len(sizes) // 2, None)
    xs, ys = sizes[tail], second_arr[tail]
    if len(xs) >= 2 and np.all(ys > 0):
        slope = np.polyfit(np.log(xs), np.log(ys), 1)[0]
        unbounded = bool(slope > growth_tol)
    return AssumptionReport(
        ns=sizes,
        mean_kl_term=first_arr,
        mean_power_term=second_arr,
        delta=delta,
        not_cauchy=not_cauchy,
        unbounded=unbounded,
        cauchy_tol=cauchy_tol,
        growth_tol=growth_tol,
    )


# -- pair text format: "mean a1 ... an" then a pdlinalg matrix block ----------


def parse_pair(text: str) -> HypothesisPair:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines or lines[0].split()[0] != "mean":
        raise ValueError("pair file must start with a 'mean' line")
    mean = np.array([float(t) for t in lines[0].split()[1:]])
    return HypothesisPair(mean, parse_matrix(lines[1:]))


def read_pair(source: str | Path | io.TextIOBase) -> HypothesisPair:
    if isinstance(source, (str, Path)):
        return parse_pair(Path(source).read_text())
    return parse_pair(source.read())


def format_pair(pair: HypothesisPair) -> str:
    head = "mean " + " ".join(repr(float(x)) for x in pair.mean)
    return head + "\n" + format_matrix(pair.cov)


def write_pair(pair: HypothesisPair, path: str | Path) -> None:
    Path(path).write_text(format_pair(pair))
