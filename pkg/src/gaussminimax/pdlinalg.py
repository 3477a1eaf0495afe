"""Symmetric positive-definite matrix primitives.

Every log-determinant, solve and positive-definiteness check in the package
goes through this module. Matrices are wrapped in :class:`SymMatrix`, which
carries either dense storage or a diagonal-only vector; the diagonal variant
uses per-entry formulas and never factorizes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

PD_TOL = 1e-10
SYM_TOL = 1e-12


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a matrix required to be positive definite is not."""


class EigenConvergenceError(np.linalg.LinAlgError):
    """Raised when the symmetric eigensolver fails to converge."""

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class SymMatrix:
    """Immutable real symmetric matrix, dense or diagonal.

    Parameters
    ----------
    data : array_like
        A square 2-D array (dense) or a 1-D array of diagonal entries.
    diagonal : bool, optional
        Force interpretation of ``data``. By default a 1-D input is diagonal
        and a 2-D input is dense.
    """

    __slots__ = ("_data", "_diag")

    def __init__(self, data: ArrayLike, diagonal: bool | None = None):
        arr = np.asarray(data, dtype=float)
        if diagonal is None:
            diagonal = arr.ndim == 1
        if diagonal:
            if arr.ndim == 2:
                arr = np.diag(arr)
            if arr.ndim != 1 or arr.size < 1:
                raise ValueError("diagonal matrix needs a non-empty 1-D vector")
        else:
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
                raise ValueError(f"expected a square matrix, got shape {arr.shape}")
            scale = max(1.0, float(np.max(np.abs(arr))))
            if np.max(np.abs(arr - arr.T)) > SYM_TOL * scale:
                raise ValueError("matrix is not symmetric")
            arr = 0.5 * (arr + arr.T)
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        self._data = _frozen(arr)
        self._diag = bool(diagonal)

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls(np.ones(n), diagonal=True)

    @property
    def order(self) -> int:
        return self._data.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self._diag

    @property
    def diag(self) -> NDArray:
        """Diagonal entries (read-only view for diagonal storage)."""
        return self._data if self._diag else np.diag(self._data)

    def dense(self) -> NDArray:
        """Dense copy of the matrix."""
        return np.diag(self._data) if self._diag else np.array(self._data)

    def norm_inf(self) -> float:
        if self._diag:
            return float(np.max(np.abs(self._data)))
        return float(np.max(np.sum(np.abs(self._data), axis=1)))

    def matvec(self, v: ArrayLike) -> NDArray:
        v = np.asarray(v, dtype=float)
        return self._data * v if self._diag else self._data @ v

    def __array__(self, dtype=None, copy=None):
        out = self.dense()
        return out if dtype is None else out.astype(dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.order == other.order and np.array_equal(self.dense(), other.dense())

    def __hash__(self) -> int:
        return hash((self._diag, self._data.tobytes()))

    def __repr__(self) -> str:
        kind = "diag" if self._diag else "dense"
        return f"SymMatrix({kind}, order={self.order})"


MatrixLike = Union[SymMatrix, ArrayLike]


def as_sym(m: MatrixLike) -> SymMatrix:
    return m if isinstance(m, SymMatrix) else SymMatrix(m)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and the orthogonal basis of eigenvectors."""

    eigenvalues: NDArray
    basis: NDArray

    def reconstruct(self) -> NDArray:
        return (self.basis * self.eigenvalues) @ self.basis.T


def eigen_sym(m: MatrixLike) -> EigenDecomposition:
    """Eigendecomposition ``m = T diag(w) T'`` with ``w`` ascending."""
    m = as_sym(m)
    if m.is_diagonal:
        order = np.argsort(m.diag, kind="stable")
        basis = np.eye(m.order)[:, order]
        return EigenDecomposition(_frozen(m.diag[order]), _frozen(basis))
    try:
        w, t = sla.eigh(m.dense(), driver="evr")
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the failing index in `info`; surface it verbatim
        raise EigenConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return EigenDecomposition(_frozen(w), _frozen(t))


def _scale(m: SymMatrix) -> float:
    return max(1.0, m.norm_inf())


def pivots(m: MatrixLike) -> NDArray | None:
    """Pivots of the LDL' factorization, or ``None`` if Cholesky breaks down."""
    m = as_sym(m)
    if m.is_diagonal:
        return np.array(m.diag)
    try:
        low = np.linalg.cholesky(m.dense())
    except np.linalg.LinAlgError:
        return None
    return np.diag(low) ** 2


def is_pd(m: MatrixLike, tol: float = PD_TOL) -> bool:
    """True iff the smallest factorization pivot exceeds ``tol * max(1, ||m||_inf)``."""
    m = as_sym(m)
    piv = pivots(m)
    if piv is None:
        return False
    return bool(np.min(piv) > tol * _scale(m))


@dataclass(frozen=True)
class PDFactor:
    """Cached Cholesky factor of a positive-definite :class:`SymMatrix`."""

    matrix: SymMatrix
    lower: NDArray | None  # None for diagonal storage

    @property
    def order(self) -> int:
        return self.matrix.order

    def logdet(self) -> float:
        if self.lower is None:
            return float(np.sum(np.log(self.matrix.diag)))
        return float(2.0 * np.sum(np.log(np.diag(self.lower))))

    def solve(self, v: ArrayLike) -> NDArray:
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.order:
            raise ValueError(f"dimension mismatch: order {self.order}, rhs {v.shape[0]}")
        if self.lower is None:
            d = self.matrix.diag
            return v / (d if v.ndim == 1 else d[:, None])
        return sla.cho_solve((self.lower, True), v)

    def inverse(self) -> SymMatrix:
        if self.lower is None:
            return SymMatrix(1.0 / self.matrix.diag, diagonal=True)
        inv = self.solve(np.eye(self.order))
        return SymMatrix(0.5 * (inv + inv.T))

    def whiten(self, x: NDArray) -> NDArray:
        """Rows of ``x`` mapped by ``L^{-1}``, so ``||out||^2 = x' m^{-1} x``."""
        if self.lower is None:
            return x / np.sqrt(self.matrix.diag)
        return sla.solve_triangular(self.lower, x.T, lower=True).T

    def color(self, z: NDArray) -> NDArray:
        """Rows of ``z`` mapped by ``L``; turns N(0, I) rows into N(0, m) rows."""
        if self.lower is None:
            return z * np.sqrt(self.matrix.diag)
        return z @ self.lower.T


def factor(m: MatrixLike, pd_tol: float = PD_TOL) -> PDFactor:
    """Cholesky-factor ``m``, raising :class:`NotPositiveDefinite` on failure."""
    m = as_sym(m)
    if m.is_diagonal:
        if np.min(m.diag) <= pd_tol * _scale(m):
            raise NotPositiveDefinite("diagonal matrix has a non-positive entry")
        return PDFactor(m, None)
    try:
        low = np.linalg.cholesky(m.dense())
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed") from exc
    if np.min(np.diag(low)) ** 2 <= pd_tol * _scale(m):
        raise NotPositiveDefinite("smallest Cholesky pivot below tolerance")
    low.setflags(write=False)
    return PDFactor(m, low)


def chol_logdet(m: MatrixLike, pd_tol: float = PD_TOL) -> float:
    """Natural log of ``det(m)`` from the Cholesky factor."""
    return factor(m, pd_tol).logdet()


def solve_pd(m: MatrixLike, v: ArrayLike, pd_tol: float = PD_TOL) -> NDArray:
    """Solve ``m x = v`` for positive-definite ``m``."""
    v = np.asarray(v, dtype=float)
    m = as_sym(m)
    if v.shape[0] != m.order:
        raise ValueError(f"dimension mismatch: order {m.order}, rhs {v.shape[0]}")
    return factor(m, pd_tol).solve(v)


# -- plain-text matrix format -------------------------------------------------
#
#   dense:     first line "n", then n rows of n reals
#   diagonal:  first line "diag n", then one row of n reals


def _tokens(lines: list[str]) -> list[str]:
    return [ln for ln in (s.strip() for s in lines) if ln and not ln.startswith("#")]


def parse_matrix(lines: list[str]) -> SymMatrix:
    """Parse a matrix block from already-split lines (comments and blanks skipped)."""
    rows = _tokens(lines)
    if not rows:
        raise ValueError("empty matrix block")
    head = rows[0].split()
    if head[0] == "diag":
        if len(head) != 2:
            raise ValueError(f"bad header {rows[0]!r}")
        n = int(head[1])
        vals = [float(t) for r in rows[1:] for t in r.split()]
        if len(vals) != n:
            raise ValueError(f"expected {n} diagonal entries, got {len(vals)}")
        return SymMatrix(np.array(vals), diagonal=True)
    if len(head) != 1:
        raise ValueError(f"bad header {rows[0]!r}")
    n = int(head[0])
    body = [[float(t) for t in r.split()] for r in rows[1:]]
    if len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"expected {n} rows of {n} entries")
    return SymMatrix(np.array(body))


def read_matrix(source: str | Path | io.TextIOBase) -> SymMatrix:
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return parse_matrix(fh.read().splitlines())
    return parse_matrix(source.read().splitlines())


def format_matrix(m: SymMatrix) -> str:
    if m.is_diagonal:
        return f"diag {m.order}\n" + " ".join(repr(float(x)) for x in m.diag) + "\n"
    rows = "\n".join(" ".join(repr(float(x)) for x in row) for row in m.dense())
    return f"{m.order}\n{rows}\n"


def write_matrix(m: SymMatrix, path: str | Path) -> None:
    Path(path).write_text(format_matrix(m))
