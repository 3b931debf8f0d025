"""Small dense linear algebra, quadrature and differentiation kernels.

Everything here is a pure function of its arguments. The eigen and linear
solvers are thin contracts over LAPACK (via scipy) with the conventions the
physics modules rely on: ascending eigenvalues, a deterministic eigenvector
phase, and explicit singularity detection.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import (InvalidFunction, InvalidMatrix, SingularSystem,
                     ToleranceNotMet)

__all__ = [
    "SymTridiag", "HermitianMatrix", "QuadratureSpec",
    "eig_sym_tridiag", "eig_hermitian", "solve_complex_linear",
    "integrate_adaptive", "central_difference", "fix_phase",
]


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix given by its two diagonals."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        e = np.asarray(self.offdiag, dtype=float).reshape(-1)
        if d.size < 1:
            raise InvalidMatrix("matrix dimension must be >= 1")
        if e.size != d.size - 1:
            raise InvalidMatrix(
                f"offdiag has length {e.size}, expected {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise InvalidMatrix("non-finite matrix entries")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def norm_inf(self) -> float:
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())


@dataclass(frozen=True)
class HermitianMatrix:
    """Small complex Hermitian matrix, stored as its upper triangle.

    Only ``upper[i, j]`` with ``i <= j`` is read; the lower triangle is
    implied, so Hermiticity holds by construction. Diagonal entries are
    taken as real.
    """

    upper: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.triu(np.asarray(self.upper, dtype=complex))
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise InvalidMatrix("expected a non-empty square matrix")
        if not np.all(np.isfinite(u)):
            raise InvalidMatrix("non-finite matrix entries")
        u[np.diag_indices(u.shape[0])] = u.diagonal().real
        object.__setattr__(self, "upper", u)

    @classmethod
    def from_dense(cls, m) -> "HermitianMatrix":
        return cls(np.asarray(m, dtype=complex))

    @property
    def dim(self) -> int:
        return self.upper.shape[0]

    def to_dense(self) -> np.ndarray:
        u = self.upper
        return u + np.triu(u, 1).conj().T


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


def fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate every column so its largest-magnitude entry is real positive.

    Ties between equal magnitudes go to the lowest index.
    """
    vecs = np.array(vecs, copy=True)
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    if np.iscomplexobj(vecs):
        vecs /= pivots / np.abs(pivots)
    else:
        vecs *= np.sign(pivots)
    return vecs


def eig_sym_tridiag(m: SymTridiag, k: int | None = None):
    """Eigenpairs of a symmetric tridiagonal matrix, ascending.

    With ``k`` given only the ``k`` lowest pairs are computed.
    """
    if k is None or k >= m.dim:
        vals, vecs = scipy.linalg.eigh_tridiagonal(m.diag, m.offdiag)
    else:
        vals, vecs = scipy.linalg.eigh_tridiagonal(
            m.diag, m.offdiag, select="i", select_range=(0, k - 1))
    return vals, fix_phase(vecs)


def eig_hermitian(m: HermitianMatrix):
    """Ascending eigenvalues and a unitary eigenvector matrix (columns)."""
    if m.dim > 16:
        raise InvalidMatrix("eig_hermitian is meant for dimension <= 16")
    vals, vecs = np.linalg.eigh(m.to_dense(), UPLO="U")
    return vals, fix_phase(vecs)


def solve_complex_linear(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises SingularSystem when a pivot falls below ``1e-14 * ||a||_inf``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix("coefficient matrix must be square")
    if a.shape[0] > 64:
        raise InvalidMatrix("solve_complex_linear is meant for dimension <= 64")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidMatrix("non-finite entries in linear system")
    norm = np.abs(a).sum(axis=1).max()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    smallest = np.abs(np.diag(lu)).min()
    if norm == 0 or smallest < 1e-14 * norm:
        raise SingularSystem(
            f"numerically singular system (pivot {smallest:.3e}, norm {norm:.3e})")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def integrate_adaptive(f: Callable[[float], float], lo: float, hi: float,
                       spec: QuadratureSpec = QuadratureSpec(),
                       points: Sequence[float] | None = None):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    Returns ``(value, err_estimate)``. ``points`` are interior break points
    (kinks, peaks) handed to the subdivision as initial cuts.
    """
    if not lo <= hi:
        raise ValueError("integrate_adaptive needs lo <= hi")
    if lo == hi:
        return 0.0, 0.0
    if points is not None:
        points = sorted({float(p) for p in points if lo < p < hi}) or None
    value, err, info, *rest = scipy.integrate.quad(
        f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, points=points, full_output=1)
    if not np.isfinite(value):
        raise InvalidFunction("integrand produced non-finite values")
    # quad appends a message only when it flagged a problem
    if rest and err > max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise ToleranceNotMet(f"quadrature did not converge: {rest[0]}",
                              value=value, err_estimate=err)
    return value, err


def central_difference(f: Callable[[float], float], x: float, h: float = 1e-5) -> float:
    if not h > 0:
        raise ValueError("step h must be > 0")
    fp, fm = f(x + h), f(x - h)
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise InvalidFunction(f"non-finite function value near x={x}")
    return (fp - fm) / (2.0 * h)
