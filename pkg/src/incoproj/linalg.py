"""Dense linear-algebra primitives shared by the projection optimizers.

Everything here operates on plain float64 ``numpy`` arrays.  Symmetric
eigendecompositions go through :func:`eigh_descending`, which fixes the
eigenvector sign convention so that repeated runs (and repeated calls on
the same data) produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidRank, NotPSD, ZeroColumn

# Columns with norm at or below this are treated as zero.
ZERO_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    if not isinstance(a, np.ndarray):
        a = getattr(a, "data", a)
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class Dictionary:
    """n x k matrix of atoms (columns). Construction rejects zero columns."""

    data: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.data, "dictionary")
        norms = column_norms(m)
        bad = np.flatnonzero(norms <= ZERO_TOL)
        if bad.size:
            raise ZeroColumn(int(bad[0]), "dictionary atom")
        object.__setattr__(self, "data", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


@dataclass(frozen=True)
class ProjectionMatrix:
    """m x n sensing operator mapping signals to compressed measurements."""

    data: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.data, "projection")
        if m.shape[0] < 1:
            raise ValueError("projection needs at least one row")
        object.__setattr__(self, "data", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def m(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


def column_norms(M: np.ndarray) -> np.ndarray:
    return np.linalg.norm(M, axis=0)


def normalize_columns(M) -> np.ndarray:
    """Scale every column to unit Euclidean norm.

    Raises
    ------
    ZeroColumn
        If any column norm is <= ``ZERO_TOL``; the error carries the index
        of the first offending column.
    """
    M = as_matrix(M)
    norms = column_norms(M)
    bad = np.flatnonzero(norms <= ZERO_TOL)
    if bad.size:
        raise ZeroColumn(int(bad[0]))
    return M / norms


def gram(M) -> np.ndarray:
    """Gram matrix of the column-normalized input: symmetric, unit diagonal."""
    N = normalize_columns(M)
    G = N.T @ N
    G = 0.5 * (G + G.T)
    np.fill_diagonal(G, 1.0)
    return G


def eigh_descending(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix with a fixed convention.

    Returns ``(w, V)`` with eigenvalues ``w`` sorted non-increasing and
    each eigenvector's first nonzero component made positive.  The input
    is symmetrized before factorization.
    """
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    w = w[::-1]
    V = V[:, ::-1]
    return w, _fix_signs(V)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first nonzero entry is positive."""
    V = np.array(V)
    first = np.argmax(V != 0.0, axis=0)
    lead = V[first, np.arange(V.shape[1])]
    V[:, lead < 0] *= -1.0
    return V


def top_eigh(A: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Largest-``m`` eigenpairs of a symmetric matrix, descending, sign-fixed."""
    A = 0.5 * (A + A.T)
    k = A.shape[0]
    if m >= k:
        return eigh_descending(A)
    w, V = scipy.linalg.eigh(A, subset_by_index=(k - m, k - 1))
    w = w[::-1]
    V = V[:, ::-1]
    return w, _fix_signs(V)


def symmetric_rank_truncate(G, m: int) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix of rank at most ``m``.

    Keeps the ``m`` algebraically largest eigenvalues, clamps negatives to
    zero, and rebuilds.  Idempotent for fixed ``m`` up to rounding.
    """
    G = as_matrix(G, "gram")
    k = G.shape[0]
    if G.shape[1] != k:
        raise ValueError("square matrix required")
    if not 1 <= m <= k:
        raise InvalidRank(f"rank {m} not in [1, {k}]")
    w, V = top_eigh(G, m)
    w = np.clip(w, 0.0, None)
    out = (V * w) @ V.T
    return 0.5 * (out + out.T)


def sqrt_factor(G, m: int) -> np.ndarray:
    """Factor a PSD matrix of rank <= ``m`` as ``S.T @ S`` with ``S`` of shape (m, k).

    Rows of ``S`` beyond the numerical rank are zero.

    Raises
    ------
    NotPSD
        If the smallest retained eigenvalue is below ``-1e-8`` times the
        largest one (with a small absolute floor), i.e. the matrix is not
        positive semidefinite to working accuracy.
    """
    G = as_matrix(G, "gram")
    k = G.shape[0]
    if G.shape[1] != k:
        raise ValueError("square matrix required")
    if not 1 <= m <= k:
        raise InvalidRank(f"rank {m} not in [1, {k}]")
    w, V = top_eigh(G, m)
    lam_max = max(float(w[0]), 0.0)
    if float(w[-1]) < -1e-8 * lam_max - 1e-12:
        raise NotPSD(f"eigenvalue {w[-1]:.3e} too negative for sqrt factor")
    w = np.clip(w, 0.0, None)
    return np.sqrt(w)[:, None] * V.T


def lsq_projection(S, D) -> np.ndarray:
    """Least-squares fit of ``P`` minimizing ||S - P @ D||_F (via pseudo-inverse)."""
    S = as_matrix(S, "target")
    D = as_matrix(D, "dictionary")
    if S.shape[1] != D.shape[1]:
        raise ValueError("target and dictionary must have the same number of columns")
    return S @ np.linalg.pinv(D)
