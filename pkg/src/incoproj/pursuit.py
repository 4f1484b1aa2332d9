"""Sparse recovery: OMP, Basis Pursuit, and an exhaustive l0 oracle.

These solvers double as benchmark reconstruction engines and as the
verification oracles for the uniqueness / recovery guarantee at sparsity
below (1 + 1/mu) / 2.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import NotFound, TooLarge, ZeroColumn
from .linalg import ZERO_TOL, as_matrix, column_norms
from .lp import solve_standard_lp

DEFAULT_LP_TOL = 1e-7
# Supports enumerated by the exhaustive oracle are capped at this count.
ENUMERATION_GUARD = 10**6


class RecoveryStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SparseVector:
    """Length-k coefficient vector; support is the sorted set of nonzero indices."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("sparse vector contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @property
    def sparsity(self) -> int:
        return int(self.support.size)


@dataclass(frozen=True)
class RecoveryResult:
    theta_hat: SparseVector
    residual_norm: float
    iterations_or_pivots: int
    status: RecoveryStatus
    unique: bool | None = None


def default_residual_tol(y: np.ndarray) -> float:
    return 1e-9 * float(np.linalg.norm(y))


def omp(Dhat, y, S: int, residual_tol: float | None = None) -> RecoveryResult:
    """Orthogonal Matching Pursuit with full least-squares re-solve per step.

    Selects the column with the largest normalized correlation against the
    current residual (ties go to the smallest index), re-fits on the grown
    support, and stops at support size ``S`` or residual norm at or below
    ``residual_tol`` (default 1e-9 * ||y||).
    """
    Dh = as_matrix(Dhat, "effective dictionary")
    y = np.asarray(y, dtype=float).ravel()
    if y.size != Dh.shape[0]:
        raise ValueError("measurement length does not match matrix rows")
    if S < 0:
        raise ValueError("sparsity budget must be >= 0")
    norms = column_norms(Dh)
    bad = np.flatnonzero(norms <= ZERO_TOL)
    if bad.size:
        raise ZeroColumn(int(bad[0]), "effective dictionary")
    tol = default_residual_tol(y) if residual_tol is None else float(residual_tol)

    support: list[int] = []
    coef = np.empty(0)
    r = y.copy()
    while len(support) < S and float(np.linalg.norm(r)) > tol:
        scores = np.abs(Dh.T @ r) / norms
        if support:
            scores[support] = -1.0
        j = int(np.argmax(scores))  # first occurrence: smallest index on ties
        if scores[j] <= 1e-13 * max(float(np.linalg.norm(r)), 1e-300):
            break  # residual orthogonal to every unused column; no progress possible
        support.append(j)
        sub = Dh[:, support]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        r = y - sub @ coef

    theta = np.zeros(Dh.shape[1])
    if support:
        theta[support] = coef
    residual = float(np.linalg.norm(y - Dh @ theta))
    status = RecoveryStatus.CONVERGED if residual <= tol else RecoveryStatus.MAX_ITER
    return RecoveryResult(SparseVector(theta), residual, len(support), status)


def basis_pursuit(Dhat, y, lp_tol: float = DEFAULT_LP_TOL) -> RecoveryResult:
    """l1-minimal solution of Dhat @ theta = y via the split u - v linear program.

    The program min 1@(u+v) s.t. [Dhat, -Dhat]@[u; v] = y, u,v >= 0 is
    solved with the in-package interior-point method and the answer is
    certified: equality residual, dual feasibility, duality gap, and the
    match between ||theta||_1 and the LP objective must all be within
    ``lp_tol``.  Status is INFEASIBLE when y is not in the column span,
    MAX_ITER when the solver stopped without a certificate.
    """
    Dh = as_matrix(Dhat, "effective dictionary")
    y = np.asarray(y, dtype=float).ravel()
    m, k = Dh.shape
    if y.size != m:
        raise ValueError("measurement length does not match matrix rows")
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return RecoveryResult(SparseVector(np.zeros(k)), 0.0, 0, RecoveryStatus.CONVERGED)

    z, *_ = np.linalg.lstsq(Dh, y, rcond=None)
    if float(np.linalg.norm(Dh @ z - y)) > lp_tol * max(1.0, ynorm):
        return RecoveryResult(
            SparseVector(np.zeros(k)), ynorm, 0, RecoveryStatus.INFEASIBLE
        )

    A = np.hstack([Dh, -Dh])
    c = np.ones(2 * k)
    res = solve_standard_lp(c, A, y, tol=min(1e-10, 0.01 * lp_tol), max_iter=100)
    theta = res.x[:k] - res.x[k:]

    objective = float(c @ res.x)
    primal_ok = float(np.linalg.norm(Dh @ theta - y)) <= lp_tol * max(1.0, ynorm)
    dual_ok = float(np.max(np.abs(Dh.T @ res.lam))) <= 1.0 + lp_tol
    gap_ok = abs(objective - float(y @ res.lam)) <= lp_tol * (1.0 + abs(objective))
    l1_ok = abs(float(np.sum(np.abs(theta))) - objective) <= lp_tol * (1.0 + abs(objective))
    certified = primal_ok and dual_ok and gap_ok and l1_ok

    if certified:
        # Zero out numerically-dead entries, keeping feasibility intact.
        peak = float(np.max(np.abs(theta)))
        if peak > 0.0:
            cleaned = np.where(np.abs(theta) < 1e-8 * peak, 0.0, theta)
            if float(np.linalg.norm(Dh @ cleaned - y)) <= lp_tol * max(1.0, ynorm):
                theta = cleaned

    residual = float(np.linalg.norm(y - Dh @ theta))
    status = RecoveryStatus.CONVERGED if certified else RecoveryStatus.MAX_ITER
    return RecoveryResult(SparseVector(theta), residual, res.iterations, status)


def exhaustive_sparsest(Dhat, y, S_max: int, tol: float) -> RecoveryResult:
    """Brute-force minimum-l0 oracle: try every support of size 1, 2, ... S_max.

    Returns the first (smallest) support size with least-squares residual
    at or below ``tol``; the lexicographically first such support supplies
    the coefficients.  The ``unique`` flag is True when every admissible
    support of the winning size yields the same coefficient vector (entry
    differences within ``tol``).

    Raises
    ------
    TooLarge
        If the number of candidate supports exceeds 10^6.
    NotFound
        If no support of size <= S_max fits.
    """
    Dh = as_matrix(Dhat, "effective dictionary")
    y = np.asarray(y, dtype=float).ravel()
    m, k = Dh.shape
    if y.size != m:
        raise ValueError("measurement length does not match matrix rows")
    if S_max < 0:
        raise ValueError("S_max must be >= 0")
    total = sum(comb(k, s) for s in range(1, S_max + 1))
    if total > ENUMERATION_GUARD:
        raise TooLarge(f"{total} supports to enumerate exceeds {ENUMERATION_GUARD}")

    if float(np.linalg.norm(y)) <= tol:
        return RecoveryResult(
            SparseVector(np.zeros(k)), float(np.linalg.norm(y)), 1, RecoveryStatus.CONVERGED,
            unique=True,
        )

    tested = 0
    for s in range(1, S_max + 1):
        hits: list[np.ndarray] = []
        for support in itertools.combinations(range(k), s):
            tested += 1
            sub = Dh[:, support]
            coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
            if float(np.linalg.norm(y - sub @ coef)) <= tol:
                theta = np.zeros(k)
                theta[list(support)] = coef
                hits.append(theta)
        if hits:
            first = hits[0]
            unique = all(float(np.max(np.abs(h - first))) <= tol for h in hits[1:])
            residual = float(np.linalg.norm(y - Dh @ first))
            return RecoveryResult(
                SparseVector(first), residual, tested, RecoveryStatus.CONVERGED,
                unique=unique,
            )
    raise NotFound(f"no support of size <= {S_max} fits within tol={tol}")
