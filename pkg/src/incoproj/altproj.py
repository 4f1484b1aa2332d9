"""Projection design by alternating projections on the Gram matrix.

Alternates between two sets of k x k symmetric matrices: the convex set
where off-diagonals are capped at t in magnitude and the diagonal is at
least 1, and the non-convex set of PSD matrices with rank at most m.
After the loop the working Gram is normalized to unit diagonal and a
projection matrix realizing it (in the least-squares sense) is recovered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDiagonal, EmptyAverage, RankExceeded
from .coherence import gram_t_average, offdiag_magnitudes
from .linalg import as_matrix, lsq_projection, sqrt_factor, symmetric_rank_truncate
from .matrixio import write_csv


@dataclass(frozen=True)
class AltProjConfig:
    t: float
    m: int
    iterations: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("t must be in (0, 1)")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class AltProjTrace:
    """Per-iteration max off-diagonal magnitude and mu_t of the normalized Gram."""

    max_offdiag: np.ndarray
    mu_t: np.ndarray

    def __len__(self) -> int:
        return len(self.max_offdiag)

    def to_csv(self, path) -> None:
        rows = zip(range(len(self.max_offdiag)), self.max_offdiag, self.mu_t)
        write_csv(path, ["iter", "max_offdiag", "mu_t"], rows)


def project_convex(G, t: float) -> np.ndarray:
    """Cap off-diagonal magnitudes at t; raise sub-unit diagonal entries to 1.

    Idempotent, and entrywise non-expansive on the off-diagonals.
    """
    G = as_matrix(G, "gram")
    out = np.where(np.abs(G) > t, t * np.sign(G), G)
    np.fill_diagonal(out, np.maximum(np.diag(G), 1.0))
    return out


def project_rank(G, m: int) -> np.ndarray:
    """Nearest PSD matrix of rank <= m (delegates to symmetric_rank_truncate)."""
    return symmetric_rank_truncate(G, m)


def normalize_gram(G) -> np.ndarray:
    """Rescale to unit diagonal: diag(1/sqrt(g_ii)) @ G @ diag(1/sqrt(g_jj)).

    Raises
    ------
    DegenerateDiagonal
        If any diagonal entry is <= 1e-12.
    """
    G = as_matrix(G, "gram")
    d = np.diag(G).copy()
    bad = np.flatnonzero(d <= 1e-12)
    if bad.size:
        raise DegenerateDiagonal(int(bad[0]))
    s = 1.0 / np.sqrt(d)
    out = G * s[:, None] * s[None, :]
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out


def recover_projection(G, D, m: int) -> np.ndarray:
    """Recover P whose effective Gram best matches G (least squares).

    Factors G = SᵀS with S of m rows and fits P to minimize ‖S − P D‖_F.
    Exact equality DᵀPᵀPD = G is not guaranteed; residual minimality is.

    Raises
    ------
    RankExceeded
        If G has numerical rank > m.
    NotPSD
        Propagated from the square-root factorization.
    """
    G = as_matrix(G, "gram")
    k = G.shape[0]
    if k > m:
        w = np.linalg.eigvalsh(0.5 * (G + G.T))
        lam_max = max(float(w[-1]), 0.0)
        if float(w[k - m - 1]) > 1e-8 * lam_max + 1e-12:
            raise RankExceeded(f"numerical rank exceeds {m}")
    S = sqrt_factor(G, m)
    return lsq_projection(S, D)


def altproj_optimize(D, cfg: AltProjConfig) -> tuple[np.ndarray, AltProjTrace]:
    """Alternate convex / rank projections from a seeded random symmetric start.

    Returns the recovered projection matrix and a per-iteration trace of
    the normalized working Gram's max off-diagonal magnitude and its mu_t
    at cfg.t (NaN when nothing exceeds t).
    """
    Dd = as_matrix(D, "dictionary")
    k = Dd.shape[1]
    if k < 2:
        raise ValueError("need at least two atoms to optimize coherence")
    if cfg.m > k:
        raise ValueError(f"m={cfg.m} exceeds atom count k={k}")
    rng = np.random.default_rng(cfg.seed)
    A = rng.standard_normal((k, k))
    G = 0.5 * (A + A.T)
    np.fill_diagonal(G, 1.0)

    max_off = np.empty(cfg.iterations)
    mu_t = np.empty(cfg.iterations)
    for q in range(cfg.iterations):
        G = project_convex(G, cfg.t)
        G = project_rank(G, cfg.m)
        Gn = normalize_gram(G)
        max_off[q] = float(offdiag_magnitudes(Gn).max())
        try:
            mu_t[q] = gram_t_average(Gn, cfg.t)
        except EmptyAverage:
            mu_t[q] = float("nan")

    P = recover_projection(normalize_gram(G), Dd, cfg.m)
    return P, AltProjTrace(max_offdiag=max_off, mu_t=mu_t)
