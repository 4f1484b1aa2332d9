"""Iterative projection design via Gram shrinkage (Elad's algorithm).

Minimizes the t-averaged coherence of the effective dictionary P @ D by
repeatedly shrinking the off-diagonal Gram entries, forcing the Gram back
to rank m, and re-fitting P by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroColumn
from .linalg import (
    as_matrix,
    gram,
    lsq_projection,
    sqrt_factor,
    symmetric_rank_truncate,
)
from .coherence import offdiag_magnitudes, relative_threshold
from .matrixio import write_csv


@dataclass(frozen=True)
class FixedThreshold:
    """Use the same absolute threshold t at every iteration."""

    t: float

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("fixed threshold must be in (0, 1)")


@dataclass(frozen=True)
class RelativeThreshold:
    """Re-pick t each iteration so ~percent% of Gram magnitudes lie above it."""

    percent: float

    def __post_init__(self):
        if not 0.0 < self.percent < 100.0:
            raise ValueError("percent must be in (0, 100)")


@dataclass(frozen=True)
class EladConfig:
    threshold_mode: FixedThreshold | RelativeThreshold
    gamma: float
    iterations: int
    m: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.threshold_mode, (FixedThreshold, RelativeThreshold)):
            raise ValueError("threshold_mode must be FixedThreshold or RelativeThreshold")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")


@dataclass(frozen=True)
class OptimizerTrace:
    """Per-iteration diagnostics: threshold used, and mu_t / mu of P @ D after the update.

    ``mu_t`` entries are NaN for iterations where no off-diagonal magnitude
    exceeded the threshold.
    """

    mu_t: np.ndarray
    mu: np.ndarray
    threshold: np.ndarray

    def __len__(self) -> int:
        return len(self.mu_t)

    def to_csv(self, path) -> None:
        rows = zip(range(len(self.mu_t)), self.mu_t, self.mu, self.threshold)
        write_csv(path, ["iter", "mu_t", "mu", "threshold"], rows)


def shrink_elad(g, t: float, gamma: float):
    """Entrywise shrinkage: |g| >= t -> gamma*g; t > |g| >= gamma*t -> gamma*t*sign(g); else g.

    Odd, monotone non-decreasing, and never amplifies an entry.  Scalar in,
    scalar out; arrays are processed elementwise.
    """
    if not t > 0.0:
        raise ValueError("t must be positive")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    arr = np.asarray(g, dtype=float)
    mag = np.abs(arr)
    out = np.where(mag >= t, gamma * arr, np.where(mag >= gamma * t, gamma * t * np.sign(arr), arr))
    if np.isscalar(g) or arr.ndim == 0:
        return float(out)
    return out


def _shrink_offdiag(G: np.ndarray, t: float, gamma: float) -> np.ndarray:
    """Apply shrink_elad off the diagonal, leaving the (unit) diagonal alone."""
    out = shrink_elad(G, t, gamma)
    np.fill_diagonal(out, np.diag(G))
    return out


def elad_optimize(D, cfg: EladConfig) -> tuple[np.ndarray, OptimizerTrace]:
    """Run the shrinkage loop for cfg.iterations and return (P, trace).

    Each iteration: normalize the columns of P @ D, build the Gram, pick
    the threshold (fixed or from the current Gram's order statistics),
    shrink the off-diagonals, truncate to rank m, take the m-row square
    root, and solve the least-squares problem for the next P.

    The trace records, for every iteration, the threshold used and the
    mu_t / mu of the updated effective dictionary at that threshold.

    Raises
    ------
    ZeroColumn
        If P @ D develops a numerically zero column (degenerate P); the
        error message carries the iteration index.
    """
    Dd = as_matrix(D, "dictionary")
    n = Dd.shape[0]
    if cfg.m > n:
        raise ValueError(f"m={cfg.m} exceeds signal dimension n={n}")
    if Dd.shape[1] < 2:
        raise ValueError("need at least two atoms to optimize coherence")
    rng = np.random.default_rng(cfg.seed)
    P = rng.standard_normal((cfg.m, n))

    mu_t_hist: list[float] = []
    mu_hist: list[float] = []
    thr_hist: list[float] = []
    for q in range(cfg.iterations):
        try:
            G = gram(P @ Dd)
        except ZeroColumn as exc:
            raise ZeroColumn(exc.index, f"effective dictionary at iteration {q}") from exc
        if isinstance(cfg.threshold_mode, FixedThreshold):
            t = cfg.threshold_mode.t
        else:
            t = relative_threshold(G, cfg.threshold_mode.percent).value
            if t <= 0.0:
                # Order statistic ran off the end; fall back to the smallest
                # magnitude so the shrink still has a valid positive t.
                mags = offdiag_magnitudes(G)
                t = max(float(mags.min()), 1e-12)
        shrunk = _shrink_offdiag(G, t, cfg.gamma)
        reduced = symmetric_rank_truncate(shrunk, cfg.m)
        S = sqrt_factor(reduced, cfg.m)
        P = lsq_projection(S, Dd)

        try:
            Gnew = gram(P @ Dd)
        except ZeroColumn as exc:
            raise ZeroColumn(exc.index, f"effective dictionary at iteration {q}") from exc
        mags = offdiag_magnitudes(Gnew)
        above = mags[mags > t]
        mu_t_hist.append(float(above.mean()) if above.size else float("nan"))
        mu_hist.append(min(float(mags.max()), 1.0))
        thr_hist.append(float(t))

    trace = OptimizerTrace(
        mu_t=np.asarray(mu_t_hist), mu=np.asarray(mu_hist), threshold=np.asarray(thr_hist)
    )
    return P, trace
