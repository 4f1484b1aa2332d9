"""Dictionary learning: K-SVD and its coupled variant that co-trains the
projection matrix.

Both learners alternate OMP sparse coding with sequential rank-one atom
updates.  The coupled variant works on the stacked data [lambda*X; Y]
against the stacked dictionary [lambda*I; P] @ D, refreshing P each outer
iteration with one of the projection optimizers, and mapping every updated
stacked atom back to signal space through the overdetermined system
(lambda^2*I + P.T P) d = [lambda*I, P.T] d_stacked.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .altproj import AltProjConfig, altproj_optimize
from .elad import EladConfig, elad_optimize
from .errors import SingularSystem
from .linalg import ZERO_TOL, as_matrix, normalize_columns
from .matrixio import write_csv
from .pursuit import omp
from .sapiro import sapiro_optimize


@dataclass(frozen=True)
class TrainingSet:
    """Training signals X (n x p), optional projected samples Y (m x p), noise std sigma."""

    X: np.ndarray
    Y: np.ndarray | None = None
    sigma: float = 0.0

    def __post_init__(self):
        X = as_matrix(self.X, "training signals")
        object.__setattr__(self, "X", X)
        if self.Y is not None:
            Y = as_matrix(self.Y, "projected samples")
            if Y.shape[1] != X.shape[1]:
                raise ValueError("X and Y must have the same number of columns")
            object.__setattr__(self, "Y", Y)
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def p(self) -> int:
        return self.X.shape[1]


def sense_training_signals(X, P, sigma: float, seed: int) -> np.ndarray:
    """Simulate the measurement side of a training set: Y = P @ X + sigma * noise."""
    X = as_matrix(X, "training signals")
    P = as_matrix(P, "projection")
    Y = P @ X
    if sigma > 0:
        Y = Y + sigma * np.random.default_rng(seed).standard_normal(Y.shape)
    return Y


@dataclass(frozen=True)
class SapiroInner:
    """Select the spectral (non-iterative) optimizer for the projection step."""

    seed: int = 0


@dataclass(frozen=True)
class FixedProjection:
    """Keep a caller-supplied projection fixed across outer iterations."""

    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", as_matrix(self.P, "projection"))


InnerOptimizer = EladConfig | AltProjConfig | SapiroInner | FixedProjection


@dataclass(frozen=True)
class CoupledConfig:
    lam: float
    S: int
    max_outer_iterations: int
    inner: InnerOptimizer
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.S < 1:
            raise ValueError("S must be >= 1")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")


@dataclass(frozen=True)
class KSVDTrace:
    objective: np.ndarray
    # (outer iteration, atom index) of every unused-atom re-initialization
    replacements: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.objective)

    def to_csv(self, path) -> None:
        write_csv(path, ["iter", "objective"], enumerate(self.objective))


@dataclass(frozen=True)
class CoupledTrace:
    term1: np.ndarray  # ||X - D Theta||_F^2
    term2: np.ndarray  # ||Y - P D Theta||_F^2
    replacements: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.term1)

    def to_csv(self, path) -> None:
        rows = zip(range(len(self.term1)), self.term1, self.term2)
        write_csv(path, ["iter", "term1", "term2"], rows)


def sparse_code(signals: np.ndarray, D: np.ndarray, S: int) -> np.ndarray:
    """Code every column of ``signals`` against D with S-sparse OMP."""
    k = D.shape[1]
    p = signals.shape[1]
    Theta = np.zeros((k, p))
    for i in range(p):
        Theta[:, i] = omp(D, signals[:, i], S).theta_hat.values
    return Theta


def _fix_svd_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nz = np.flatnonzero(u)
    if nz.size and u[nz[0]] < 0:
        return -u, -v
    return u, v


def atom_update_sweep(
    X: np.ndarray,
    D: np.ndarray,
    Theta: np.ndarray,
    rng: np.random.Generator,
) -> list[int]:
    """One in-place pass of rank-one atom updates; returns re-initialized atom indices.

    For every atom j used by at least one signal, the restricted residual
    (with atom j's contribution added back) is fitted by its dominant
    singular pair: the atom becomes the left singular vector, the nonzero
    coefficients become sigma1 times the right one.  The support of each
    coefficient row never grows.  Unused atoms are replaced by the
    worst-represented training column, normalized.
    """
    R = X - D @ Theta
    replaced: list[int] = []
    for j in range(D.shape[1]):
        row = Theta[j]
        omega = np.flatnonzero(row)
        if omega.size == 0:
            worst = int(np.argmax(np.sum(R * R, axis=0)))
            col = X[:, worst]
            nrm = float(np.linalg.norm(col))
            if nrm <= ZERO_TOL:
                col = rng.standard_normal(X.shape[0])
                nrm = float(np.linalg.norm(col))
            D[:, j] = col / nrm
            replaced.append(j)
            continue
        E = R[:, omega] + np.outer(D[:, j], row[omega])
        U, sv, Vt = np.linalg.svd(E, full_matrices=False)
        u, v = _fix_svd_signs(U[:, 0], Vt[0])
        D[:, j] = u
        Theta[j, omega] = sv[0] * v
        R[:, omega] = E - np.outer(u, sv[0] * v)
    return replaced


def purge_duplicate_atoms(
    X: np.ndarray,
    D: np.ndarray,
    Theta: np.ndarray,
    rng: np.random.Generator,
    coherence_cap: float = 0.99,
) -> list[int]:
    """Break up near-duplicate atom pairs (in place); returns replaced indices.

    Two unit atoms with |inner product| above ``coherence_cap`` represent
    the same direction; the later one is re-seeded with the currently
    worst-represented training column (its coefficient row is cleared) so
    the next coding pass can redistribute the work.
    """
    k = D.shape[1]
    R = X - D @ Theta
    order = iter(np.argsort(-np.sum(R * R, axis=0)))
    replaced: list[int] = []
    for i in range(k):
        if i in replaced:
            continue
        for j in range(i + 1, k):
            if j in replaced:
                continue
            if abs(float(D[:, i] @ D[:, j])) > coherence_cap:
                col = None
                for idx in order:
                    col = X[:, idx]
                    if float(np.linalg.norm(col)) > ZERO_TOL:
                        break
                if col is None or float(np.linalg.norm(col)) <= ZERO_TOL:
                    col = rng.standard_normal(X.shape[0])
                D[:, j] = col / float(np.linalg.norm(col))
                Theta[j, :] = 0.0
                replaced.append(j)
    return replaced


def ksvd(
    X, k: int, S: int, iterations: int, seed: int
) -> tuple[np.ndarray, np.ndarray, KSVDTrace]:
    """Learn an n x k dictionary by alternating OMP coding and atom updates.

    Returns ``(D, Theta, trace)`` where the trace holds the representation
    error ||X - D Theta||_F^2 after each outer iteration.  Degenerate
    events (unused atoms, duplicate atoms) are repaired by re-seeding the
    offending atom with the worst-represented training column and show up
    in ``trace.replacements``.
    """
    if isinstance(X, TrainingSet):
        X = X.X
    X = as_matrix(X, "training signals")
    n, p = X.shape
    if k < 1 or S < 1 or iterations < 1:
        raise ValueError("k, S, iterations must all be >= 1")
    if p < k:
        warnings.warn(f"only {p} training signals for {k} atoms; expect poor training")
    rng = np.random.default_rng(seed)
    D = normalize_columns(rng.standard_normal((n, k)))

    objective = np.empty(iterations)
    replacements: list[tuple[int, int]] = []
    Theta = np.zeros((k, p))
    for it in range(iterations):
        Theta = sparse_code(X, D, S)
        for j in atom_update_sweep(X, D, Theta, rng):
            replacements.append((it, j))
        R = X - D @ Theta
        objective[it] = float(np.sum(R * R))
        if it < iterations - 1:
            # Repair degenerate (merged) atoms between iterations; skipping
            # the last one keeps the returned D, Theta consistent with the
            # recorded objective.
            for j in purge_duplicate_atoms(X, D, Theta, rng):
                replacements.append((it, j))
    return D, Theta, KSVDTrace(objective=objective, replacements=tuple(replacements))


def _projection_step(D: np.ndarray, inner: InnerOptimizer, m: int) -> np.ndarray:
    if isinstance(inner, FixedProjection):
        P = inner.P
        if P.shape != (m, D.shape[0]):
            raise ValueError(f"fixed projection shape {P.shape} != ({m}, {D.shape[0]})")
        return P
    if isinstance(inner, SapiroInner):
        return sapiro_optimize(D, m, inner.seed)[0]
    if isinstance(inner, EladConfig):
        if inner.m != m:
            raise ValueError(f"inner optimizer m={inner.m} does not match Y rows m={m}")
        return elad_optimize(D, inner)[0]
    if isinstance(inner, AltProjConfig):
        if inner.m != m:
            raise ValueError(f"inner optimizer m={inner.m} does not match Y rows m={m}")
        return altproj_optimize(D, inner)[0]
    raise TypeError(f"unsupported inner optimizer: {type(inner).__name__}")


def coupled_ksvd(
    training: TrainingSet, k: int, cfg: CoupledConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, CoupledTrace]:
    """Jointly learn projection P and dictionary D from (X, Y) pairs.

    Per outer iteration: refresh P on the current D with the configured
    optimizer; OMP-code the stacked data [lam*X; Y] against [lam*I; P] @ D;
    run the rank-one atom sweep on the stacked problem, recovering each
    signal-space atom through the overdetermined solve and renormalizing
    (coefficient row picks up the pre-normalization atom norm).

    Stops early when the stacked objective ||Z - W D Theta||_F^2 improves
    by less than a relative 1e-6.

    Returns ``(P, D, Theta, trace)``; the trace records both error terms
    per outer iteration.

    Raises
    ------
    SingularSystem
        If lam^2 I + P.T @ P is numerically singular (lam = 0 with a
        rank-deficient P).
    """
    if training.Y is None:
        raise ValueError("coupled learning needs projected samples Y")
    X, Y = training.X, training.Y
    n, p = X.shape
    m = Y.shape[0]
    if p < k:
        warnings.warn(f"only {p} training signals for {k} atoms; expect poor training")
    lam = cfg.lam
    rng = np.random.default_rng(cfg.seed)
    D = normalize_columns(rng.standard_normal((n, k)))

    term1_hist: list[float] = []
    term2_hist: list[float] = []
    replacements: list[tuple[int, int]] = []
    Theta = np.zeros((k, p))
    P = np.zeros((m, n))
    prev_obj = np.inf
    for it in range(cfg.max_outer_iterations):
        P = _projection_step(D, cfg.inner, m)

        M = lam * lam * np.eye(n) + P.T @ P
        w = np.linalg.eigvalsh(M)
        if w[-1] <= 0.0 or w[0] <= 1e-12 * w[-1]:
            raise SingularSystem("lam^2 I + P.T P is numerically singular")
        M_factor = scipy.linalg.cho_factor(M, lower=True)

        W = np.vstack([lam * np.eye(n), P])
        # `+ 0.0` canonicalizes -0.0 from lam * (negative): at lam = 0 the
        # top block must not leak X's sign bits into LAPACK branch choices,
        # or Theta loses its exact invariance to X.
        Z = np.vstack([lam * X + 0.0, Y])
        WD = W @ D
        Theta = sparse_code(Z, WD, cfg.S)
        R = Z - WD @ Theta
        for j in range(k):
            row = Theta[j]
            omega = np.flatnonzero(row)
            if omega.size == 0:
                worst = int(np.argmax(np.sum(R * R, axis=0)))
                d = scipy.linalg.cho_solve(M_factor, W.T @ Z[:, worst])
                nrm = float(np.linalg.norm(d))
                if nrm <= ZERO_TOL:
                    d = rng.standard_normal(n)
                    nrm = float(np.linalg.norm(d))
                D[:, j] = d / nrm
                WD[:, j] = W @ D[:, j]
                replacements.append((it, j))
                continue
            E = R[:, omega] + np.outer(WD[:, j], row[omega])
            U, sv, Vt = np.linalg.svd(E, full_matrices=False)
            u, v = _fix_svd_signs(U[:, 0], Vt[0])
            d = scipy.linalg.cho_solve(M_factor, W.T @ u)
            nrm = float(np.linalg.norm(d))
            if nrm <= ZERO_TOL:
                d = rng.standard_normal(n)
                nrm = float(np.linalg.norm(d))
                Theta[j, omega] = 0.0
                D[:, j] = d / nrm
                WD[:, j] = W @ D[:, j]
                R[:, omega] = E
                replacements.append((it, j))
                continue
            D[:, j] = d / nrm
            Theta[j, omega] = sv[0] * v * nrm
            WD[:, j] = W @ D[:, j]
            R[:, omega] = E - np.outer(WD[:, j], Theta[j, omega])

        dtheta = D @ Theta
        t1 = float(np.sum((X - dtheta) ** 2))
        t2 = float(np.sum((Y - P @ dtheta) ** 2))
        term1_hist.append(t1)
        term2_hist.append(t2)
        obj = lam * lam * t1 + t2
        # Convergence = small relative CHANGE.  The projection refresh can
        # bump the second term upward (it optimizes incoherence, not the
        # fit to Y), so a one-sided improvement test would stop at the
        # first such bump instead of riding through it.
        if abs(prev_obj - obj) < 1e-6 * max(prev_obj, 1e-300):
            break
        prev_obj = obj

    trace = CoupledTrace(
        term1=np.asarray(term1_hist),
        term2=np.asarray(term2_hist),
        replacements=tuple(replacements),
    )
    return P, D, Theta, trace
