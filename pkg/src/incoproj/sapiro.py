"""Non-iterative projection design via the eigen-structure of D @ D.T.

Works in the eigenbasis of the frame operator: with D Dᵀ = V diag(λ) Vᵀ
and Γ = P V, the effective Gram is close to identity when
‖diag(λ) − diag(λ) ΓᵀΓ diag(λ)‖_F² is small.  The optimizer performs one
pass of m sequential rank-one updates, each absorbing the dominant
component of the current misfit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum
from .linalg import as_matrix, eigh_descending, top_eigh

# Eigenvalues at or below this fraction of the largest count as zero.
RANK_TOL = 1e-10


@dataclass
class SapiroState:
    """Spectral data plus the current iterate.

    ``V`` holds eigenvectors of D Dᵀ (columns, eigenvalues non-increasing),
    ``lambdas`` the clamped eigenvalues with trailing near-zeros set to 0
    exactly, ``gamma`` the current m x n iterate (P = gamma @ V.T), and
    ``r`` the number of zero eigenvalues.
    """

    V: np.ndarray
    lambdas: np.ndarray
    gamma: np.ndarray
    r: int


def spectral_state(D, m: int, seed: int) -> SapiroState:
    """Eigendecompose D Dᵀ and draw the Gaussian starting iterate."""
    Dd = as_matrix(D, "dictionary")
    n = Dd.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m={m} not in [1, {n}]")
    w, V = eigh_descending(Dd @ Dd.T)
    w = np.clip(w, 0.0, None)
    if w[0] <= 1e-12:
        raise DegenerateSpectrum("all eigenvalues of D @ D.T are numerically zero")
    zero = w <= RANK_TOL * w[0]
    w[zero] = 0.0
    P0 = np.random.default_rng(seed).standard_normal((m, n))
    return SapiroState(V=V, lambdas=w, gamma=P0 @ V, r=int(np.count_nonzero(zero)))


def sapiro_objective(lambdas, Gamma) -> float:
    """Squared Frobenius misfit ‖diag(λ) − diag(λ) ΓᵀΓ diag(λ)‖_F².

    ``lambdas`` may be a 1-D vector of eigenvalues or the equivalent
    diagonal matrix.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim == 2:
        lam = np.diag(lam)
    Gamma = as_matrix(Gamma, "gamma")
    if Gamma.shape[1] != lam.size:
        raise ValueError("Gamma column count must match the eigenvalue count")
    R = -(lam[:, None] * (Gamma.T @ Gamma) * lam[None, :])
    R[np.diag_indices_from(R)] += lam
    return float(np.sum(R * R))


def sapiro_optimize(D, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One pass of m rank-one updates; returns (P, objective trace).

    For each row j of Γ: form the misfit E_j = diag(λ) − Σ_{i≠j} v_i v_iᵀ
    (v_i = row i of Γ scaled entrywise by λ), take its largest eigenpair
    (ξ₁, u₁), set v_j = sqrt(max(ξ₁, 0))·u₁, and write v_j back into row j
    componentwise as v_j_i / λ_i wherever λ_i > 0 (components with λ_i = 0
    keep their initial values).  Finally P = Γ Vᵀ.

    The trace holds the objective after each of the m updates.
    """
    state = spectral_state(D, m, seed)
    lam = state.lambdas
    nz = lam > 0.0
    trace = np.empty(m)
    for j in range(m):
        scaled = state.gamma * lam[None, :]  # row i = v_i
        vj = scaled[j]
        E = -(scaled.T @ scaled) + np.outer(vj, vj)
        E[np.diag_indices_from(E)] += lam
        xi, U = top_eigh(E, 1)
        v_new = np.sqrt(max(float(xi[0]), 0.0)) * U[:, 0]
        state.gamma[j, nz] = v_new[nz] / lam[nz]
        trace[j] = sapiro_objective(lam, state.gamma)
    P = state.gamma @ state.V.T
    return P, trace
