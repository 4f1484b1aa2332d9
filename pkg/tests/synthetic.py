"""Builders for planted test instances shared across the test modules."""

import numpy as np

from incoproj import normalize_columns
from incoproj.altproj import normalize_gram, project_convex, project_rank
from incoproj.linalg import sqrt_factor


def gaussian_dictionary(n, k, seed):
    rng = np.random.default_rng(seed)
    return normalize_columns(rng.standard_normal((n, k)))


def incoherent_frame(n, k, seed, t=0.3, iters=300):
    """A unit-norm n x k frame with low mutual coherence (typically near t).

    Built by alternating the entrywise clip with the rank-n spectral
    truncation on a random symmetric seed Gram, then factoring.  Gives
    planted dictionaries that greedy pursuit can actually recover against,
    unlike raw Gaussian draws whose coherence is far too high at this size.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, k))
    G = (A + A.T) / 2
    np.fill_diagonal(G, 1.0)
    for _ in range(iters):
        G = project_rank(project_convex(G, t), n)
    return normalize_columns(sqrt_factor(normalize_gram(G), n))


def planted_signals(D, S, count, seed, margin=0.0):
    """Draw `count` signals that are exactly S-sparse in D.

    Returns (Theta, X).  With margin > 0 every nonzero coefficient is
    pushed that far away from zero.
    """
    D = np.asarray(D)
    k = D.shape[1]
    rng = np.random.default_rng(seed)
    Theta = np.zeros((k, count))
    for i in range(count):
        sup = rng.choice(k, S, replace=False)
        vals = rng.standard_normal(S)
        if margin > 0.0:
            vals = vals + np.sign(vals) * margin
        Theta[sup, i] = vals
    return Theta, D @ Theta
