"""Random problem instances and candidate functions for property checks."""
import numpy as np
from scipy.stats import unitary_group

from .data import (NevanlinnaPickData, SarasonData, compressed_shift, kernel_gram,
                   metric_norm, polynomial_in)
from .scattering import SolutionEvaluator

__all__ = [
    "random_unitary",
    "random_contraction",
    "random_schur_function",
    "random_points",
    "random_np_data",
    "random_sarason_data",
]


def random_unitary(n, rng):
    rng = np.random.default_rng(rng)
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_contraction(q, p, rng, norm=0.9):
    """Complex Gaussian ``q x p`` matrix rescaled to spectral norm ``norm``."""
    rng = np.random.default_rng(rng)
    X = rng.normal(size=(q, p)) + 1j * rng.normal(size=(q, p))
    top = np.linalg.norm(X, 2)
    return X * (norm / top) if top > 0 else X


def random_schur_function(p, q, state_dim, rng, scale=1.0):
    """``scale`` times the ``q x p`` corner of a Haar-random unitary system."""
    rng = np.random.default_rng(rng)
    ports = max(p, q)
    U = random_unitary(state_dim + ports, rng)
    k = state_dim
    A, B = U[:k, :k], U[:k, k:k + p]
    C, D = scale * U[k:k + q, :k], scale * U[k:k + q, k:k + p]
    return SolutionEvaluator.from_state_space(A, B, C, D)


def random_points(n, rng, radius=0.8, min_sep=0.25):
    """Points in ``|z| <= radius`` with pseudo-hyperbolic separation ``min_sep``."""
    rng = np.random.default_rng(rng)
    pts = []
    while len(pts) < n:
        z = radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        if all(abs((z - w) / (1 - np.conj(w) * z)) >= min_sep for w in pts):
            pts.append(z)
    return pts


def random_np_data(rng, n_pts=None, p=None, q=None, scale=0.9, state_dim=2):
    """Solvable Nevanlinna-Pick data sampled from a random Schur function.

    With ``scale < 1`` the Pick matrix is positive definite; ``scale = 1``
    allows degenerate (rank-deficient) data.
    """
    rng = np.random.default_rng(rng)
    n_pts = n_pts or int(rng.integers(1, 5))
    p = p or int(rng.integers(1, 4))
    q = q or int(rng.integers(1, 4))
    f = random_schur_function(p, q, state_dim, rng, scale=scale)
    pts = random_points(n_pts, rng)
    vals = f.evaluate(pts)
    return NevanlinnaPickData(pts, list(vals))


def random_sarason_data(rng, n_zeros=3, scale=0.6):
    """Sarason data with ``W`` a random polynomial in the compressed shift.

    ``W`` is rescaled to norm ``scale`` in the ``K_theta`` metric.
    """
    rng = np.random.default_rng(rng)
    zeros = random_points(n_zeros, rng, radius=0.7, min_sep=0.3)
    coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
    W = polynomial_in(compressed_shift(zeros), coeffs)
    nrm = metric_norm(W, kernel_gram(zeros))
    return SarasonData(zeros, W * (scale / nrm) if nrm > 0 else W)
