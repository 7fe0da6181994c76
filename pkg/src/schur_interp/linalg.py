"""Dense complex linear algebra for positive semidefinite forms.

Everything here goes through Hermitian eigendecompositions rather than
Cholesky, because the forms that show up in interpolation problems are
routinely singular.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError, NotPSDError
from .tolerances import DEFAULT

__all__ = [
    "PsdReport",
    "as_matrix",
    "as_vector",
    "hermitian_part",
    "eigh_desc",
    "normalize_columns",
    "psd_check",
    "gram_factor",
    "psd_sqrt",
    "pseudo_sqrt_solve",
    "pseudo_inverse_quadratic",
    "defect_quadratic",
    "orth_complement",
    "nearest_unitary",
    "unitarity_defect",
]


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive semidefiniteness test.

    ``borderline`` is set when some eigenvalue sits within three decades
    above the rank cutoff, i.e. when the numerical rank is fragile.
    """

    is_psd: bool
    min_eigenvalue: float
    rank: int
    spectral_norm: float = 0.0
    borderline: bool = False

    def as_dict(self):
        return {
            "is_psd": bool(self.is_psd),
            "min_eigenvalue": float(self.min_eigenvalue),
            "rank": int(self.rank),
            "spectral_norm": float(self.spectral_norm),
            "borderline": bool(self.borderline),
        }


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-d complex128 array."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, name="vector"):
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def hermitian_part(A, herm_tol=DEFAULT.herm_tol):
    """Symmetrize a square matrix, refusing inputs that are far from Hermitian."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    skew = np.linalg.norm(A - A.conj().T)
    if skew > herm_tol * max(1.0, np.linalg.norm(A)):
        raise ValueError(f"matrix is not Hermitian (skew part {skew:.3e})")
    return 0.5 * (A + A.conj().T)


def normalize_columns(U):
    """Rotate each column so its largest-modulus entry is real positive."""
    U = np.array(U, dtype=np.complex128, copy=True)
    for j in range(U.shape[1]):
        col = U[:, j]
        if col.size == 0:
            continue
        k = int(np.argmax(np.abs(col)))
        if col[k] != 0:
            U[:, j] = col * (abs(col[k]) / col[k])
    return U


def eigh_desc(A):
    """Eigendecomposition with eigenvalues in descending order.

    Ties are broken by the position reported by LAPACK, and eigenvectors are
    phase-normalized, so the output is reproducible for a fixed input.
    """
    w, V = np.linalg.eigh(A)
    order = np.argsort(-w, kind="stable")
    return w[order], normalize_columns(V[:, order])


def _cutoff(w, rank_tol):
    top = float(w.max()) if w.size else 0.0
    return rank_tol * max(top, 1.0)


def psd_check(A, psd_tol=DEFAULT.psd_tol, rank_tol=DEFAULT.rank_tol,
              herm_tol=DEFAULT.herm_tol):
    """Test a Hermitian matrix for positive semidefiniteness.

    The matrix is symmetrized first. It is declared PSD when its smallest
    eigenvalue is at least ``-psd_tol`` times its spectral norm, and its rank
    counts eigenvalues above ``rank_tol * max(1, largest eigenvalue)``.
    """
    H = hermitian_part(A, herm_tol)
    if H.shape[0] == 0:
        return PsdReport(True, 0.0, 0, 0.0, False)
    w = np.linalg.eigvalsh(H)
    norm = float(np.max(np.abs(w)))
    lo = float(w.min())
    cut = _cutoff(w, rank_tol)
    rank = int(np.count_nonzero(w > cut))
    borderline = bool(np.any((w > cut) & (w <= 1e3 * cut)))
    return PsdReport(lo >= -psd_tol * norm, lo, rank, norm, borderline)


def gram_factor(D, rank_tol=DEFAULT.rank_tol, psd_tol=DEFAULT.psd_tol,
                herm_tol=DEFAULT.herm_tol):
    """Return a full-row-rank ``F`` with ``F^H F = D``.

    Rows of ``F`` are ``sqrt(lambda_i) v_i^H`` for the eigenpairs of ``D``
    above the rank cutoff, in descending order.
    """
    H = hermitian_part(D, herm_tol)
    n = H.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    w, V = eigh_desc(H)
    norm = float(np.max(np.abs(w)))
    if w.min() < -psd_tol * norm:
        raise NotPSDError(f"form is indefinite (min eigenvalue {w.min():.3e})")
    keep = w > _cutoff(w, rank_tol)
    return np.sqrt(w[keep])[:, None] * V[:, keep].conj().T


def psd_sqrt(A, rank_tol=DEFAULT.rank_tol):
    """Principal square root of a PSD matrix (small eigenvalues zeroed)."""
    w, V = eigh_desc(hermitian_part(A))
    w = np.where(w > _cutoff(w, rank_tol), w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


def _pseudo_sqrt_parts(A, h0, rank_tol, floor=None):
    """Return ``(g0, residual_norm, n_dropped)`` for the pseudo square-root solve.

    ``n_dropped`` counts nonzero eigenvalues discarded by the cutoff.
    """
    w, V = eigh_desc(hermitian_part(A))
    cut = _cutoff(w, rank_tol) if floor is None else floor
    keep = w > cut
    coeff = V.conj().T @ h0
    g0 = V[:, keep] @ (coeff[keep] / np.sqrt(w[keep]))
    resid = float(np.linalg.norm(coeff[~keep]))
    dropped = int(np.count_nonzero(~keep & (np.abs(w) > 0)))
    return g0, resid, dropped


def pseudo_sqrt_solve(A, h0, res_tol=DEFAULT.res_tol, rank_tol=DEFAULT.rank_tol, atol=0.0):
    """Solve ``sqrt(A) g0 = h0`` with ``g0`` orthogonal to ``ker A``.

    ``atol`` is an absolute allowance for the range residual, for callers
    whose ``h0`` is known to be zero up to rounding.

    Raises
    ------
    DomainError
        If the component of ``h0`` outside the range of ``sqrt(A)`` exceeds
        ``res_tol * |h0| + atol``.
    """
    A = as_matrix(A, "A")
    h0 = as_vector(h0, "h0")
    if h0.shape[0] != A.shape[0]:
        raise ValueError(f"h0 has length {h0.shape[0]}, expected {A.shape[0]}")
    g0, resid, _ = _pseudo_sqrt_parts(A, h0, rank_tol)
    if resid > res_tol * np.linalg.norm(h0) + atol:
        raise DomainError(f"h0 is outside the range of sqrt(A) (residual {resid:.3e})")
    return g0


def pseudo_inverse_quadratic(A, h0, res_tol=DEFAULT.res_tol, rank_tol=DEFAULT.rank_tol):
    """``<A^[-1] h0, h0>``, defined as the squared norm of the pseudo square-root solve."""
    g0 = pseudo_sqrt_solve(A, h0, res_tol, rank_tol)
    return float(np.vdot(g0, g0).real)


def _defect_terms(s, l_prime, l, res_tol, rank_tol, floor):
    q, p = s.shape
    sh = s.conj().T
    scale = max(np.linalg.norm(l_prime) + np.linalg.norm(l), 1e-300)

    g, r2, d2 = _pseudo_sqrt_parts(np.eye(p) - sh @ s, l - sh @ l_prime, rank_tol, floor)
    gp, r3, d3 = _pseudo_sqrt_parts(np.eye(q) - s @ sh, l_prime - s @ l, rank_tol, floor)
    if max(r2, r3) > res_tol * scale:
        raise DomainError(
            f"pair is outside the domain of the defect inverse (residual {max(r2, r3):.3e})")
    v2 = float(np.vdot(l_prime, l_prime).real + np.vdot(g, g).real)
    v3 = float(np.vdot(l, l).real + np.vdot(gp, gp).real)
    return v2, v3, (d2 + d3) > 0


def defect_quadratic(s, l_prime, l, res_tol=DEFAULT.res_tol, rank_tol=DEFAULT.rank_tol,
                     floor=None):
    """Quadratic form of the inverse of ``[[I, s], [s^H, I]]`` at ``l_prime (+) l``.

    Computed as ``|l'|^2 + <(I - s^H s)^[-1](l - s^H l'), l - s^H l'>`` and
    cross-checked against ``|l|^2 + <(I - s s^H)^[-1](l' - s l), l' - s l>``.

    Parameters
    ----------
    s : (q, p) array_like
        Contraction.
    l_prime : (q,) array_like
    l : (p,) array_like
    floor : float, optional
        Absolute eigenvalue floor for the pseudo-inverses; defaults to the
        relative ``rank_tol`` cutoff.

    Raises
    ------
    DomainError
        If the pair is not in the domain of the inverse.
    ConsistencyError
        If the two expansions disagree beyond ``res_tol``.
    """
    s = as_matrix(s, "s")
    l_prime = as_vector(l_prime, "l_prime")
    l = as_vector(l, "l")
    if l_prime.shape[0] != s.shape[0] or l.shape[0] != s.shape[1]:
        raise ValueError("vector lengths do not match the shape of s")
    if s.size and np.linalg.norm(s, 2) > 1 + res_tol:
        raise ValueError("s is not a contraction")
    v2, v3, _ = _defect_terms(s, l_prime, l, res_tol, rank_tol, floor)
    if abs(v2 - v3) > res_tol * max(1.0, v2):
        raise ConsistencyError(f"defect expansions disagree: {v2!r} vs {v3!r}")
    return v2


def orth_complement(U, dim):
    """Orthonormal basis of the orthogonal complement of ``range(U)`` in C^dim.

    ``U`` must have orthonormal columns.
    """
    U = np.asarray(U, dtype=np.complex128).reshape(dim, -1)
    k = U.shape[1]
    if k == dim:
        return np.zeros((dim, 0), dtype=np.complex128)
    P = np.eye(dim) - U @ U.conj().T
    w, V = eigh_desc(0.5 * (P + P.conj().T))
    return V[:, : dim - k]


def nearest_unitary(X):
    """Polar factor of a square matrix."""
    if X.size == 0:
        return np.asarray(X, dtype=np.complex128)
    W, _, Zh = np.linalg.svd(X)
    return W @ Zh


def unitarity_defect(U):
    """``max(|U^H U - I|_2, |U U^H - I|_2)``; zero for empty matrices."""
    U = np.asarray(U, dtype=np.complex128)
    if U.size == 0:
        return 0.0
    n, m = U.shape
    if n != m:
        return np.inf
    return float(max(np.linalg.norm(U.conj().T @ U - np.eye(n), 2),
                     np.linalg.norm(U @ U.conj().T - np.eye(n), 2)))
