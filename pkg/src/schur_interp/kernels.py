"""Batched resolvent kernels with a compiled core and a numpy fallback.

The compiled module ``_ckernels`` is used when it was built and importable.
Setting ``SCHUR_INTERP_PURE_PYTHON=1`` before import forces the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("SCHUR_INTERP_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

__all__ = ["BACKEND", "shifted_solve", "transfer_eval"]


def _cmat(a, ndim=2):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def _cvec(z):
    return np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=np.complex128)))


def shifted_solve(A, B, alpha, beta, impl=None):
    """Solve ``(alpha[k] I - beta[k] A) Y[k] = B`` for every batch index k.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    alpha, beta : (N,) array_like
        Shift coefficients; scalars are broadcast against each other.

    Returns
    -------
    Y : (N, n, m) ndarray
    """
    A = _cmat(A)
    B = _cmat(B)
    alpha, beta = np.broadcast_arrays(_cvec(alpha), _cvec(beta))
    alpha = np.ascontiguousarray(alpha)
    beta = np.ascontiguousarray(beta)
    if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
        raise ValueError(f"incompatible shapes A{A.shape}, B{B.shape}")
    return (impl or _impl).shifted_solve(A, B, alpha, beta)


def transfer_eval(A, B, C, D, zetas, impl=None):
    """Evaluate ``D + z C (I - z A)^{-1} B`` at every point of ``zetas``.

    Returns an array of shape ``(N, C.shape[0], B.shape[1])``.
    """
    A, B, C, D = (_cmat(x) for x in (A, B, C, D))
    zetas = _cvec(zetas)
    n = A.shape[0]
    if (A.shape != (n, n) or B.shape[0] != n or C.shape[1] != n
            or D.shape != (C.shape[0], B.shape[1])):
        raise ValueError(
            f"incompatible realization shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape}")
    return (impl or _impl).transfer_eval(A, B, C, D, zetas)
