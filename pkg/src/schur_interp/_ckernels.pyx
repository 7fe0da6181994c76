# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled resolvent kernels.

Both routines loop over a batch of disk points and solve one dense complex
system per point with LAPACK ``zgesv`` (through scipy's Cython bindings),
assembling the shifted matrix directly in column-major work storage.
Shapes are validated by the caller in :mod:`schur_interp.kernels`.
"""
import numpy as np

from numpy.linalg import LinAlgError

from scipy.linalg.cython_lapack cimport zgesv


cdef int _solve_inplace(double complex[:, ::1] Wt, double complex[:, ::1] Rt,
                        int[::1] ipiv) noexcept nogil:
    """Overwrite ``Rt`` with ``(W^{-1} R)^T`` given the transposes of ``W`` and ``R``.

    C-ordered transposes are exactly the column-major arrays LAPACK expects.
    Returns LAPACK's ``info`` (positive for an exactly singular pivot).
    """
    cdef int n = Wt.shape[0]
    cdef int m = Rt.shape[0]
    cdef int info = 0
    if n == 0 or m == 0:
        return 0
    zgesv(&n, &m, &Wt[0, 0], &n, &ipiv[0], &Rt[0, 0], &n, &info)
    return info


def shifted_solve(const double complex[:, ::1] A,
                  const double complex[:, ::1] B,
                  const double complex[::1] alpha,
                  const double complex[::1] beta):
    """Return Y with Y[k] = (alpha[k] I - beta[k] A)^{-1} B."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = B.shape[1]
    cdef Py_ssize_t npts = alpha.shape[0]
    cdef Py_ssize_t k, i, j
    cdef int status = 0

    out = np.empty((npts, n, m), dtype=np.complex128)
    cdef double complex[:, :, ::1] Y = out
    cdef double complex[:, ::1] Wt = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Rt = np.empty((m, n), dtype=np.complex128)
    cdef int[::1] ipiv = np.empty(max(n, 1), dtype=np.intc)
    cdef double complex a, b

    with nogil:
        for k in range(npts):
            a = alpha[k]
            b = beta[k]
            for i in range(n):
                for j in range(n):
                    Wt[j, i] = -b * A[i, j]
                Wt[i, i] = Wt[i, i] + a
                for j in range(m):
                    Rt[j, i] = B[i, j]
            status = _solve_inplace(Wt, Rt, ipiv)
            if status != 0:
                break
            for i in range(n):
                for j in range(m):
                    Y[k, i, j] = Rt[j, i]
    if status != 0:
        raise LinAlgError("singular shifted matrix at batch index %d" % k)
    return out


def transfer_eval(const double complex[:, ::1] A,
                  const double complex[:, ::1] B,
                  const double complex[:, ::1] C,
                  const double complex[:, ::1] D,
                  const double complex[::1] zetas):
    """Return S with S[k] = D + z C (I - z A)^{-1} B for z = zetas[k]."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = B.shape[1]
    cdef Py_ssize_t p = C.shape[0]
    cdef Py_ssize_t npts = zetas.shape[0]
    cdef Py_ssize_t k, i, j, l
    cdef int status = 0

    out = np.empty((npts, p, m), dtype=np.complex128)
    cdef double complex[:, :, ::1] S = out
    cdef double complex[:, ::1] Wt = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Rt = np.empty((m, n), dtype=np.complex128)
    cdef int[::1] ipiv = np.empty(max(n, 1), dtype=np.intc)
    cdef double complex z, acc

    with nogil:
        for k in range(npts):
            z = zetas[k]
            for i in range(n):
                for j in range(n):
                    Wt[j, i] = -z * A[i, j]
                Wt[i, i] = Wt[i, i] + 1.0
                for j in range(m):
                    Rt[j, i] = B[i, j]
            status = _solve_inplace(Wt, Rt, ipiv)
            if status != 0:
                break
            for i in range(p):
                for j in range(m):
                    acc = 0
                    for l in range(n):
                        acc = acc + C[i, l] * Rt[j, l]
                    S[k, i, j] = D[i, j] + z * acc
    if status != 0:
        raise LinAlgError("singular resolvent at batch index %d" % k)
    return out
