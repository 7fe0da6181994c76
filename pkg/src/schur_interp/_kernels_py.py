"""Pure numpy versions of the compiled resolvent kernels."""
import numpy as np


def shifted_solve(A, B, alpha, beta):
    n = A.shape[0]
    npts = alpha.shape[0]
    if n == 0:
        return np.zeros((npts, 0, B.shape[1]), dtype=np.complex128)
    mats = alpha[:, None, None] * np.eye(n) - beta[:, None, None] * A
    rhs = np.broadcast_to(B, (npts,) + B.shape)
    return np.linalg.solve(mats, rhs)


def transfer_eval(A, B, C, D, zetas):
    Y = shifted_solve(A, B, np.ones_like(zetas), zetas)
    return D[None, :, :] + zetas[:, None, None] * (C @ Y)
