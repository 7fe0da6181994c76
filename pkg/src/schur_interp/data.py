"""Interpolation data ``(T, D, E, M)`` and builders for concrete problems.

A data quadruple lives on a finite-dimensional space ``X = C^n``:

* ``T`` is an operator on ``X``;
* ``D`` is a Hermitian matrix, read as the form ``D(x, y) = y^H D x``;
* ``E: X -> L = C^p`` and ``M: X -> L' = C^q``.

They are tied together by the identity

    D - T^H D T = E^H E - M^H M,

which every builder here guarantees and :func:`validate_fi` measures.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDataError
from .linalg import as_matrix, hermitian_part, psd_check, psd_sqrt
from .tolerances import DEFAULT

__all__ = [
    "MAX_STATE",
    "MAX_CHANNEL",
    "AipData",
    "NevanlinnaPickData",
    "SarasonData",
    "build_nevanlinna_pick",
    "build_sarason",
    "validate_fi",
    "solvability",
    "blaschke",
    "kernel_gram",
    "compressed_shift",
    "e_star_values",
    "e_star_coefficients",
    "metric_norm",
    "polynomial_in",
]

MAX_STATE = 64
MAX_CHANNEL = 16


def _frozen(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AipData:
    """Validated-shape interpolation data. Immutable."""

    T: np.ndarray
    D: np.ndarray
    E: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        T = as_matrix(self.T, "T")
        D = as_matrix(self.D, "D")
        E = as_matrix(self.E, "E")
        M = as_matrix(self.M, "M")
        n = T.shape[0]
        if T.shape != (n, n) or D.shape != (n, n):
            raise InvalidDataError(f"T{T.shape} and D{D.shape} must both be n x n")
        if E.shape[1] != n or M.shape[1] != n:
            raise InvalidDataError(f"E{E.shape} and M{M.shape} must have n={n} columns")
        if n > MAX_STATE or E.shape[0] > MAX_CHANNEL or M.shape[0] > MAX_CHANNEL:
            raise InvalidDataError(
                f"problem exceeds supported size (n <= {MAX_STATE}, p, q <= {MAX_CHANNEL})")
        try:
            D = hermitian_part(D)
        except ValueError as exc:
            raise InvalidDataError(str(exc)) from None
        for name, val in (("T", T), ("D", D), ("E", E), ("M", M)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def p(self):
        return self.E.shape[0]

    @property
    def q(self):
        return self.M.shape[0]

    def form(self, x, y=None):
        """``D(x, y)``; ``D(x, x)`` when ``y`` is omitted."""
        x = np.asarray(x, dtype=np.complex128)
        y = x if y is None else np.asarray(y, dtype=np.complex128)
        return complex(np.vdot(y, self.D @ x))


@dataclass(frozen=True)
class NevanlinnaPickData:
    """Finitely many nodes ``points[k]`` in the disk with contractive targets ``values[k]``."""

    points: tuple
    values: tuple
    contraction_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        pts = tuple(complex(z) for z in self.points)
        vals = tuple(as_matrix(v, "value") for v in self.values)
        if not pts:
            raise InvalidDataError("at least one interpolation node is required")
        if len(pts) != len(vals):
            raise InvalidDataError(f"{len(pts)} points but {len(vals)} values")
        shape = vals[0].shape
        for z in pts:
            if not abs(z) < 1:
                raise InvalidDataError(f"node {z} is not inside the unit disk")
        for i in range(len(pts)):
            for j in range(i):
                if abs(pts[i] - pts[j]) <= 1e-12:
                    raise InvalidDataError(f"nodes {j} and {i} coincide")
        for v in vals:
            if v.shape != shape:
                raise InvalidDataError("all values must have the same shape")
            if np.linalg.norm(v, 2) > 1 + self.contraction_tol:
                raise InvalidDataError(f"value with norm {np.linalg.norm(v, 2):.6g} is not contractive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", tuple(_frozen(v) for v in vals))

    @property
    def q(self):
        return self.values[0].shape[0]

    @property
    def p(self):
        return self.values[0].shape[1]


def build_nevanlinna_pick(data):
    """Interpolation data for ``s(points[k]) = values[k]``.

    ``X`` is ``L^n`` (one block per node); ``T`` multiplies block ``k`` by
    ``points[k]``, ``E`` sums the blocks, ``M`` applies ``values[k]`` to block
    ``k`` and sums, and ``D`` is the block Pick matrix.
    """
    z = np.array(data.points)
    npts, p = len(z), data.p
    T = np.kron(np.diag(z), np.eye(p))
    E = np.kron(np.ones((1, npts)), np.eye(p))
    M = np.hstack(data.values)
    D = np.zeros((npts * p, npts * p), dtype=np.complex128)
    for j in range(npts):
        sj = data.values[j]
        for k in range(npts):
            block = (np.eye(p) - sj.conj().T @ data.values[k]) / (1 - np.conj(z[j]) * z[k])
            D[j * p:(j + 1) * p, k * p:(k + 1) * p] = block
    return AipData(T, D, E, M)


def blaschke(zeros, z):
    """Finite Blaschke product ``prod (z - a) / (1 - conj(a) z)`` (no unimodular factor)."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.ones_like(z)
    for a in zeros:
        out = out * (z - a) / (1 - np.conj(a) * z)
    return out


def kernel_gram(zeros):
    """Gram matrix ``G[i, j] = 1 / (1 - conj(a_j) a_i)`` of the Cauchy kernels."""
    a = np.asarray(zeros, dtype=np.complex128)
    return 1.0 / (1.0 - np.conj(a)[None, :] * a[:, None])


def compressed_shift(zeros):
    """Matrix of the compressed shift on ``K_theta`` in Cauchy-kernel coordinates.

    A coordinate vector ``c`` stands for ``sum_j c_j k_{a_j}``. The backward
    shift is ``diag(conj(a))`` in these coordinates, and the compressed shift
    is its adjoint for the metric ``G``.
    """
    a = np.asarray(zeros, dtype=np.complex128)
    G = kernel_gram(a)
    return np.linalg.solve(G, np.diag(a) @ G)


def e_star_values(zeros):
    """Values of ``(theta(z) - theta(0)) / z`` at the zeros of ``theta``."""
    a = np.asarray(zeros, dtype=np.complex128)
    theta0 = complex(blaschke(a, 0.0))
    vals = np.empty(len(a), dtype=np.complex128)
    for i, ai in enumerate(a):
        if ai == 0:
            # theta'(0) = prod over the other factors of b_j(0) = -a_j
            vals[i] = np.prod([-aj for j, aj in enumerate(a) if j != i])
        else:
            vals[i] = -theta0 / ai
    return vals


def e_star_coefficients(zeros):
    return np.linalg.solve(kernel_gram(zeros), e_star_values(zeros))


def metric_norm(X, G):
    """Operator norm of ``X`` on ``(C^n, <x, y> = y^H G x)``."""
    R = psd_sqrt(G, rank_tol=0.0)
    return float(np.linalg.norm(R @ X @ np.linalg.inv(R), 2))


def polynomial_in(T, coeffs):
    """``sum_k coeffs[k] T^k``."""
    T = np.asarray(T, dtype=np.complex128)
    out = np.zeros_like(T)
    power = np.eye(T.shape[0], dtype=np.complex128)
    for c in coeffs:
        out = out + complex(c) * power
        power = power @ T
    return out


@dataclass(frozen=True)
class SarasonData:
    """Zeros of a finite Blaschke product and an operator ``W`` on ``K_theta``.

    ``W`` is written in Cauchy-kernel coordinates (see :func:`compressed_shift`).
    """

    zeros: tuple
    W: np.ndarray
    comm_tol: float = field(default=DEFAULT.comm_tol, repr=False)
    psd_tol: float = field(default=DEFAULT.psd_tol, repr=False)

    def __post_init__(self):
        a = tuple(complex(z) for z in self.zeros)
        if not a:
            raise InvalidDataError("theta needs at least one zero")
        for z in a:
            if not abs(z) < 1:
                raise InvalidDataError(f"zero {z} is not inside the unit disk")
        for i in range(len(a)):
            for j in range(i):
                if abs(a[i] - a[j]) <= 1e-12:
                    raise InvalidDataError("zeros of theta must be distinct")
        W = as_matrix(self.W, "W")
        if W.shape != (len(a), len(a)):
            raise InvalidDataError(f"W must be {len(a)} x {len(a)}, got {W.shape}")
        T = compressed_shift(a)
        comm = np.linalg.norm(W @ T - T @ W)
        if comm > self.comm_tol * max(1.0, np.linalg.norm(W)):
            raise InvalidDataError(f"W does not commute with the compressed shift ({comm:.3e})")
        G = kernel_gram(a)
        if not psd_check(G - W.conj().T @ G @ W, psd_tol=self.psd_tol).is_psd:
            raise InvalidDataError("W is not a contraction on K_theta")
        object.__setattr__(self, "zeros", a)
        object.__setattr__(self, "W", _frozen(W))

    @classmethod
    def from_polynomial(cls, zeros, coeffs):
        """``W = sum_k coeffs[k] T^k`` for the compressed shift ``T``."""
        return cls(zeros, polynomial_in(compressed_shift(zeros), coeffs))

    @property
    def gram(self):
        return kernel_gram(self.zeros)

    @property
    def shift(self):
        return compressed_shift(self.zeros)


def build_sarason(data):
    """Interpolation data for the commutant lifting problem ``W = P_theta w |K_theta``.

    With ``G`` the kernel Gram matrix and ``e`` the coordinates of ``e_*``:
    ``D = G - W^H G W``, ``E = e^H G`` and ``M = e^H G W``.
    """
    G = kernel_gram(data.zeros)
    T = compressed_shift(data.zeros)
    W = np.asarray(data.W)
    e = e_star_coefficients(data.zeros)
    D = G - W.conj().T @ G @ W
    E = (e.conj() @ G)[None, :]
    M = (e.conj() @ G @ W)[None, :]
    return AipData(T, D, E, M)


def validate_fi(d):
    """Relative residual ``|D - T^H D T - E^H E + M^H M|_F / max(1, |D|_F)``."""
    T, D, E, M = d.T, d.D, d.E, d.M
    n = T.shape[0]
    if D.shape != (n, n) or E.shape[1] != n or M.shape[1] != n:
        raise InvalidDataError("inconsistent shapes")
    R = D - T.conj().T @ D @ T - E.conj().T @ E + M.conj().T @ M
    return float(np.linalg.norm(R) / max(1.0, np.linalg.norm(D)))


def solvability(d, tol=DEFAULT):
    """PSD report for ``D``; ``is_psd`` means the data are solvable."""
    return psd_check(d.D, psd_tol=tol.psd_tol, rank_tol=tol.rank_tol, herm_tol=tol.herm_tol)
