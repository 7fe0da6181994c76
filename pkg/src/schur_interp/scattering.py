"""Scattering functions, the coefficient matrix and the linear-fractional map."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .colligation import (SchurParameter, build_colligation, coupling_unitary,
                          defect_spaces, unitary_extension)
from .errors import InvalidDataError, SingularLFTError
from .linalg import as_matrix, as_vector
from .tolerances import DEFAULT

__all__ = [
    "check_disk_point",
    "disk_grid",
    "scattering_eval",
    "CoefficientBlocks",
    "coefficient_matrix",
    "coefficient_grid",
    "lft_apply",
    "model_embedding_eval",
    "SolutionEvaluator",
    "Solver",
]


def check_disk_point(zeta):
    zeta = complex(zeta)
    if not abs(zeta) < 1:
        raise ValueError(f"point {zeta} is not inside the open unit disk")
    return zeta


def disk_grid(radii=(0.5, 0.9), nodes=64, offset=0.0):
    """Equispaced nodes on concentric circles, radius-major order."""
    theta = 2 * np.pi * (np.arange(nodes) + offset) / nodes
    return np.concatenate([r * np.exp(1j * theta) for r in radii])


def scattering_eval(u, zeta):
    """``D + zeta C (I - zeta A)^{-1} B`` for the block split of ``u``."""
    zeta = check_disk_point(zeta)
    return u.transfer([zeta])[0]


@dataclass(frozen=True)
class CoefficientBlocks:
    """Blocks of the coefficient matrix at one point.

    Rows are split as ``(L', M_V)`` and columns as ``(L, N_V)``:
    ``s11: N -> L'``, ``s12: L -> L'``, ``s21: N -> M``, ``s22: L -> M``.
    """

    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    at: complex

    def assembled(self):
        """The full ``(q + mu) x (p + nu)`` matrix in ``[[s12, s11], [s22, s21]]`` layout."""
        return np.block([[self.s12, self.s11], [self.s22, self.s21]])


def _split(S, coupling, zeta):
    rl, rm = coupling.out_slice("L'"), coupling.out_slice("M")
    cl, cn = coupling.in_slice("L"), coupling.in_slice("N")
    return CoefficientBlocks(S[rl, cn], S[rl, cl], S[rm, cn], S[rm, cl], complex(zeta))


def coefficient_matrix(coupling, ds, zeta):
    """Coefficient blocks at ``zeta`` from the coupling unitary's scattering function."""
    zeta = check_disk_point(zeta)
    if coupling.channel_dim("M") != ds.mu or coupling.channel_dim("N") != ds.nu:
        raise InvalidDataError("coupling and defect spaces disagree on dimensions")
    return _split(coupling.transfer([zeta])[0], coupling, zeta)


def coefficient_grid(coupling, zetas):
    """Coefficient blocks at many points (batched resolvent evaluation)."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=np.complex128))
    if zetas.size and np.max(np.abs(zetas)) >= 1:
        raise ValueError("all points must lie in the open unit disk")
    S = coupling.transfer(zetas)
    return [_split(S[k], coupling, z) for k, z in enumerate(zetas)]


def lft_apply(blocks, eps_val, inv_tol=DEFAULT.inv_tol):
    """``s12 + s11 eps (I - s21 eps)^{-1} s22``.

    Raises
    ------
    SingularLFTError
        When the condition number of ``I - s21 eps`` exceeds ``1 / inv_tol``.
    """
    mu, nu = blocks.s22.shape[0], blocks.s11.shape[1]
    eps_val = np.asarray(eps_val, dtype=np.complex128).reshape(nu, mu)
    if mu == 0 or nu == 0:
        return blocks.s12.copy()
    loop = np.eye(mu) - blocks.s21 @ eps_val
    cond = np.linalg.cond(loop)
    if not cond < 1.0 / inv_tol:
        raise SingularLFTError(f"I - s21 eps is near singular (condition {cond:.3e})", cond)
    return blocks.s12 + blocks.s11 @ eps_val @ np.linalg.solve(loop, blocks.s22)


def model_embedding_eval(u, h, zeta):
    """Functional model ``(Gh)_+(zeta), (Gh)_-(zeta)`` of an internal vector ``h``.

    ``(Gh)_+ = C (I - zeta A)^{-1} h`` restricted to the ``L'`` rows and
    ``(Gh)_- = conj(zeta) B^H (I - conj(zeta) A^H)^{-1} h`` restricted to the
    ``L`` rows; padding channels are dropped.
    """
    zeta = check_disk_point(zeta)
    h = as_vector(h, "h")
    A, B, C, _ = u.blocks
    if h.shape[0] != A.shape[0]:
        raise ValueError(f"h has length {h.shape[0]}, internal space has {A.shape[0]}")
    k = A.shape[0]
    plus = C @ np.linalg.solve(np.eye(k) - zeta * A, h) if k else np.zeros(C.shape[0], complex)
    zc = np.conj(zeta)
    minus = (zc * (B.conj().T @ np.linalg.solve(np.eye(k) - zc * A.conj().T, h))
             if k else np.zeros(B.shape[1], complex))
    return plus[u.out_slice("L'")], minus[u.in_slice("L")]


def model_embedding_grid(u, h, zetas):
    """Vectorized :func:`model_embedding_eval`; returns arrays ``(N, q)`` and ``(N, p)``."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=np.complex128))
    A, B, C, _ = u.blocks
    h = as_vector(h, "h")[:, None]
    Y = kernels.shifted_solve(A, h, 1.0, zetas)[:, :, 0]
    plus = (C @ Y.T).T
    Yc = kernels.shifted_solve(A.conj().T, h, 1.0, zetas.conj())[:, :, 0]
    minus = zetas.conj()[:, None] * (B.conj().T @ Yc.T).T
    return plus[:, u.out_slice("L'")], minus[:, u.in_slice("L")]


class SolutionEvaluator:
    """A candidate ``s(zeta): C^p -> C^q`` that can be sampled in the disk.

    Construct through one of the class methods; the object is immutable.
    ``evaluate`` is batched, ``__call__`` handles a single point.
    """

    def __init__(self, batch_fn, p, q, kind, source=None):
        self._batch = batch_fn
        self.p = int(p)
        self.q = int(q)
        self.kind = kind
        self.source = source

    def __repr__(self):
        return f"SolutionEvaluator(kind={self.kind!r}, p={self.p}, q={self.q})"

    def evaluate(self, zetas):
        zetas = np.atleast_1d(np.asarray(zetas, dtype=np.complex128))
        if zetas.size and np.max(np.abs(zetas)) >= 1:
            raise ValueError("all points must lie in the open unit disk")
        out = np.asarray(self._batch(zetas), dtype=np.complex128)
        return out.reshape(len(zetas), self.q, self.p)

    def __call__(self, zeta):
        return self.evaluate([check_disk_point(zeta)])[0]

    @classmethod
    def from_extension(cls, u):
        """Solution block ``L' x L`` of a unitary extension's scattering function."""
        rows, cols = u.out_slice("L'"), u.in_slice("L")

        def batch(z):
            return u.transfer(z)[:, rows, cols]

        return cls(batch, cols.stop - cols.start, rows.stop - rows.start, "extension", u)

    @classmethod
    def from_coefficients(cls, coupling, eps, inv_tol=DEFAULT.inv_tol):
        """Linear-fractional image of a Schur parameter under the coefficient matrix."""
        p, q = coupling.channel_dim("L"), coupling.channel_dim("L'")
        mu, nu = coupling.channel_dim("M"), coupling.channel_dim("N")
        if (eps.mu, eps.nu) != (mu, nu):
            raise InvalidDataError(
                f"parameter maps C^{eps.mu} -> C^{eps.nu}, defect spaces need C^{mu} -> C^{nu}")

        def batch(z):
            blocks = coefficient_grid(coupling, z)
            if mu == 0 or nu == 0:
                return np.stack([b.s12 for b in blocks]) if blocks else np.zeros((0, q, p))
            ev = eps.evaluate(z)
            return np.stack([lft_apply(b, ev[k], inv_tol) for k, b in enumerate(blocks)])

        return cls(batch, p, q, "lft", (coupling, eps))

    @classmethod
    def from_state_space(cls, A, B, C, D):
        """``D + z C (I - z A)^{-1} B`` for an arbitrary (not necessarily unitary) realization."""
        A, B, C, D = (as_matrix(x) if np.size(x) else np.zeros(np.shape(x), complex)
                      for x in (A, B, C, D))
        q, p = D.shape

        def batch(z):
            return kernels.transfer_eval(A, B, C, D, z)

        return cls(batch, p, q, "state_space", (A, B, C, D))

    @classmethod
    def constant(cls, K):
        K = np.atleast_2d(np.asarray(K, dtype=np.complex128))
        q, p = K.shape
        return cls(lambda z: np.broadcast_to(K, (len(z), q, p)).copy(), p, q, "constant", K)

    @classmethod
    def from_function(cls, fn, p, q):
        """Wrap a pointwise callable ``fn(zeta) -> (q, p) array``."""
        return cls(lambda z: np.stack([np.asarray(fn(x), dtype=np.complex128).reshape(q, p)
                                       for x in z]) if len(z) else np.zeros((0, q, p)),
                   p, q, "function", fn)


class Solver:
    """All solutions of one interpolation problem.

    Builds the isometry, its defect spaces and the coupling unitary once;
    solutions are then produced either as scattering functions of unitary
    extensions (``route="extension"``) or through the linear-fractional map
    (``route="lft"``). Both routes describe the same function.
    """

    def __init__(self, data, tol=DEFAULT):
        self.data = data
        self.tol = tol
        self.colligation = build_colligation(data, tol)
        self.defects = defect_spaces(self.colligation)
        self.coupling = coupling_unitary(self.colligation, self.defects, tol)

    @property
    def mu(self):
        return self.defects.mu

    @property
    def nu(self):
        return self.defects.nu

    def coefficients(self, zeta):
        return coefficient_matrix(self.coupling, self.defects, zeta)

    def extension(self, eps=None):
        return unitary_extension(self.colligation, self.defects, eps, self.tol)

    def solution(self, eps=None, route="extension"):
        """Solution for the parameter ``eps`` (``None``: the central solution ``eps = 0``)."""
        if route == "extension":
            return SolutionEvaluator.from_extension(self.extension(eps))
        if route == "lft":
            if eps is None:
                eps = SchurParameter.zero(self.mu, self.nu)
            return SolutionEvaluator.from_coefficients(self.coupling, eps, self.tol.inv_tol)
        raise ValueError(f"unknown route {route!r}")

    def central(self):
        return self.solution(None)
