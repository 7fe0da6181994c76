"""The isometry ``V: DTx (+) Ex -> Dx (+) Mx`` and its unitary extensions.

``Q`` is realized as ``C^r`` through a Gram factor ``F`` of ``D`` (so that
``<Fx, Fy> = D(x, y)``). ``V`` then acts from a subspace of ``C^r (+) L`` to a
subspace of ``C^r (+) L'``. Its defect spaces ``M_V`` and ``N_V`` are the
orthogonal complements of the domain and range. Gluing ``V`` with identity
routings through the defects yields a unitary "coupling" operator; closing
the defect channels through a Schur parameter gives a unitary extension.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import kernels
from .data import AipData, solvability, validate_fi
from .errors import ConsistencyError, InvalidDataError, NotSolvableError
from .linalg import as_matrix, gram_factor, nearest_unitary, unitarity_defect
from .tolerances import DEFAULT

__all__ = [
    "PartitionedUnitary",
    "Colligation",
    "DefectSpaces",
    "SchurParameter",
    "build_colligation",
    "defect_spaces",
    "coupling_unitary",
    "unitary_extension",
]


def _channels(spec):
    return tuple((str(label), int(dim)) for label, dim in spec)


@dataclass(frozen=True)
class PartitionedUnitary:
    """A unitary matrix acting on ``internal (+) inputs -> internal (+) outputs``.

    Rows are ordered internal first, then the output channels in order;
    columns likewise with the input channels. Channels are ``(label, dim)``
    pairs and may have dimension zero.
    """

    matrix: np.ndarray
    internal_dim: int
    inputs: tuple
    outputs: tuple
    unit_tol: float = field(default=DEFAULT.unit_tol, repr=False)

    def __post_init__(self):
        U = as_matrix(self.matrix, "matrix") if np.size(self.matrix) else np.zeros((0, 0), complex)
        inputs, outputs = _channels(self.inputs), _channels(self.outputs)
        k = int(self.internal_dim)
        n_in = k + sum(d for _, d in inputs)
        n_out = k + sum(d for _, d in outputs)
        if U.shape != (n_out, n_in):
            raise InvalidDataError(
                f"matrix shape {U.shape} does not match channel split ({n_out}, {n_in})")
        defect = unitarity_defect(U)
        if defect > self.unit_tol:
            raise ConsistencyError(f"operator is not unitary (defect {defect:.3e})")
        U = np.array(U, dtype=np.complex128, copy=True)
        U.setflags(write=False)
        object.__setattr__(self, "matrix", U)
        object.__setattr__(self, "internal_dim", k)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    @property
    def in_dim(self):
        return self.matrix.shape[1] - self.internal_dim

    @property
    def out_dim(self):
        return self.matrix.shape[0] - self.internal_dim

    @property
    def blocks(self):
        """``(A, B, C, D)`` with ``A: H->H, B: in->H, C: H->out, D: in->out``."""
        k = self.internal_dim
        U = self.matrix
        return U[:k, :k], U[:k, k:], U[k:, :k], U[k:, k:]

    def _span(self, channels, label):
        start = 0
        for name, dim in channels:
            if name == label:
                return slice(start, start + dim)
            start += dim
        raise KeyError(label)

    def in_slice(self, label):
        """Column range of an input channel inside the ``in_dim`` block."""
        return self._span(self.inputs, label)

    def out_slice(self, label):
        return self._span(self.outputs, label)

    def channel_dim(self, label):
        for name, dim in self.inputs + self.outputs:
            if name == label:
                return dim
        raise KeyError(label)

    def transfer(self, zetas):
        """Scattering function ``D + z C (I - z A)^{-1} B`` at each point, shape ``(N, out, in)``."""
        A, B, C, D = self.blocks
        return kernels.transfer_eval(A, B, C, D, zetas)


def _svd_frame(G):
    """Full SVD whose left vectors have their largest entry real positive.

    The matching right singular vectors are counter-rotated so that
    ``G = U diag(S) Wh`` still holds.
    """
    U, S, Wh = np.linalg.svd(G)
    Wh = Wh.copy()
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        phase = abs(U[i, j]) / U[i, j]
        U[:, j] *= phase
        if j < len(S):
            Wh[j] *= np.conj(phase)
    return U, S, Wh


@dataclass(frozen=True)
class Colligation:
    """Matrix realization of the isometry ``V``.

    Attributes
    ----------
    F : (r, n) ndarray
        Gram factor of ``D``; ``x -> Fx`` realizes ``x -> Dx`` in ``Q = C^r``.
    dom_basis : (r + p, d) ndarray
        Orthonormal basis of the domain ``D_V``.
    ran_basis : (r + q, d) ndarray
        Orthonormal basis of the range ``Delta_V``.
    v_action : (d, d) ndarray
        Unitary matrix of ``V`` between those bases.
    dom_frame, ran_frame : ndarray
        Unitary frames whose leading ``d`` columns are the bases above; the
        trailing columns span the defect spaces.
    map_error : float
        ``|V [FT; E] - [F; M]|_2 / max(1, |[F; M]|_2)``.
    """

    data: AipData
    F: np.ndarray
    dom_basis: np.ndarray
    ran_basis: np.ndarray
    v_action: np.ndarray
    dom_frame: np.ndarray
    ran_frame: np.ndarray
    map_error: float

    @property
    def r(self):
        return self.F.shape[0]

    @property
    def d(self):
        return self.v_action.shape[0]

    @property
    def p(self):
        return self.data.p

    @property
    def q(self):
        return self.data.q

    def domain_generators(self):
        """``[FT; E]``; column ``j`` is the generator for basis vector ``x = e_j``."""
        return np.vstack([self.F @ self.data.T, self.data.E])

    def range_generators(self):
        return np.vstack([self.F, self.data.M])

    def operator(self):
        """``V`` as a partial isometry ``C^{r+p} -> C^{r+q}`` (zero on ``M_V``)."""
        return self.ran_basis @ self.v_action @ self.dom_basis.conj().T


def build_colligation(d, tol=DEFAULT):
    """Construct ``V`` from validated data.

    Raises
    ------
    InvalidDataError
        If the fundamental identity fails beyond ``tol.fi_tol``.
    NotSolvableError
        If ``D`` is not positive semidefinite.
    ConsistencyError
        If ``V`` is not well defined or not isometric within tolerance.
    """
    fi = validate_fi(d)
    if fi > tol.fi_tol:
        raise InvalidDataError(f"fundamental identity violated (relative residual {fi:.3e})")
    if not solvability(d, tol).is_psd:
        raise NotSolvableError("D is not positive semidefinite; the data admit no solution")

    F = gram_factor(d.D, rank_tol=tol.rank_tol, psd_tol=tol.psd_tol, herm_tol=tol.herm_tol)
    Gd = np.vstack([F @ d.T, d.E])
    Gr = np.vstack([F, d.M])

    Ud, Sd, Wdh = _svd_frame(Gd)
    Ur, Sr, _ = _svd_frame(Gr)
    # singular values of generators are square roots of form eigenvalues
    cut = np.sqrt(tol.rank_tol) * max(1.0, Sd[0] if Sd.size else 0.0, Sr[0] if Sr.size else 0.0)
    dim = int(np.count_nonzero(Sd > cut))
    dim_r = int(np.count_nonzero(Sr > cut))
    if dim != dim_r:
        raise ConsistencyError(
            f"domain and range of V have different numerical ranks ({dim} vs {dim_r}); "
            "the data sit on a rank boundary")

    X = Wdh[:dim].conj().T / Sd[:dim]
    images = Gr @ X
    ran_basis = Ur[:, :dim]
    v_raw = ran_basis.conj().T @ images
    scale = max(1.0, np.linalg.norm(Gr, 2) if Gr.size else 0.0)
    leak = np.linalg.norm(images - ran_basis @ v_raw, 2) if images.size else 0.0
    if unitarity_defect(v_raw) > tol.unit_tol or leak > tol.unit_tol:
        raise ConsistencyError(
            f"V is not isometric on its generators (defect {unitarity_defect(v_raw):.3e}, "
            f"leak {leak:.3e})")
    v_action = nearest_unitary(v_raw)

    kernel = Wdh[dim:].conj().T
    if kernel.size:
        slack = tol.map_tol * scale + (Sd[dim] if Sd.size > dim else 0.0)
        if np.linalg.norm(Gr @ kernel, 2) > slack + cut:
            raise ConsistencyError("V is not well defined: a null generator has a nonzero image")
    Vop = ran_basis @ v_action @ Ud[:, :dim].conj().T
    map_error = float(np.linalg.norm(Vop @ Gd - Gr, 2) / scale) if Gd.size else 0.0
    allowed = tol.map_tol + (Sd[dim] if Sd.size > dim else 0.0) / scale + cut / scale
    if map_error > allowed:
        raise ConsistencyError(f"V does not reproduce the generators (error {map_error:.3e})")

    return Colligation(d, F, Ud[:, :dim], ran_basis, v_action, Ud, Ur, map_error)


@dataclass(frozen=True)
class DefectSpaces:
    """Orthonormal bases of ``M_V = (Q + L) - D_V`` and ``N_V = (Q + L') - Delta_V``."""

    mv_basis: np.ndarray
    nv_basis: np.ndarray

    @property
    def mu(self):
        return self.mv_basis.shape[1]

    @property
    def nu(self):
        return self.nv_basis.shape[1]


def defect_spaces(c):
    """Defect bases: the trailing columns of the SVD frames of the generators."""
    return DefectSpaces(c.dom_frame[:, c.d:], c.ran_frame[:, c.d:])


def coupling_unitary(c, ds, tol=DEFAULT):
    """Unitary ``Q (+) L (+) N_V -> Q (+) L' (+) M_V`` built from ``V``.

    It acts as ``V`` on ``D_V``, sends ``M_V`` to the ``M`` output channel and
    feeds the ``N`` input channel into ``N_V``. Its scattering function is the
    coefficient matrix of the linear-fractional description of solutions.
    """
    r, p, q = c.r, c.p, c.q
    mu, nu = ds.mu, ds.nu
    top = np.hstack([c.operator(), ds.nv_basis])
    bottom = np.hstack([ds.mv_basis.conj().T, np.zeros((mu, nu))])
    U = np.vstack([top, bottom])
    return PartitionedUnitary(U, r, (("L", p), ("N", nu)), (("L'", q), ("M", mu)),
                              unit_tol=tol.unit_tol)


class SchurParameter:
    """A Schur-class function ``eps: C^mu -> C^nu`` given by a unitary realization.

    The realization acts on ``H_eps (+) (M (+) pad_in) -> H_eps (+) (N (+) pad_out)``
    and ``eps`` is the ``N x M`` corner of its scattering function. The padding
    channels make the realization square when ``eps`` itself cannot be the full
    scattering function of a finite unitary system (non-inner ``eps``).
    """

    def __init__(self, realization):
        labels_in = [name for name, _ in realization.inputs]
        labels_out = [name for name, _ in realization.outputs]
        if labels_in != ["M", "pad_in"] or labels_out != ["N", "pad_out"]:
            raise InvalidDataError("realization channels must be (M, pad_in) -> (N, pad_out)")
        self.realization = realization

    def __repr__(self):
        return (f"SchurParameter(mu={self.mu}, nu={self.nu}, state_dim={self.state_dim}, "
                f"pad=({self.pad_in}, {self.pad_out}))")

    @property
    def mu(self):
        return self.realization.channel_dim("M")

    @property
    def nu(self):
        return self.realization.channel_dim("N")

    @property
    def pad_in(self):
        return self.realization.channel_dim("pad_in")

    @property
    def pad_out(self):
        return self.realization.channel_dim("pad_out")

    @property
    def state_dim(self):
        return self.realization.internal_dim

    def evaluate(self, zetas):
        S = self.realization.transfer(zetas)
        return S[:, : self.nu, : self.mu]

    def __call__(self, zeta):
        return self.evaluate(np.atleast_1d(zeta))[0]

    @classmethod
    def from_matrix(cls, matrix, state_dim, mu, nu, unit_tol=DEFAULT.unit_tol):
        """Wrap a unitary matrix; padding sizes follow from its dimension."""
        matrix = as_matrix(matrix)
        ports = matrix.shape[0] - state_dim
        if ports < max(mu, nu) or matrix.shape[0] != matrix.shape[1]:
            raise InvalidDataError(
                f"a {matrix.shape} realization with state_dim={state_dim} cannot carry "
                f"{mu} inputs and {nu} outputs")
        return cls(PartitionedUnitary(matrix, state_dim, (("M", mu), ("pad_in", ports - mu)),
                                      (("N", nu), ("pad_out", ports - nu)), unit_tol))

    @classmethod
    def constant(cls, K, sigma_tol=1e-12):
        """Minimal unitary completion of a constant contraction (no state).

        In singular coordinates ``K = P diag(s) Q^H`` every direction with
        ``s < 1`` is paired with one padding input and one padding output via
        the rotation ``[[s, c], [c, -s]]``, ``c = sqrt(1 - s^2)``.
        """
        K = np.atleast_2d(np.asarray(K, dtype=np.complex128))
        nu, mu = K.shape
        if K.size and np.linalg.norm(K, 2) > 1 + sigma_tol:
            raise InvalidDataError("constant parameter is not a contraction")
        P, s, Qh = np.linalg.svd(K) if K.size else (np.eye(nu), np.zeros(0), np.eye(mu))
        m = len(s)
        s = np.minimum(s, 1.0)
        rot = [i for i in range(m) if s[i] < 1 - sigma_tol]
        extra_in = list(range(m, mu))    # right singular directions killed by K
        extra_out = list(range(m, nu))   # left singular directions missed by K
        pad_out = len(rot) + len(extra_in)
        pad_in = len(rot) + len(extra_out)
        core = np.zeros((nu + pad_out, mu + pad_in), dtype=np.complex128)
        for i in range(m):
            core[i, i] = s[i]
        for j, i in enumerate(rot):
            c = np.sqrt(max(0.0, 1.0 - s[i] ** 2))
            core[i, mu + j] = c
            core[nu + j, i] = c
            core[nu + j, mu + j] = -s[i]
        for j, i in enumerate(extra_in):
            core[nu + len(rot) + j, i] = 1.0
        for j, i in enumerate(extra_out):
            core[i, mu + len(rot) + j] = 1.0
        left = np.eye(nu + pad_out, dtype=np.complex128)
        left[:nu, :nu] = P
        right = np.eye(mu + pad_in, dtype=np.complex128)
        right[:mu, :mu] = Qh
        U = left @ core @ right
        return cls(PartitionedUnitary(U, 0, (("M", mu), ("pad_in", pad_in)),
                                      (("N", nu), ("pad_out", pad_out))))

    @classmethod
    def zero(cls, mu, nu):
        return cls.constant(np.zeros((nu, mu)))

    @classmethod
    def random(cls, mu, nu, state_dim, rng=None):
        """Haar-random unitary realization with ``max(mu, nu)`` ports."""
        rng = np.random.default_rng(rng)
        size = state_dim + max(mu, nu)
        if size == 0:
            U = np.zeros((0, 0), dtype=np.complex128)
        elif size == 1:
            U = np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
        else:
            U = unitary_group.rvs(size, random_state=rng)
        return cls.from_matrix(U, state_dim, mu, nu)


def _feedback_close(coupling, param, tol):
    """Close the ``M``/``N`` channels of ``coupling`` through ``param``'s realization."""
    r = coupling.internal_dim
    p, q = coupling.channel_dim("L"), coupling.channel_dim("L'")
    mu, nu = param.mu, param.nu
    R = param.realization
    k, a, b = R.internal_dim, param.pad_in, param.pad_out
    Uc = coupling.matrix
    Ur = R.matrix

    # Coupling rows: Q | L' | M ; columns: Q | L | N
    cq, cl, cn = slice(0, r), slice(r, r + p), slice(r + p, r + p + nu)
    rq, rl, rm = slice(0, r), slice(r, r + q), slice(r + q, r + q + mu)
    # Realization rows: H | N | pad_out ; columns: H | M | pad_in
    sh, sm, sp = slice(0, k), slice(k, k + mu), slice(k + mu, k + mu + a)
    th, tn, tp = slice(0, k), slice(k, k + nu), slice(k + nu, k + nu + b)

    # Closed loop input vector ordering: Q | H | L | pad_in
    dim_in = r + k + p + a
    xq, xh, xl, xp = (slice(0, r), slice(r, r + k), slice(r + k, r + k + p),
                      slice(r + k + p, dim_in))

    rhs = np.zeros((mu + nu, dim_in), dtype=np.complex128)
    rhs[:mu, xq] = Uc[rm, cq]
    rhs[:mu, xl] = Uc[rm, cl]
    rhs[mu:, xh] = Ur[tn, sh]
    rhs[mu:, xp] = Ur[tn, sp]
    loop = np.eye(mu + nu, dtype=np.complex128)
    loop[:mu, mu:] = -Uc[rm, cn]
    loop[mu:, :mu] = -Ur[tn, sm]
    Z = np.linalg.solve(loop, rhs) if mu + nu else rhs
    m_sig, n_sig = Z[:mu], Z[mu:]

    def pick(sl):
        out = np.zeros((sl.stop - sl.start, dim_in), dtype=np.complex128)
        out[:, sl] = np.eye(sl.stop - sl.start)
        return out

    q_new = Uc[rq, cq] @ pick(xq) + Uc[rq, cl] @ pick(xl) + Uc[rq, cn] @ n_sig
    h_new = Ur[th, sh] @ pick(xh) + Ur[th, sm] @ m_sig + Ur[th, sp] @ pick(xp)
    l_new = Uc[rl, cq] @ pick(xq) + Uc[rl, cl] @ pick(xl) + Uc[rl, cn] @ n_sig
    p_new = Ur[tp, sh] @ pick(xh) + Ur[tp, sm] @ m_sig + Ur[tp, sp] @ pick(xp)
    U = np.vstack([q_new, h_new, l_new, p_new])
    return PartitionedUnitary(U, r + k, (("L", p), ("pad_in", a)),
                              (("L'", q), ("pad_out", b)), unit_tol=tol.unit_tol)


def unitary_extension(c, ds, eps=None, tol=DEFAULT):
    """Unitary extension of ``V`` determined by a Schur parameter.

    The result acts on ``(Q (+) H_eps) (+) (L (+) pad_in)``. Its ``L' x L``
    scattering block is the solution associated with ``eps``; padding channels
    only carry the parameter's dilation. ``eps=None`` selects ``eps = 0``.
    When both defects vanish ``V`` is already unitary and ``eps`` is ignored.
    """
    coupling = coupling_unitary(c, ds, tol)
    if ds.mu == 0 and ds.nu == 0:
        return PartitionedUnitary(coupling.matrix, coupling.internal_dim,
                                  (("L", c.p), ("pad_in", 0)), (("L'", c.q), ("pad_out", 0)),
                                  unit_tol=tol.unit_tol)
    if eps is None:
        eps = SchurParameter.zero(ds.mu, ds.nu)
    if (eps.mu, eps.nu) != (ds.mu, ds.nu):
        raise InvalidDataError(
            f"parameter maps C^{eps.mu} -> C^{eps.nu}, defects need C^{ds.mu} -> C^{ds.nu}")
    U = _feedback_close(coupling, eps, tol)

    # U must agree with V on D_V (embedded with zero parameter state and padding)
    r, k = c.r, eps.state_dim
    embed = np.zeros((U.matrix.shape[1], c.d), dtype=np.complex128)
    embed[:r] = c.dom_basis[:r]
    embed[r + k:r + k + c.p] = c.dom_basis[r:]
    target = np.zeros((U.matrix.shape[0], c.d), dtype=np.complex128)
    image = c.ran_basis @ c.v_action
    target[:r] = image[:r]
    target[r + k:r + k + c.q] = image[r:]
    if embed.size and np.linalg.norm(U.matrix @ embed - target, 2) > tol.map_tol:
        raise ConsistencyError("extension does not agree with V on its domain")
    return U
