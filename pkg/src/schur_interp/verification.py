"""Independent checks that a candidate ``s`` solves given interpolation data.

None of these routines use the colligation machinery; they work directly
from ``(T, D, E, M)`` and point samples of ``s``. That makes them usable on
externally supplied candidates and as oracles for the solver.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .data import NevanlinnaPickData, SarasonData, kernel_gram, metric_norm
from .errors import DomainError, SpectrumError
from .linalg import PsdReport, as_vector, defect_quadratic, psd_check
from .scattering import check_disk_point, model_embedding_grid
from .tolerances import DEFAULT

__all__ = [
    "FsValue",
    "QuadratureSpec",
    "KsProfile",
    "HerglotzReport",
    "ShiftIdentityResult",
    "fmi_matrix",
    "fmi_prime_matrix",
    "fmi_check",
    "fmi_prime_check",
    "spectrum_distance",
    "f_transform_eval",
    "f_transform_grid",
    "fs_map",
    "model_map",
    "shift_identity_residual",
    "defect_quadratic_batch",
    "ks_norm_profile",
    "ks_norm_quadrature",
    "herglotz_diagnostic",
    "interpolation_check",
    "verify_solution",
]


@dataclass(frozen=True)
class FsValue:
    """``(F_s x)(zeta)`` split into its ``L'`` and ``L`` components."""

    plus: np.ndarray
    minus: np.ndarray
    at: complex


@dataclass(frozen=True)
class QuadratureSpec:
    """Trapezoidal rule on concentric circles.

    The model-space norm is a supremum over radii, so the reported value is
    the maximum of the per-circle means. Each circle starts with
    ``nodes_per_circle`` nodes and is refined by doubling until two
    successive means agree to ``conv_tol`` (relative to ``max(1, mean)``),
    or ``max_nodes`` is reached. Near-boundary poles of rational
    integrands otherwise need far more nodes than the default.
    """

    radii: tuple = (0.9, 0.99, 0.999)
    nodes_per_circle: int = 256
    reg_floor: float = 1e-12
    max_nodes: int = 1 << 16
    conv_tol: float = 1e-10

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(not 0 < r < 1 for r in radii):
            raise ValueError("quadrature radii must lie in (0, 1)")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("quadrature radii must be strictly increasing")
        if int(self.nodes_per_circle) < 16:
            raise ValueError("at least 16 nodes per circle are required")
        if not self.reg_floor >= 0:
            raise ValueError("reg_floor must be non-negative")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "nodes_per_circle", int(self.nodes_per_circle))
        object.__setattr__(self, "max_nodes", max(int(self.max_nodes), self.nodes_per_circle))

    def circle(self, r, nodes=None, offset=0.0):
        nodes = nodes or self.nodes_per_circle
        theta = 2 * np.pi * (np.arange(nodes) + offset) / nodes
        return r * np.exp(1j * theta)

    def circle_mean(self, fn, r):
        """Refined trapezoidal mean of ``fn`` over ``|z| = r``.

        ``fn`` maps an array of points to an array of values (leading axis
        over points). Returns ``(mean, nodes_used, converged)``.
        """
        n = self.nodes_per_circle
        total = np.sum(fn(self.circle(r, n)), axis=0)
        mean = total / n
        while True:
            if 2 * n > self.max_nodes:
                return mean, n, False
            total = total + np.sum(fn(self.circle(r, n, 0.5)), axis=0)
            n *= 2
            new = total / n
            if np.all(np.abs(new - mean) <= self.conv_tol * np.maximum(1.0, np.abs(new))):
                return new, n, True
            mean = new


# -- FMI ------------------------------------------------------------------


def _s_at(s_eval, zeta, d):
    s = np.asarray(s_eval(zeta), dtype=np.complex128)
    if s.shape != (d.q, d.p):
        raise ValueError(f"candidate has shape {s.shape}, data need {(d.q, d.p)}")
    return s


def fmi_matrix(d, s, zeta):
    """Hermitian ``(n + p)``-matrix whose positivity is the FMI at ``zeta``.

    ``s`` is the value ``s(zeta)`` (a ``q x p`` array).
    """
    zeta = check_disk_point(zeta)
    n = d.n
    R = np.eye(n) - np.conj(zeta) * d.T
    top = R.conj().T @ d.D @ R
    B = d.E - s.conj().T @ d.M
    corner = (np.eye(d.p) - s.conj().T @ s) / (1 - abs(zeta) ** 2)
    H = np.block([[top, B.conj().T], [B, corner]])
    return 0.5 * (H + H.conj().T)


def fmi_prime_matrix(d, s, zeta):
    """Hermitian ``(n + q)``-matrix whose positivity is the FMI' at ``zeta``."""
    zeta = check_disk_point(zeta)
    n = d.n
    R = zeta * np.eye(n) - d.T
    top = R.conj().T @ d.D @ R
    B = s @ d.E - d.M
    corner = (np.eye(d.q) - s @ s.conj().T) / (1 - abs(zeta) ** 2)
    H = np.block([[top, B.conj().T], [B, corner]])
    return 0.5 * (H + H.conj().T)


def fmi_check(d, s_eval, zeta, tol=DEFAULT) -> PsdReport:
    """PSD test of the FMI matrix of ``s_eval`` at one disk point."""
    H = fmi_matrix(d, _s_at(s_eval, zeta, d), zeta)
    return psd_check(H, psd_tol=tol.psd_tol, rank_tol=tol.rank_tol, herm_tol=tol.herm_tol)


def fmi_prime_check(d, s_eval, zeta, tol=DEFAULT) -> PsdReport:
    H = fmi_prime_matrix(d, _s_at(s_eval, zeta, d), zeta)
    return psd_check(H, psd_tol=tol.psd_tol, rank_tol=tol.rank_tol, herm_tol=tol.herm_tol)


# -- F_s transform ----------------------------------------------------------


def spectrum_distance(T, zeta):
    """Distances of ``zeta`` to ``sigma(T)`` and of ``1`` to ``zeta^* sigma(T)``."""
    if T.shape[0] == 0:
        return np.inf, np.inf
    lam = np.linalg.eigvals(T)
    return (float(np.min(np.abs(zeta - lam))),
            float(np.min(np.abs(1 - np.conj(zeta) * lam))))


def _guard(T, zeta, spec_tol):
    near, far = spectrum_distance(T, zeta)
    if min(near, far) <= spec_tol:
        raise SpectrumError(f"point {zeta} is within {spec_tol:g} of the spectrum of T")


def f_transform_eval(d, s_eval, x, zeta, tol=DEFAULT) -> FsValue:
    """``(s E - M)(zeta I - T)^{-1} x`` and ``conj(zeta)(E - s^H M)(I - T conj(zeta))^{-1} x``.

    Raises
    ------
    SpectrumError
        If either resolvent is (numerically) singular at ``zeta``.
    """
    zeta = check_disk_point(zeta)
    x = as_vector(x, "x")
    if x.shape[0] != d.n:
        raise ValueError(f"x has length {x.shape[0]}, expected {d.n}")
    _guard(d.T, zeta, tol.spec_tol)
    s = _s_at(s_eval, zeta, d)
    n = d.n
    y_plus = np.linalg.solve(zeta * np.eye(n) - d.T, x) if n else x
    y_minus = np.linalg.solve(np.eye(n) - np.conj(zeta) * d.T, x) if n else x
    plus = (s @ d.E - d.M) @ y_plus
    minus = np.conj(zeta) * ((d.E - s.conj().T @ d.M) @ y_minus)
    return FsValue(plus, minus, zeta)


def f_transform_grid(d, s_vals, x, zetas):
    """Batched ``F_s x`` from precomputed samples ``s_vals`` of shape ``(N, q, p)``."""
    zetas = np.asarray(zetas, dtype=np.complex128)
    x = as_vector(x, "x")[:, None]
    Yp = kernels.shifted_solve(d.T, x, zetas, 1.0)[:, :, 0]
    Ym = kernels.shifted_solve(d.T, x, 1.0, zetas.conj())[:, :, 0]
    Ex_p, Mx_p = Yp @ d.E.T, Yp @ d.M.T
    Ex_m, Mx_m = Ym @ d.E.T, Ym @ d.M.T
    plus = np.einsum("kqp,kp->kq", s_vals, Ex_p) - Mx_p
    minus = zetas.conj()[:, None] * (Ex_m - np.einsum("kqp,kq->kp", s_vals.conj(), Mx_m))
    return plus, minus


def fs_map(d, s_eval, x):
    """Batched callable ``zetas -> (plus, minus)`` for ``F_s x``."""
    def f(zetas):
        return f_transform_grid(d, s_eval.evaluate(zetas), x, zetas)
    return f


def model_map(u, h):
    """Batched callable for the model embedding of an internal vector ``h`` of ``u``."""
    def f(zetas):
        return model_embedding_grid(u, h, zetas)
    return f


class ShiftIdentityResult(NamedTuple):
    """Shift relation residual at ``t``.

    ``bias`` is the part that vanishes only on the unit circle, namely
    ``(1 - |t|^2) |(E - s^H M)(I - T conj(t))^{-1} x|``; ``corrected`` is the
    residual after removing it.
    """

    residual: float
    bias: float
    corrected: float
    at: complex


def shift_identity_residual(d, s_eval, x, t, tol=DEFAULT) -> ShiftIdentityResult:
    """Compare ``F_s(Tx)(t)`` with ``t (F_s x)(t) - [[I, s], [s^H, I]] (-Mx, Ex)``."""
    t = check_disk_point(t)
    x = as_vector(x, "x")
    lhs = f_transform_eval(d, s_eval, d.T @ x, t, tol)
    fx = f_transform_eval(d, s_eval, x, t, tol)
    s = _s_at(s_eval, t, d)
    mx, ex = d.M @ x, d.E @ x
    r_plus = lhs.plus - (t * fx.plus - (-mx + s @ ex))
    r_minus = lhs.minus - (t * fx.minus - (-(s.conj().T @ mx) + ex))
    n = d.n
    y = np.linalg.solve(np.eye(n) - np.conj(t) * d.T, x) if n else x
    b = (1 - abs(t) ** 2) * ((d.E - s.conj().T @ d.M) @ y)
    residual = float(np.sqrt(np.linalg.norm(r_plus) ** 2 + np.linalg.norm(r_minus) ** 2))
    corrected = float(np.sqrt(np.linalg.norm(r_plus) ** 2 + np.linalg.norm(r_minus - b) ** 2))
    return ShiftIdentityResult(residual, float(np.linalg.norm(b)), corrected, t)


# -- model-space norm -------------------------------------------------------


def _pinv_quad(A, h, cut):
    """Batched ``|A^{-1/2} h|^2`` on the eigenvalues above ``cut``; returns (value, residual, dropped)."""
    w, V = np.linalg.eigh(A)
    c = np.einsum("kij,ki->kj", V.conj(), h)
    keep = w > cut[:, None]
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    val = np.sum(inv * np.abs(c) ** 2, axis=1)
    resid = np.sqrt(np.sum(np.where(keep, 0.0, np.abs(c) ** 2), axis=1))
    dropped = np.any(~keep & (np.abs(w) > 0), axis=1)
    return val, resid, dropped


def defect_quadratic_batch(S, lp, l, floor=None, res_tol=DEFAULT.res_tol,
                           rank_tol=DEFAULT.rank_tol):
    """Vectorized :func:`~schur_interp.linalg.defect_quadratic` over a stack of points.

    Returns
    -------
    value : (N,) ndarray
        Quadratic form via the ``I - s^H s`` expansion.
    in_domain : (N,) bool ndarray
    regularized : (N,) bool ndarray
        Whether nonzero eigenvalues were discarded by the floor.
    gap : (N,) ndarray
        Difference to the mirrored ``I - s s^H`` expansion.
    """
    S = np.asarray(S, dtype=np.complex128)
    N, q, p = S.shape
    Sh = S.conj().transpose(0, 2, 1)
    A2 = np.eye(p) - Sh @ S
    A3 = np.eye(q) - S @ Sh
    h2 = l - np.einsum("kpq,kq->kp", Sh, lp)
    h3 = lp - np.einsum("kqp,kp->kq", S, l)

    def cut(A):
        if floor is not None:
            return np.full(N, float(floor))
        top = np.max(np.linalg.eigvalsh(A), axis=1) if A.shape[1] else np.zeros(N)
        return rank_tol * np.maximum(top, 1.0)

    g2, r2, d2 = _pinv_quad(A2, h2, cut(A2))
    g3, r3, d3 = _pinv_quad(A3, h3, cut(A3))
    nl, nlp = np.sum(np.abs(l) ** 2, axis=1), np.sum(np.abs(lp) ** 2, axis=1)
    v2, v3 = nlp + g2, nl + g3
    scale = np.maximum(np.sqrt(nlp) + np.sqrt(nl), 1e-300)
    in_domain = np.maximum(r2, r3) <= res_tol * scale
    return v2, in_domain, d2 | d3, np.abs(v2 - v3)


@dataclass(frozen=True)
class KsProfile:
    """Per-radius quadrature of the model-space quadratic form."""

    radii: tuple
    values: tuple
    nodes: tuple
    converged: bool
    regularized_nodes: int
    outside_nodes: int
    max_gap: float

    @property
    def member(self):
        return self.outside_nodes == 0

    @property
    def value(self):
        return max(self.values)

    def as_dict(self):
        return {
            "radii": list(self.radii),
            "values": [float(v) for v in self.values],
            "nodes": [int(n) for n in self.nodes],
            "converged": bool(self.converged),
            "value": float(self.value),
            "regularized_nodes": int(self.regularized_nodes),
            "outside_nodes": int(self.outside_nodes),
            "max_expansion_gap": float(self.max_gap),
        }


def ks_norm_profile(s_eval, f, spec=None, tol=DEFAULT) -> KsProfile:
    """Quadrature of ``<[[I, s], [s^H, I]]^[-1] f, f>`` on each circle of ``spec``.

    ``f`` maps an array of disk points to ``(plus, minus)`` arrays of shapes
    ``(N, q)`` and ``(N, p)``.
    """
    spec = spec or QuadratureSpec()
    stats = {"reg": 0, "out": 0, "gap": 0.0}

    def integrand(z):
        plus, minus = f(z)
        v, ok, reg, g = defect_quadratic_batch(s_eval.evaluate(z), np.asarray(plus),
                                               np.asarray(minus), floor=spec.reg_floor,
                                               res_tol=tol.res_tol, rank_tol=tol.rank_tol)
        stats["reg"] += int(np.count_nonzero(reg))
        stats["out"] += int(np.count_nonzero(~ok))
        stats["gap"] = max(stats["gap"], float(np.max(g / np.maximum(1.0, v), initial=0.0)))
        return v

    values, nodes, conv = [], [], True
    for r in spec.radii:
        m, n, c = spec.circle_mean(integrand, r)
        values.append(float(m))
        nodes.append(n)
        conv &= c
    return KsProfile(spec.radii, tuple(values), tuple(nodes), conv, stats["reg"],
                     stats["out"], stats["gap"])


def ks_norm_quadrature(s_eval, f, spec=None, tol=DEFAULT):
    """Model-space squared norm of ``f``, estimated as a maximum over the circles of ``spec``.

    Raises
    ------
    DomainError
        If ``f`` leaves the range of the defect at some node (``f`` is not
        in the model space).
    """
    prof = ks_norm_profile(s_eval, f, spec, tol)
    if not prof.member:
        raise DomainError(f"f is outside the model space at {prof.outside_nodes} node(s)")
    return prof.value


# -- Herglotz function ------------------------------------------------------


@dataclass(frozen=True)
class HerglotzReport:
    """``P_zeta(x, x)`` together with the checks it must satisfy.

    ``margin`` is ``2 Re P - <[[I, s], [s^H, I]]^[-1] F_s x, F_s x>``, which
    is non-negative for a solution (``-inf`` when the pairing is undefined). ``dual`` is the value from the second
    formula, or ``None`` when ``zeta`` is in the spectrum of ``T``.
    """

    value: complex
    dual: complex
    margin: float
    at: complex
    passed: bool

    def as_dict(self):
        def c(v):
            return None if v is None else [float(v.real), float(v.imag)]
        return {"value": c(self.value), "dual": c(self.dual), "margin": float(self.margin),
                "passed": bool(self.passed)}


def herglotz_diagnostic(d, s_eval, x, zeta, tol=DEFAULT) -> HerglotzReport:
    """Evaluate ``P_zeta(x, x)`` by both formulas and test its positivity.

    At ``zeta = 0`` the value is ``D(x, x) / 2`` even when ``T`` is singular,
    since the ``zeta``-weighted term vanishes there.

    Raises
    ------
    SpectrumError
        If ``zeta != 0`` lies within ``spec_tol`` of the spectrum of ``T``.
    """
    zeta = check_disk_point(zeta)
    x = as_vector(x, "x")
    n, T, D = d.n, d.T, d.D
    I = np.eye(n)
    near, far = spectrum_distance(T, zeta)
    if far <= tol.spec_tol or (zeta != 0 and near <= tol.spec_tol):
        raise SpectrumError(f"point {zeta} is within {tol.spec_tol:g} of the spectrum of T")
    s = _s_at(s_eval, zeta, d)
    R = np.linalg.solve(I - np.conj(zeta) * T, I)
    value = 0.5 * np.vdot((I + np.conj(zeta) * T) @ R @ x, D @ x)
    fs_minus = np.conj(zeta) * ((d.E - s.conj().T @ d.M) @ (R @ x))
    dual, quad = None, 0.0
    if near > tol.spec_tol:
        Rn = np.linalg.solve(zeta * I - T, I)
        fs_plus = (s @ d.E - d.M) @ (Rn @ x)
        value -= zeta * np.vdot(d.M @ R @ x, fs_plus)
        dual = complex(-0.5 * np.vdot(x, D @ (T + zeta * I) @ Rn @ x)
                       + np.vdot(fs_minus, d.E @ Rn @ x))
        try:
            quad = defect_quadratic(s, fs_plus, fs_minus, res_tol=tol.res_tol,
                                    rank_tol=tol.rank_tol)
        except DomainError:  # F_s x leaves the defect range, the Herglotz bound cannot hold
            quad = np.inf
    value = complex(value)
    margin = 2 * value.real - quad
    scale = max(1.0, abs(value))
    ok = value.real >= -tol.herg_tol and margin >= -tol.herg_tol * scale
    if dual is not None:
        ok = ok and abs(dual - value) <= tol.herg_tol * scale
    if zeta == 0:
        ok = ok and abs(value - 0.5 * d.form(x).real) <= tol.herg_tol * scale
    return HerglotzReport(value, dual, float(margin), zeta, bool(ok))


# -- interpolation conditions -------------------------------------------------


def _cauchy_values(s_eval, points, spec):
    """``w(a)`` for each ``a`` in ``points`` by the Cauchy formula.

    The circle sits halfway (on a log scale) between the outermost point and
    the unit circle, so both the kernel peak and poles of ``w`` just outside
    the disk are kept at a distance; the rule is refined adaptively.
    """
    a = np.asarray(points, dtype=np.complex128)
    radius = np.sqrt(max(np.max(np.abs(a)), 0.25))

    def fn(z):
        w = s_eval.evaluate(z)[:, 0, 0]
        return w[:, None] * z[:, None] / (z[:, None] - a[None, :])

    return spec.circle_mean(fn, radius)[0]


def interpolation_check(problem, s_eval, spec=None):
    """Largest violation of the interpolation conditions.

    For Nevanlinna-Pick data this is ``max_k |s(z_k) - s_k|_2``. For Sarason
    data the compression of multiplication by ``w = s`` to ``K_theta`` is
    rebuilt from Cauchy integrals of ``w`` and compared with ``W`` in the
    ``K_theta`` metric; only the refinement settings of ``spec`` are used.
    """
    if isinstance(problem, NevanlinnaPickData):
        vals = s_eval.evaluate(np.array(problem.points))
        return float(max(np.linalg.norm(v - t, 2) for v, t in zip(vals, problem.values)))
    if isinstance(problem, SarasonData):
        if (s_eval.q, s_eval.p) != (1, 1):
            raise ValueError("Sarason candidates must be scalar")
        spec = spec or QuadratureSpec()
        a = np.asarray(problem.zeros)
        G = kernel_gram(a)
        wa = _cauchy_values(s_eval, a, spec)
        W_rec = np.linalg.solve(G, wa[:, None] * G)
        return metric_norm(W_rec - np.asarray(problem.W), G)
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


# -- aggregate ------------------------------------------------------------------


def verify_solution(d, s_eval, zetas, problem=None, spec=None, tol=DEFAULT,
                    ks_bound=True, ks_slack=1e-6):
    """Run every check on one candidate and collect a JSON-ready record.

    Parameters
    ----------
    d : AipData
    s_eval : SolutionEvaluator
    zetas : array_like
        Points for the pointwise checks.
    problem : NevanlinnaPickData or SarasonData, optional
        Enables the direct interpolation check.
    ks_bound : bool
        Whether to run the model-space norm bound for the basis vectors of ``X``.
    """
    spec = spec or QuadratureSpec()
    zetas = np.atleast_1d(np.asarray(zetas, dtype=np.complex128))
    fmi_min, fmip_min, agree, fmi_ok, fmip_ok = np.inf, np.inf, True, True, True
    herg_ok, herg_margin, skipped = True, np.inf, []
    S = s_eval.evaluate(zetas)
    for k, z in enumerate(zetas):
        at_z = lambda _z, v=S[k]: v  # noqa: E731  (reuse the batched samples)
        r1 = fmi_check(d, at_z, z, tol)
        r2 = fmi_prime_check(d, at_z, z, tol)
        fmi_min = min(fmi_min, r1.min_eigenvalue)
        fmip_min = min(fmip_min, r2.min_eigenvalue)
        fmi_ok &= r1.is_psd
        fmip_ok &= r2.is_psd
        agree &= r1.is_psd == r2.is_psd
        try:
            for j in range(d.n):
                h = herglotz_diagnostic(d, at_z, np.eye(d.n)[j], z, tol)
                herg_ok &= h.passed
                herg_margin = min(herg_margin, h.margin)
        except SpectrumError:
            skipped.append([float(z.real), float(z.imag)])
    rec = {
        "points": int(len(zetas)),
        "fmi": {"passed": bool(fmi_ok), "min_eigenvalue": float(fmi_min)},
        "fmi_prime": {"passed": bool(fmip_ok), "min_eigenvalue": float(fmip_min)},
        "fmi_verdicts_agree": bool(agree),
        "herglotz": {"passed": bool(herg_ok),
                     "min_margin": None if not np.isfinite(herg_margin) else float(herg_margin)},
        "skipped_points": skipped,
    }
    passed = fmi_ok and fmip_ok and herg_ok
    if problem is not None:
        res = interpolation_check(problem, s_eval, spec)
        ok = res <= (tol.eval_tol if isinstance(problem, NevanlinnaPickData) else ks_slack)
        rec["interpolation"] = {"passed": bool(ok), "residual": float(res)}
        passed &= ok
    if ks_bound:
        worst, reg, outside = -np.inf, 0, 0
        for j in range(d.n):
            x = np.eye(d.n)[j]
            prof = ks_norm_profile(s_eval, fs_map(d, s_eval, x), spec, tol)
            worst = max(worst, prof.value - d.form(x).real)
            reg += prof.regularized_nodes
            outside += prof.outside_nodes
        ok = outside == 0 and worst <= ks_slack
        rec["ks_bound"] = {"passed": bool(ok),
                           "max_excess": None if d.n == 0 else float(worst),
                           "regularized_nodes": reg, "outside_nodes": outside,
                           "quadrature": {"radii": list(spec.radii),
                                          "nodes_per_circle": spec.nodes_per_circle,
                                          "reg_floor": spec.reg_floor}}
        passed &= ok
    rec["passed"] = bool(passed)
    return rec
