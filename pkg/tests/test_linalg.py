import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from schur_interp.errors import ConsistencyError, DomainError, NotPSDError
from schur_interp.linalg import (defect_quadratic, eigh_desc, gram_factor, hermitian_part,
                                 nearest_unitary, orth_complement, psd_check, psd_sqrt,
                                 pseudo_inverse_quadratic, pseudo_sqrt_solve, unitarity_defect)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 5)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def contraction(rng, q, p, mode="strict"):
    """Random contraction; ``mode`` selects strict, zeroed or unit singular values."""
    U = sla.qr(crandn(rng, q, q))[0]
    V = sla.qr(crandn(rng, p, p))[0]
    m = min(p, q)
    sv = rng.uniform(0.05, 0.95, size=m)
    if mode == "zeroed" and m:
        sv[: max(1, m // 2)] = 0.0
    elif mode == "unit" and m:
        sv[0] = 1.0
    S = np.zeros((q, p))
    S[np.arange(m), np.arange(m)] = sv
    return U @ S @ V.conj().T


# -- psd_check ---------------------------------------------------------------------


def test_psd_identity():
    rep = psd_check(np.eye(2))
    assert rep.is_psd and rep.min_eigenvalue == pytest.approx(1.0) and rep.rank == 2


def test_psd_all_ones():
    rep = psd_check(np.ones((2, 2)))
    assert rep.is_psd and abs(rep.min_eigenvalue) < 1e-14 and rep.rank == 1


def test_psd_negative_eigenvalue():
    assert not psd_check(np.diag([1.0, -1e-3]), psd_tol=1e-10).is_psd


def test_psd_rejects_bad_input():
    with pytest.raises(ValueError):
        psd_check(np.ones((2, 3)))
    with pytest.raises(ValueError):
        psd_check(np.array([[1.0, np.nan], [np.nan, 1.0]]))
    with pytest.raises(ValueError):
        psd_check(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_psd_borderline_flag():
    assert psd_check(np.diag([1.0, 1e-9])).borderline
    assert not psd_check(np.diag([1.0, 1e-3])).borderline


def test_psd_empty():
    rep = psd_check(np.zeros((0, 0)))
    assert rep.is_psd and rep.rank == 0


def test_psd_report_dict():
    d = psd_check(np.eye(3)).as_dict()
    assert set(d) == {"is_psd", "min_eigenvalue", "rank", "spectral_norm", "borderline"}


# -- gram_factor ---------------------------------------------------------------------


def test_gram_factor_zero_form():
    assert gram_factor(np.zeros((3, 3))).shape == (0, 3)


def test_gram_factor_all_ones():
    F = gram_factor(np.ones((2, 2)))
    assert F.shape == (1, 2)
    np.testing.assert_allclose(np.abs(F), [[1.0, 1.0]], atol=1e-14)


def test_gram_factor_identity_is_unitary():
    F = gram_factor(np.eye(2))
    assert unitarity_defect(F) < 1e-14


def test_gram_factor_indefinite():
    with pytest.raises(NotPSDError):
        gram_factor(np.diag([1.0, -0.5]))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 20), st.integers(0, 20))
def test_gram_factor_reproduces_form(seed, n, rank):
    rng = np.random.default_rng(seed)
    rank = min(rank, n)
    X = crandn(rng, n, rank)
    D = X @ X.conj().T
    F = gram_factor(D)
    assert F.shape[0] == np.linalg.matrix_rank(D, tol=1e-10 * max(1, np.linalg.norm(D, 2)))
    assert np.linalg.norm(F.conj().T @ F - D) <= 1e-10 * max(1.0, np.linalg.norm(D))


def test_gram_factor_deterministic():
    rng = np.random.default_rng(4)
    X = crandn(rng, 6, 3)
    D = X @ X.conj().T
    assert np.array_equal(gram_factor(D), gram_factor(D.copy()))


def test_eigh_desc_order_and_phase():
    w, V = eigh_desc(np.diag([1.0, 3.0, 2.0]))
    np.testing.assert_allclose(w, [3, 2, 1])
    for j in range(3):
        k = np.argmax(np.abs(V[:, j]))
        assert V[k, j].imag == 0 and V[k, j].real > 0


# -- pseudo square-root solve ------------------------------------------


def test_pseudo_sqrt_identity():
    h = np.array([1 + 2j, -0.5])
    np.testing.assert_allclose(pseudo_sqrt_solve(np.eye(2), h), h)


def test_pseudo_sqrt_diagonal():
    np.testing.assert_allclose(pseudo_sqrt_solve(np.diag([4.0, 0.0]), [2.0, 0.0]), [1.0, 0.0])


def test_pseudo_sqrt_kernel_direction_rejected():
    with pytest.raises(DomainError):
        pseudo_sqrt_solve(np.diag([1.0, 0.0]), [0.0, 1.0])


def test_pseudo_inverse_quadratic_diagonal():
    assert pseudo_inverse_quadratic(np.diag([4.0, 0.0]), [2.0, 0.0]) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(seeds, dims, st.integers(0, 5))
def test_pseudo_sqrt_residual_orthogonality_minimality(seed, n, rank):
    rng = np.random.default_rng(seed)
    rank = min(rank, n)
    X = crandn(rng, n, rank)
    A = X @ X.conj().T
    w0 = crandn(rng, n)
    h0 = psd_sqrt(A) @ w0
    g0 = pseudo_sqrt_solve(A, h0)
    R = psd_sqrt(A)
    assert np.linalg.norm(R @ g0 - h0) <= 1e-8 * max(1.0, np.linalg.norm(h0))
    # orthogonal to ker A
    w, V = np.linalg.eigh(A)
    ker = V[:, w <= 1e-10 * max(1.0, w.max())]
    assert np.linalg.norm(ker.conj().T @ g0) <= 1e-8 * max(1.0, np.linalg.norm(g0))
    # oracle: g0 is the projection of w0 onto range(A) = range(X)
    ref = X @ np.linalg.lstsq(X, w0, rcond=None)[0] if rank else np.zeros(n)
    np.testing.assert_allclose(g0, ref, atol=1e-7 * max(1, np.linalg.norm(g0)))
    # minimality against kernel-shifted competitors
    v = g0 + ker @ crandn(rng, ker.shape[1])
    assert np.linalg.norm(R @ v - h0) <= 1e-8 * max(1.0, np.linalg.norm(h0))
    assert np.linalg.norm(g0) <= np.linalg.norm(v) + 1e-8


# -- intertwining ---------------------------------------------------------


@pytest.mark.parametrize("mode", ["strict", "zeroed", "unit"])
@settings(max_examples=30, deadline=None)
@given(seed=seeds, q=dims, p=dims)
def test_defect_intertwining(mode, seed, q, p):
    rng = np.random.default_rng(seed)
    s = contraction(rng, q, p, mode)
    sh = s.conj().T
    Ap, Aq = np.eye(p) - sh @ s, np.eye(q) - s @ sh
    # vectors in the domains of the left-hand operators
    v = psd_sqrt(Ap) @ crandn(rng, p)
    w = psd_sqrt(Aq) @ crandn(rng, q)
    tiny = 1e-12 * (np.linalg.norm(v) + np.linalg.norm(w))
    lhs = s @ pseudo_sqrt_solve(Ap, v, atol=tiny)
    rhs = pseudo_sqrt_solve(Aq, s @ v, atol=tiny)
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(v))
    lhs = pseudo_sqrt_solve(Ap, sh @ w, atol=tiny)
    rhs = sh @ pseudo_sqrt_solve(Aq, w, atol=tiny)
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(w))


# -- block inverse expansions ------------------------------------------------


def test_defect_quadratic_zero_s():
    assert defect_quadratic(np.zeros((1, 2)), [1.0], [1.0, 1j]) == pytest.approx(3.0)


def test_defect_quadratic_half():
    assert defect_quadratic([[0.5]], [1.0], [0.0]) == pytest.approx(4 / 3, rel=1e-12)


def test_defect_quadratic_small_example():
    assert defect_quadratic([[0.5]], [1.0], [1.0]) >= 1.0


def test_defect_quadratic_domain_error():
    with pytest.raises(DomainError):
        defect_quadratic([[1.0]], [1.0], [0.0])


def test_defect_quadratic_rejects_expansive():
    with pytest.raises(ValueError):
        defect_quadratic([[1.5]], [1.0], [0.0])


def test_defect_quadratic_disagreement_detected(monkeypatch):
    import schur_interp.linalg as la
    monkeypatch.setattr(la, "_defect_terms", lambda *a: (1.0, 2.0, False))
    with pytest.raises(ConsistencyError):
        la.defect_quadratic([[0.5]], [1.0], [1.0])


@pytest.mark.parametrize("mode", ["strict", "zeroed", "unit"])
@settings(max_examples=30, deadline=None)
@given(seed=seeds, q=dims, p=dims)
def test_defect_quadratic_matches_block_inverse(mode, seed, q, p):
    rng = np.random.default_rng(seed)
    s = contraction(rng, q, p, mode)
    J = np.block([[np.eye(q), s], [s.conj().T, np.eye(p)]])
    # a vector in range(J) = domain of J^[-1/2] in finite dimensions
    y = J @ crandn(rng, p + q)
    lp, l = y[:q], y[q:]
    val = defect_quadratic(s, lp, l)
    ref = float(np.vdot(y, np.linalg.pinv(J, rcond=1e-10, hermitian=True) @ y).real)
    assert abs(val - ref) <= 1e-8 * max(1.0, ref)
    assert val >= np.vdot(l, l).real - 1e-8 * max(1.0, val)
    assert val >= np.vdot(lp, lp).real - 1e-8 * max(1.0, val)


# -- helpers ------------------------------------------------------------------------------------


def test_hermitian_part_rejects_skew():
    with pytest.raises(ValueError):
        hermitian_part(np.array([[0, 1], [-1, 0]]))


def test_orth_complement_and_polar():
    rng = np.random.default_rng(3)
    Q = sla.qr(crandn(rng, 5, 2), mode="economic")[0]
    C = orth_complement(Q, 5)
    assert C.shape == (5, 3)
    assert np.linalg.norm(Q.conj().T @ C) < 1e-12
    assert unitarity_defect(np.hstack([Q, C])) < 1e-12
    assert unitarity_defect(nearest_unitary(crandn(rng, 4, 4))) < 1e-12
    assert unitarity_defect(np.ones((2, 3))) == np.inf
