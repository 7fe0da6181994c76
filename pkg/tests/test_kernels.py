import numpy as np
import pytest

from schur_interp import _kernels_py, kernels


def _rand(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


backends = [_kernels_py]
if kernels.BACKEND == "cython":
    from schur_interp import _ckernels
    backends.append(_ckernels)


@pytest.mark.parametrize("impl", backends, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_shifted_solve_matches_dense_solve(impl):
    rng = np.random.default_rng(0)
    A, B = _rand(rng, 5, 5) / 4, _rand(rng, 5, 2)
    alpha, beta = _rand(rng, 7), _rand(rng, 7) * 0.3
    Y = kernels.shifted_solve(A, B, alpha, beta, impl=impl)
    for k in range(7):
        ref = np.linalg.solve(alpha[k] * np.eye(5) - beta[k] * A, B)
        np.testing.assert_allclose(Y[k], ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("impl", backends, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_transfer_eval_matches_formula(impl):
    rng = np.random.default_rng(1)
    A, B, C, D = _rand(rng, 4, 4) / 5, _rand(rng, 4, 3), _rand(rng, 2, 4), _rand(rng, 2, 3)
    z = 0.9 * np.exp(2j * np.pi * rng.random(6))
    S = kernels.transfer_eval(A, B, C, D, z, impl=impl)
    for k, zk in enumerate(z):
        ref = D + zk * C @ np.linalg.solve(np.eye(4) - zk * A, B)
        np.testing.assert_allclose(S[k], ref, rtol=1e-12, atol=1e-12)


def test_backends_agree():
    rng = np.random.default_rng(2)
    A, B, C, D = _rand(rng, 6, 6) / 6, _rand(rng, 6, 2), _rand(rng, 3, 6), _rand(rng, 3, 2)
    z = 0.7 * np.exp(2j * np.pi * rng.random(32))
    ref = kernels.transfer_eval(A, B, C, D, z, impl=_kernels_py)
    out = kernels.transfer_eval(A, B, C, D, z)
    assert np.max(np.abs(ref - out)) < 1e-12


def test_empty_state_gives_feedthrough():
    D = np.array([[1.0, 2.0]])
    S = kernels.transfer_eval(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((1, 0)), D, [0.1, 0.5j])
    np.testing.assert_array_equal(S, np.stack([D, D]))


def test_shape_validation():
    with pytest.raises(ValueError):
        kernels.shifted_solve(np.eye(2), np.ones((3, 1)), 1.0, 0.5)
    with pytest.raises(ValueError):
        kernels.transfer_eval(np.eye(2), np.ones((2, 1)), np.ones((1, 3)), np.ones((1, 1)), [0.1])


def test_singular_shift_raises():
    with pytest.raises(np.linalg.LinAlgError):
        kernels.shifted_solve(np.eye(2), np.ones((2, 1)), 1.0, 1.0)
