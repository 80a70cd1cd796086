import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncerg.linalg import EigensolverError, jacobi_eigh, jacobi_eigvalsh, singular_values


def _hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_matches_numpy_eigvalsh(d, seed):
    a = _hermitian(np.random.default_rng(seed), d)
    w, v = jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-11 * (1 + np.abs(w).max()))
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, a, atol=1e-11 * (1 + np.abs(a).max()))


def test_reconstruction_on_100_instances_up_to_dim_32():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = int(rng.integers(1, 33))
        a = _hermitian(rng, d)
        w, v = jacobi_eigh(a)
        err = np.linalg.norm(v @ np.diag(w) @ v.conj().T - a) / max(np.linalg.norm(a), 1e-300)
        assert err <= 1e-9


def test_stacked_input_matches_one_at_a_time():
    rng = np.random.default_rng(3)
    stack = np.stack([_hermitian(rng, 5) for _ in range(7)])
    w, v = jacobi_eigh(stack)
    assert w.shape == (7, 5) and v.shape == (7, 5, 5)
    for i in range(7):
        assert np.allclose(w[i], jacobi_eigvalsh(stack[i]), atol=1e-12)


def test_degenerate_and_diagonal_inputs():
    w, v = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(w, [-1.0, 2.0, 3.0])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])
    w, _ = jacobi_eigh(np.eye(4))
    assert np.array_equal(w, np.ones(4))
    w, _ = jacobi_eigh(np.zeros((3, 3)))
    assert np.array_equal(w, np.zeros(3))
    w, v = jacobi_eigh([[2.5]])
    assert w[0] == 2.5 and v[0, 0] == 1


def test_non_square_rejected():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


def test_sweep_cap_raises():
    a = _hermitian(np.random.default_rng(0), 12)
    with pytest.raises(EigensolverError):
        jacobi_eigh(a, max_sweeps=1)


def test_singular_values_small_ones_keep_absolute_accuracy():
    u, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(4, 4)))
    s = np.array([1.0, 1e-3, 1e-9, 1e-14])
    x = u @ np.diag(s) @ u.T
    got = singular_values(x)
    assert np.allclose(got, s, atol=1e-15 * 10, rtol=0)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_singular_values_rectangular(m, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    assert np.allclose(singular_values(x), np.linalg.svd(x, compute_uv=False), atol=1e-12)
