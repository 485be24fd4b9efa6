import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affinecat.linalg import (DimensionError, NotHermitianError, ToleranceConfig, basis_matrix,
                              dagger, extend_to_orthonormal, frobenius_distance, hermitian_eig,
                              is_hermitian, is_isometry, is_psd, kron, matrix_from_json,
                              matrix_to_json, numerical_rank, partial_trace, trace)

from conftest import random_complex, random_hermitian

dims = st.integers(min_value=1, max_value=4)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def gaussian_integers(rng, rows, cols):
    return rng.integers(-9, 10, (rows, cols)) + 1j * rng.integers(-9, 10, (rows, cols))


def kron_oracle(a, b):
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(b.shape[0]):
                for l in range(b.shape[1]):
                    out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


def partial_trace_oracle(x, n, a, factor):
    if factor == "second":
        return np.array([[sum(x[i * a + k, j * a + k] for k in range(a)) for j in range(n)]
                         for i in range(n)])
    return np.array([[sum(x[k * a + i, k * a + j] for k in range(n)) for j in range(a)]
                     for i in range(a)])


def test_tolerance_config_defaults_and_validation():
    tol = ToleranceConfig()
    assert (tol.atol, tol.rank_rtol) == (1e-9, 1e-10)
    with pytest.raises(ValueError):
        ToleranceConfig(atol=0)
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rtol=-1)


def test_kron_basic_cases():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    e = basis_matrix(0, 0, 2)
    out = kron(e, e)
    assert out[0, 0] == 1 and np.count_nonzero(out) == 1


def test_kron_matches_index_formula(rng):
    a, b = random_complex(rng, 2, 3), random_complex(rng, 3, 2)
    assert np.abs(kron(a, b) - kron_oracle(a, b)).max() <= 1e-14
    # Gaussian-integer entries make every product exact
    a, b = gaussian_integers(rng, 2, 3), gaussian_integers(rng, 3, 2)
    assert np.array_equal(kron(a, b), kron_oracle(a, b))


@given(seeds, dims, dims, dims)
def test_kron_associative_exactly(seed, p, q, r):
    rng = np.random.default_rng(seed)
    a, b, c = (gaussian_integers(rng, d, d + 1) for d in (p, q, r))
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_dagger():
    assert np.array_equal(dagger(np.eye(3)), np.eye(3))
    assert np.array_equal(dagger(np.array([[0, 1j]])), np.array([[0], [-1j]]))


@given(seeds, dims, dims)
def test_dagger_involution(seed, r, c):
    a = random_complex(np.random.default_rng(seed), r, c)
    assert np.array_equal(dagger(dagger(a)), a)


def test_partial_trace_of_product_state(rng):
    rho, sigma = random_complex(rng, 3, 3), random_complex(rng, 2, 2)
    out = partial_trace(kron(rho, sigma), 3, 2, "second")
    assert frobenius_distance(out, np.trace(sigma) * rho) <= 1e-12
    out = partial_trace(kron(rho, sigma), 3, 2, "first")
    assert frobenius_distance(out, np.trace(rho) * sigma) <= 1e-12


def test_partial_trace_matches_summation_oracle(rng):
    x = random_complex(rng, 12, 12)
    for factor in ("first", "second"):
        expected = partial_trace_oracle(x, 3, 4, factor)
        assert frobenius_distance(partial_trace(x, 3, 4, factor), expected) <= 1e-12


def test_partial_trace_rejects_bad_shape():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(5), 2, 3)


@given(seeds, dims, dims, dims)
def test_partial_trace_nested_equals_merged(seed, n, a, b):
    x = random_complex(np.random.default_rng(seed), n * a * b, n * a * b)
    nested = partial_trace(partial_trace(x, n * a, b), n, a)
    assert frobenius_distance(nested, partial_trace(x, n, a * b)) <= 1e-9


@given(seeds, dims, dims)
def test_partial_trace_preserves_trace(seed, n, a):
    x = random_complex(np.random.default_rng(seed), n * a, n * a)
    for factor in ("first", "second"):
        assert abs(trace(partial_trace(x, n, a, factor)) - trace(x)) <= 1e-9


def test_two_point_partial_trace_of_injection_conjugate():
    # V_f for f = (0, 1, 5): 3 -> 2 (x) 3, traced over the 2-dim factor
    v = np.zeros((6, 3))
    v[[0, 1, 5], [0, 1, 2]] = 1
    for i in range(3):
        for j in range(3):
            e = basis_matrix(i, j, 3)
            out = partial_trace(v @ e @ v.T, 2, 3, "first")
            expected = e.copy()
            if (i == 2) != (j == 2):
                expected[i, j] = 0
            assert np.array_equal(out, expected)


def test_hermitian_eig_simple_cases():
    w, u = hermitian_eig(np.diag([3.0, 1.0]))
    assert np.allclose(w, [3, 1]) and np.allclose(np.abs(u), np.eye(2))
    w, u = hermitian_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(w, [1, -1])
    s = 1 / np.sqrt(2)
    assert abs(abs(np.vdot(u[:, 0], [s, s])) - 1) <= 1e-12
    assert abs(abs(np.vdot(u[:, 1], [s, -s])) - 1) <= 1e-12


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermitian_eig_against_numpy_on_1000_matrices():
    rng = np.random.default_rng(7)
    for trial in range(1000):
        n = int(rng.integers(1, 17))
        a = random_hermitian(rng, n)
        w, u = hermitian_eig(a)
        assert np.all(np.diff(w) <= 1e-12)
        assert np.linalg.norm(u.conj().T @ u - np.eye(n)) <= 1e-9
        assert np.linalg.norm(u @ np.diag(w) @ u.conj().T - a) <= 1e-9
        # independent oracle for the spectrum
        assert np.allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-9)


def test_hermitian_eig_degenerate_and_low_rank(rng):
    v = random_complex(rng, 6, 2)
    a = v @ v.conj().T
    w, u = hermitian_eig(a)
    assert numerical_rank(w) == 2
    assert np.linalg.norm(u @ np.diag(w) @ u.conj().T - a) <= 1e-9
    w, _ = hermitian_eig(np.eye(5) * 2)
    assert np.allclose(w, 2)


def test_is_isometry_examples():
    assert is_isometry(np.eye(4))
    assert is_isometry(np.array([[1.0], [0.0]]))
    assert not is_isometry(2 * np.eye(2))
    assert not is_isometry(np.ones((1, 2)) / np.sqrt(2))


def test_psd_and_basis_matrix():
    assert is_psd(np.eye(3))
    assert not is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    e = basis_matrix(0, 1, 3)
    assert e.shape == (3, 3) and e[0, 1] == 1 and np.count_nonzero(e) == 1
    assert is_hermitian(np.eye(2)) and not is_hermitian(e)
    assert trace(np.diag([1, 2, 3j])) == 3 + 3j


def test_extend_to_orthonormal(rng):
    c = extend_to_orthonormal(np.array([[1.0], [0.0]]))
    assert c.shape == (2, 1) and abs(abs(c[1, 0]) - 1) <= 1e-12
    assert extend_to_orthonormal(np.eye(3)).shape == (3, 0)
    q, _ = np.linalg.qr(random_complex(rng, 5, 2))
    full = np.hstack([q, extend_to_orthonormal(q)])
    assert np.linalg.norm(full.conj().T @ full - np.eye(5)) <= 1e-9


@given(seeds, dims, dims)
def test_matrix_json_round_trip_is_bit_exact(seed, r, c):
    a = random_complex(np.random.default_rng(seed), r, c)
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(a))))
    assert np.array_equal(back, a)


def test_matrix_json_rejects_malformed():
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 1})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 1, "cols": 1, "data": [[float("nan"), 0]]})
