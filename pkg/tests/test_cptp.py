import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affinecat import cptp
from affinecat.cptp import CptpMor, NotCPTPError, is_cptp
from affinecat.isometry import IsometryMor, iso_compose, iso_tensor, random_isometry, symmetry
from affinecat.linalg import DimensionError, kron

seeds = st.integers(min_value=0, max_value=2**32 - 1)
small = st.integers(min_value=1, max_value=3)


def random_kraus(rng, m, n, count):
    count = max(count, -(-m // n))
    v = random_isometry(m, n * count, rng).matrix.reshape(n, count, m)
    return [v[:, k, :] for k in range(count)]


def kraus_apply(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


def test_apply_examples(rng):
    rho = cptp.random_density(3, rng)
    assert np.allclose(cptp.identity_channel(3)(rho), rho)
    assert np.allclose(cptp.trace_channel(3)(rho), [[np.trace(rho)]])
    with pytest.raises(DimensionError):
        cptp.identity_channel(2)(rho)


@given(seeds, small, small, small)
def test_apply_matches_kraus_sum(seed, m, n, k):
    rng = np.random.default_rng(seed)
    ops = random_kraus(rng, m, n, k)
    f = cptp.from_kraus(ops)
    for _ in range(3):
        rho = cptp.random_density(m, rng)
        assert np.linalg.norm(f(rho) - kraus_apply(ops, rho)) <= 1e-9


@given(seeds, small, small)
def test_apply_is_linear_and_preserves_density(seed, m, n):
    rng = np.random.default_rng(seed)
    f = cptp.random_channel(m, n, rng)
    rho, sigma = cptp.random_density(m, rng), cptp.random_density(m, rng)
    alpha, beta = 0.3 - 1.2j, 2.5
    lhs = f(alpha * rho + beta * sigma)
    assert np.linalg.norm(lhs - (alpha * f(rho) + beta * f(sigma))) <= 1e-9
    assert cptp.is_density(f(rho))


def test_choi_round_trip_through_apply(rng):
    f = cptp.random_channel(3, 2, rng)
    rebuilt = cptp.choi_from_action(f, 3)
    assert np.array_equal(rebuilt, np.block([[f.block(i, j) for j in range(3)] for i in range(3)]))
    assert np.linalg.norm(rebuilt - f.choi) <= 1e-12


def test_from_isometry(rng):
    assert cptp.equal(cptp.from_isometry(IsometryMor.from_matrix(np.eye(3))), cptp.identity_channel(3))
    for theta in (0.3, 1.7, np.pi):
        phase = cptp.from_isometry(IsometryMor.from_matrix([[np.exp(1j * theta)]]))
        assert cptp.equal(phase, cptp.identity_channel(1))
    v = random_isometry(2, 4, rng)
    rho = cptp.random_density(2, rng)
    assert np.linalg.norm(cptp.from_isometry(v)(rho) - v.matrix @ rho @ v.matrix.conj().T) <= 1e-9


@given(seeds, small, small, small)
def test_e_is_strict_symmetric_monoidal(seed, m, n, p):
    rng = np.random.default_rng(seed)
    v = random_isometry(m, m + n, rng)
    w = random_isometry(m + n, m + n + p, rng)
    u = random_isometry(p, p + 1, rng)
    E = cptp.from_isometry
    assert cptp.channel_distance(E(iso_compose(w, v)), cptp.compose(E(w), E(v))) <= 1e-9
    assert cptp.channel_distance(E(iso_tensor(v, u)), cptp.tensor(E(v), E(u))) <= 1e-9
    sigma = E(symmetry(m, p))
    rho, tau = cptp.random_density(m, rng), cptp.random_density(p, rng)
    assert np.linalg.norm(sigma(kron(rho, tau)) - kron(tau, rho)) <= 1e-9


@given(seeds, small, small, small, small)
def test_compose_and_tensor_match_apply(seed, m, n, p, q):
    rng = np.random.default_rng(seed)
    f, g, h = cptp.random_channel(m, n, rng), cptp.random_channel(n, p, rng), cptp.random_channel(p, q, rng)
    gf, fh = cptp.compose(g, f), cptp.tensor(f, h)
    for _ in range(5):
        rho, sigma = cptp.random_density(m, rng), cptp.random_density(p, rng)
        assert np.linalg.norm(gf(rho) - g(f(rho))) <= 1e-9
        assert np.linalg.norm(fh(kron(rho, sigma)) - kron(f(rho), h(sigma))) <= 1e-9
    assert is_cptp(gf.choi, m, p).ok and is_cptp(fh.choi, m * p, n * q).ok


def test_compose_rejects_mismatch(rng):
    with pytest.raises(DimensionError):
        cptp.compose(cptp.identity_channel(2), cptp.identity_channel(3))


def test_trace_channels(rng):
    f = cptp.random_channel(2, 3, rng)
    assert cptp.equal(cptp.compose(f, cptp.identity_channel(2)), f)
    assert cptp.equal(cptp.tensor(cptp.trace_channel(2), cptp.trace_channel(3)), cptp.trace_channel(6))
    assert cptp.equal(cptp.partial_trace_channel(3, 1), cptp.identity_channel(3))
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    out = cptp.partial_trace_channel(2, 2)(np.outer(bell, bell))
    assert np.linalg.norm(out - np.eye(2) / 2) <= 1e-12
    # two routes to the unit agree
    via_partial = cptp.compose(cptp.trace_channel(2), cptp.partial_trace_channel(2, 3))
    assert cptp.equal(via_partial, cptp.trace_channel(6))


def test_unit_is_terminal():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        f = cptp.random_channel(n, 1, rng)
        assert cptp.channel_distance(f, cptp.trace_channel(n)) <= 1e-9


def test_is_cptp_reports(rng):
    assert is_cptp(cptp.identity_channel(3).choi, 3, 3).ok
    # the transpose map on 2x2 matrices has the swap as Choi matrix
    transpose_choi = symmetry(2, 2).matrix
    report = is_cptp(transpose_choi, 2, 2)
    assert report.tp and not report.cp
    assert abs(report.min_eigenvalue + 1) <= 1e-9
    v = random_isometry(3, 6, rng)
    assert is_cptp(cptp.from_isometry(v).choi, 3, 6).ok
    assert not is_cptp(2 * np.eye(4), 2, 2).tp
    with pytest.raises(DimensionError):
        is_cptp(np.eye(3), 2, 2)


def test_constructor_validates(rng):
    with pytest.raises(NotCPTPError):
        CptpMor(2, 2, symmetry(2, 2).matrix)
    with pytest.raises(NotCPTPError):
        CptpMor(2, 2, np.eye(4))
    with pytest.raises(DimensionError):
        CptpMor(2, 2, np.eye(3))


def test_equal_examples(rng):
    f = cptp.random_channel(3, 3, rng)
    assert cptp.equal(f, f)
    v = random_isometry(2, 3, rng)
    rotated = IsometryMor(2, 3, np.exp(0.7j) * v.matrix)
    assert cptp.equal(cptp.from_isometry(v), cptp.from_isometry(rotated))
    for n in (2, 3):
        prepared = cptp.compose(cptp.prepare_channel(np.eye(n) / n), cptp.trace_channel(n))
        assert not cptp.equal(cptp.identity_channel(n), prepared)
    with pytest.raises(DimensionError):
        cptp.channel_distance(cptp.identity_channel(2), cptp.identity_channel(3))


def test_json_round_trip(rng):
    f = cptp.random_channel(2, 3, rng)
    back = CptpMor.from_json(json.loads(json.dumps(f.to_json())))
    assert np.array_equal(back.choi, f.choi)
    with pytest.raises(ValueError):
        CptpMor.from_json({"dom": 2})


def test_random_channel_kraus_rank(rng):
    f = cptp.random_channel(2, 2, rng, kraus_rank=1)
    assert np.linalg.matrix_rank(f.choi, tol=1e-8) == 1
