import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvcnoise import linalg
from qvcnoise.gates import I2, X, Z, cz

seeds = st.integers(0, 2**32 - 1)


def test_kron_examples():
    assert linalg.allclose(linalg.kron(I2, I2), np.eye(4), 0)
    assert linalg.allclose(linalg.kron(Z, I2), np.diag([1, 1, -1, -1]), 0)
    xz = linalg.kron(X, Z)
    assert linalg.allclose(xz[:2, 2:], Z, 0) and linalg.allclose(xz[2:, :2], Z, 0)
    assert not xz[:2, :2].any() and not xz[2:, 2:].any()
    with pytest.raises(ValueError):
        linalg.kron(np.zeros((0, 0)), I2)


def test_matexp_examples():
    assert linalg.allclose(linalg.matexp(np.zeros((3, 3))), np.eye(3), 1e-15)
    assert linalg.allclose(linalg.matexp(-1j * np.pi * X / 2), -1j * X, 1e-12)
    assert linalg.allclose(linalg.matexp(np.diag([0.3, -2.0])), np.diag(np.exp([0.3, -2.0])), 1e-14)
    with pytest.raises(ValueError):
        linalg.matexp(np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_matexp_inverse(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a *= 5 * rng.uniform() / np.linalg.norm(a, 2)
    assert linalg.allclose(linalg.matexp(a) @ linalg.matexp(-a), np.eye(4), 1e-9)


def test_vectorize_examples():
    rho = np.diag([1.0, 0.0])
    assert np.array_equal(linalg.vectorize(rho), [1, 0, 0, 0])
    # column stacking: the (1, 0) entry comes second
    m = np.array([[1, 2], [3, 4]])
    assert np.array_equal(linalg.vectorize(m), [1, 3, 2, 4])
    with pytest.raises(ValueError):
        linalg.devectorize(np.ones(5))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3))
def test_vectorize_round_trip_and_unitary_superop(seed, n):
    rng = np.random.default_rng(seed)
    rho = linalg.random_density(n, rng)
    assert np.array_equal(linalg.devectorize(linalg.vectorize(rho)), rho)
    u = linalg.random_unitary(2**n, rng)
    out = linalg.devectorize(linalg.unitary_superop(u) @ linalg.vectorize(rho))
    assert linalg.allclose(out, u @ rho @ u.conj().T, 1e-12)
    assert abs(np.trace(out) - np.trace(rho)) < 1e-12


def test_embed_local_examples():
    assert linalg.allclose(linalg.embed_local(X, [0], 1), X, 0)
    assert linalg.allclose(linalg.embed_local(Z, [1], 2), np.kron(I2, Z), 0)
    full = linalg.embed_local(cz(), [0, 2], 3)
    expected = np.ones(8)
    expected[[0b101, 0b111]] = -1
    assert linalg.allclose(full, np.diag(expected), 0)
    with pytest.raises(ValueError):
        linalg.embed_local(cz(), [1, 1], 3)
    with pytest.raises(ValueError):
        linalg.embed_local(X, [0, 1], 3)


def test_embed_local_respects_target_order():
    a = np.kron(X, Z)
    assert linalg.allclose(linalg.embed_local(a, [1, 0], 2), np.kron(Z, X), 0)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 4))
def test_apply_superop_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 3))
    targets = list(rng.choice(n, size=k, replace=False))
    u = linalg.random_unitary(2**k, rng)
    rhos = np.stack([linalg.random_density(n, rng) for _ in range(3)])
    big = linalg.embed_local(u, targets, n)
    out = linalg.apply_superop(rhos, linalg.unitary_superop(u), targets, n)
    assert linalg.allclose(out, big @ rhos @ big.conj().T, 1e-12)


def test_local_overlap_is_trace_pairing():
    rng = np.random.default_rng(3)
    n = 3
    obs = np.stack([linalg.random_density(n, rng) for _ in range(2)])
    rho = np.stack([linalg.random_density(n, rng) for _ in range(4)])
    s = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    k = linalg.local_overlap(obs, rho, [1], n)
    out = linalg.apply_superop(rho, s, [1], n)
    direct = np.einsum("jxy,byx->bj", linalg.dagger(obs), out)
    via_k = np.einsum("ac,bjac->bj", s, k)
    assert linalg.allclose(via_k, direct, 1e-12)


def test_density_helpers():
    mixed = linalg.maximally_mixed(2)
    assert linalg.is_density_matrix(mixed)
    assert linalg.purity(mixed) == pytest.approx(0.25)
    assert linalg.trace_distance(mixed, mixed) == 0
    assert not linalg.is_density_matrix(np.diag([1.0, -0.5]) + 0.25)
