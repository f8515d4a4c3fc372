import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spinorder.exceptions import InvalidInputError
from spinorder.linalg import (
    DEGENERACY_TOL,
    _round_robin,
    as_hermitian,
    eigh,
    entropy_bits,
    expectation,
    kron,
    trace_product,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


@pytest.mark.parametrize("n", [1, 2, 3, 5, 16, 17, 64])
def test_eigh_matches_lapack(rng, n):
    a = random_hermitian(rng, n)
    dec = eigh(a)
    lam = np.asarray(dec.eigenvalues)
    np.testing.assert_allclose(np.sort(lam)[::-1], np.linalg.eigvalsh(a)[::-1], atol=1e-10)
    # members of a degenerate group keep diagonal order, so descent holds up to the group tolerance
    assert np.all(np.diff(lam) < DEGENERACY_TOL)
    assert all(np.ptp(lam[list(g)]) < DEGENERACY_TOL * len(g) for g in dec.groups)
    v = dec.eigenvectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-11)
    np.testing.assert_allclose(dec.reconstruct(), a, atol=1e-10)
    assert np.all(np.diff(dec.eigenvalues) <= 0)


def test_eigh_phase_convention(rng):
    v = eigh(random_hermitian(rng, 8)).eigenvectors
    for k in range(8):
        i = int(np.argmax(np.abs(v[:, k])))
        assert v[i, k].imag == 0.0 and v[i, k].real > 0


def test_eigh_real_symmetric_stays_real(rng):
    a = rng.normal(size=(6, 6))
    v = eigh(a + a.T).eigenvectors
    assert np.max(np.abs(v.imag)) < 1e-12


def test_diagonal_input_keeps_index_order():
    dec = eigh(np.diag([0.25, 0.25, 0.25, 0.25]))
    np.testing.assert_array_equal(dec.eigenvectors, np.eye(4))
    assert dec.groups == ((0, 1, 2, 3),)


def test_groups_split_on_gap():
    dec = eigh(np.diag([0.1, 0.5, 0.1 + DEGENERACY_TOL / 10, 0.3]))
    assert dec.groups == ((0,), (1,), (2, 3))
    np.testing.assert_allclose(dec.eigenvalues, [0.5, 0.3, 0.1 + 1e-10, 0.1])


def test_degenerate_subspace_is_exact():
    # Heisenberg-like triplet degeneracy: sigma.sigma has eigenvalues (1, 1, 1, -3)
    s = np.array([[1, 0, 0, 0], [0, -1, 2, 0], [0, 2, -1, 0], [0, 0, 0, 1]], dtype=complex)
    dec = eigh(s)
    np.testing.assert_allclose(dec.eigenvalues, [1, 1, 1, -3], atol=1e-14)
    assert dec.groups == ((0, 1, 2), (3,))
    np.testing.assert_allclose(dec.reconstruct(), s, atol=1e-13)


def test_eigh_outputs_read_only(rng):
    dec = eigh(random_hermitian(rng, 3))
    with pytest.raises(ValueError):
        dec.eigenvalues[0] = 1.0


def test_eigh_deterministic(rng):
    a = random_hermitian(rng, 12)
    d1, d2 = eigh(a), eigh(a.copy())
    np.testing.assert_array_equal(d1.eigenvectors, d2.eigenvectors)
    np.testing.assert_array_equal(d1.eigenvalues, d2.eigenvalues)


@pytest.mark.parametrize(
    "bad",
    [np.array([[1, 2], [0, 1]]), np.ones((2, 3)), np.array([[np.nan, 0], [0, 1]]), np.zeros((0, 0))],
)
def test_as_hermitian_rejects(bad):
    with pytest.raises(InvalidInputError):
        as_hermitian(bad)


def test_as_hermitian_tolerance_scales():
    m = np.array([[1e6, 1.0], [1.0 + 1e-7, 0.0]])
    as_hermitian(m)
    with pytest.raises(InvalidInputError):
        as_hermitian(np.array([[1.0, 1.0], [1.0 + 1e-9, 0.0]]))


@pytest.mark.parametrize("n", [2, 3, 4, 7, 8])
def test_round_robin_covers_pairs_once(n):
    seen = []
    for p, q in _round_robin(n):
        assert len(set(p) | set(q)) == 2 * len(p)  # disjoint rotations in a round
        seen += list(zip(p.tolist(), q.tolist()))
    assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


def test_entropy_bits_examples():
    assert entropy_bits([1.0]) == 0.0
    assert entropy_bits([0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)
    assert entropy_bits(np.full(8, 1 / 8)) == pytest.approx(3.0, abs=1e-14)
    assert entropy_bits([1.0, 0.0, -1e-13]) == 0.0
    with pytest.raises(InvalidInputError):
        entropy_bits([0.6, 0.6])
    with pytest.raises(InvalidInputError):
        entropy_bits([1.1, -0.1])
    with pytest.raises(InvalidInputError):
        entropy_bits([])


def test_kron_ordering():
    a = np.array([[1, 2], [3, 4]])
    b = np.eye(2)
    assert kron(a, b)[0 * 2 + 1, 1 * 2 + 1] == 2  # index mu * dim(b) + nu


def test_trace_and_expectation(rng):
    rho = random_hermitian(rng, 4)
    m = random_hermitian(rng, 4)
    assert trace_product(m, rho) == pytest.approx(np.trace(rho @ m), abs=1e-12)
    with pytest.raises(InvalidInputError):
        expectation(np.array([[0, 1], [0, 0]]), np.eye(2) / 2 + np.array([[0, 0], [1j, 0]]))
    with pytest.raises(InvalidInputError):
        trace_product(np.eye(2), np.eye(3))


def _hermitian_from(x):
    n = x.shape[0]
    return (x + x.T) / 2 + 1j * (np.triu(x, 1) - np.triu(x, 1).T) / 2 if n else x


@given(arrays(np.float64, st.tuples(st.integers(1, 9), st.just(9)), elements=st.floats(-5, 5)))
def test_property_eigh_vs_lapack(x):
    n = x.shape[0]
    a = _hermitian_from(x[:, :n])
    dec = eigh(a)
    lam = np.asarray(dec.eigenvalues)
    np.testing.assert_allclose(np.sort(lam)[::-1], np.linalg.eigvalsh(a)[::-1], atol=1e-10)
    # members of a degenerate group keep diagonal order, so descent holds up to the group tolerance
    assert np.all(np.diff(lam) < DEGENERACY_TOL)
    assert all(np.ptp(lam[list(g)]) < DEGENERACY_TOL * len(g) for g in dec.groups)
    np.testing.assert_allclose(dec.reconstruct(), a, atol=1e-10)
    assert sum(len(g) for g in dec.groups) == n
