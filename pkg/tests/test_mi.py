import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle_values as ov
from conftest import random_state_amplitudes
from oracle_tools import mutual_info
from spinorder.exceptions import InvalidInputError
from spinorder.hilbert import Block, StateVector, joint_rdm, partial_trace
from spinorder.mi import (
    default_distances,
    mi_profile,
    min_block_scan,
    mutual_information,
    mutual_information_from_p,
    mutual_information_from_rdms,
    p_matrix,
    von_neumann_entropy,
)
from spinorder.models import polarized_state


def _rdms(state, a, b):
    return partial_trace(state, a), partial_trace(state, b), joint_rdm(state, a, b)


def test_ghz_mutual_information(ghz12):
    assert mutual_information(ghz12, Block((2,)), Block((9,))) == pytest.approx(1.0, abs=1e-10)
    prof = mi_profile(ghz12, 1)
    np.testing.assert_allclose(prof.values, 1.0, atol=1e-10)
    assert prof.verdict == "non-vanishing"


def test_product_state_has_zero_mi():
    s = polarized_state(8)
    assert mutual_information(s, Block((0, 1)), Block((4, 5))) == pytest.approx(0.0, abs=1e-12)
    scan = min_block_scan(s)
    assert scan.block_size is None and not scan.found
    assert len(scan.profiles) == 3


def test_mi_matches_oracle(rng):
    psi = random_state_amplitudes(rng, 7)
    s = StateVector.from_amplitudes(psi)
    for a, b in [((0,), (3,)), ((0, 1), (4, 5)), ((6, 2), (1,))]:
        assert mutual_information(s, Block(a), Block(b)) == pytest.approx(mutual_info(psi, a, b), abs=1e-11)


def test_heisenberg_profile(heis12):
    prof = mi_profile(heis12.state, 1)
    np.testing.assert_allclose(prof.values, ov.HEIS12_MI1, atol=1e-9)
    assert all(np.diff(prof.values) < 0)


def test_dimer_scan(dimer16):
    scan = min_block_scan(dimer16)
    assert scan.block_size == 2
    row1, row2 = scan.profiles[0], scan.profiles[1]
    assert max(row1.values[1:]) <= 1e-2
    np.testing.assert_allclose(row2.values, ov.DIMER16_MI2, atol=1e-10)
    assert row2.distances == tuple(range(2, 9))
    assert scan.long_distance == 8


def test_entropy_of_dimer_block(dimer16):
    rho = partial_trace(dimer16, Block((0, 1)))
    assert von_neumann_entropy(rho) == pytest.approx(ov.DIMER16_ENTROPY, abs=1e-10)


def test_profile_validation(ghz12):
    assert default_distances(12, 2) == tuple(range(2, 7))
    with pytest.raises(InvalidInputError):
        mi_profile(ghz12, 2, distances=[1])
    with pytest.raises(InvalidInputError):
        mi_profile(ghz12, 5)
    with pytest.raises(InvalidInputError):
        min_block_scan(ghz12, max_block=5)
    with pytest.raises(InvalidInputError):
        mi_profile(ghz12, 1, distances=[])


def test_p_matrix_examples(ghz12, heis12):
    pm = p_matrix(*_rdms(ghz12, Block((0,)), Block((6,))))
    np.testing.assert_allclose(pm.row_sums(), 1, atol=1e-10)
    np.testing.assert_allclose(pm.column_sums(), 1, atol=1e-10)
    pm = p_matrix(*_rdms(heis12.state, Block((0,)), Block((3,))))
    assert pm.is_doubly_stochastic() and not pm.is_permutation()
    assert mutual_information_from_p(pm) == pytest.approx(ov.HEIS12_MI1[2], abs=1e-10)
    # blocks {0} and {2}, each entangled only with its own partner: rho_02 = rho_0 (x) rho_2
    pair_a = np.array([0.9, 0.1, 0.3, 0.2])
    pair_b = np.array([0.2, 0.7, 0.1, 0.5])
    psi = np.kron(pair_b / np.linalg.norm(pair_b), pair_a / np.linalg.norm(pair_a))
    pm = p_matrix(*_rdms(StateVector.from_amplitudes(psi), Block((0,)), Block((2,))))
    assert pm.is_permutation()
    with pytest.raises(InvalidInputError):
        p_matrix(np.eye(2) / 2, np.eye(2) / 2, np.eye(8) / 8)


@given(st.integers(3, 7), st.integers(0, 2**31 - 1), st.booleans())
def test_property_mi_invariants(n, seed, product):
    rng = np.random.default_rng(seed)
    if product:
        psi = np.ones(1)
        for _ in range(n):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            psi = np.kron(v / np.linalg.norm(v), psi)
    else:
        psi = random_state_amplitudes(rng, n)
    s = StateVector.from_amplitudes(psi)
    a, b = Block((0,)), Block(tuple(range(2, n)))
    ra, rb, rj = _rdms(s, a, b)
    mi = mutual_information(s, a, b)
    assert mi >= -1e-10
    assert abs(mi - mutual_information(s, b, a)) <= 1e-12
    pm = p_matrix(ra, rb, rj)
    assert pm.is_doubly_stochastic(1e-10)
    assert abs(mutual_information_from_p(pm) - mi) <= 1e-9
    factorizes = np.linalg.norm(rj.matrix - np.kron(ra.matrix, rb.matrix)) < 1e-10
    assert factorizes == (mi < 1e-8)
    if product:
        assert abs(mi) <= 1e-10
        assert abs(mutual_information_from_rdms(ra, rb, rj)) <= 1e-10
