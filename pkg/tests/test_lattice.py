import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import generic_spec
from inhomtq.algebra import poly_fit
from inhomtq.lattice import (
    PERMUTATION,
    BoundaryParams,
    ChainSpec,
    apply_transfer,
    hamiltonian,
    k_minus,
    k_plus,
    r_matrix,
    transfer_matrix,
)

SQRT3 = np.sqrt(3.0)
I2 = np.eye(2)


def rel_comm(a, b):
    return np.max(np.abs(a @ b - b @ a)) / (np.linalg.norm(a, 2) * np.linalg.norm(b, 2))


def test_r_matrix_examples():
    np.testing.assert_array_equal(r_matrix(0), PERMUTATION)
    expected = np.array([[3, 0, 0, 0], [0, 2, 1, 0], [0, 1, 2, 0], [0, 0, 0, 3]])
    np.testing.assert_array_equal(r_matrix(2), expected)
    np.testing.assert_allclose(r_matrix(0.7) @ r_matrix(-0.7), 0.51 * np.eye(4), atol=1e-15)


def test_k_minus_examples():
    prm = BoundaryParams(0.25, 0.5, -SQRT3)
    np.testing.assert_array_equal(k_minus(0, prm), 0.25 * I2)
    np.testing.assert_array_equal(k_minus(1, prm), np.diag([1.25, -0.75]))
    assert k_minus(-0.25, prm)[0, 0] == 0


def test_k_plus_examples():
    prm = BoundaryParams(0.25, 0.5, -SQRT3)
    np.testing.assert_array_equal(k_plus(-1, prm), 0.5 * I2)
    np.testing.assert_allclose(k_plus(0, prm), [[1.5, -SQRT3], [-SQRT3, -0.5]])
    for u in (0.3, -2.1 + 0.4j):
        k = k_plus(u, prm)
        np.testing.assert_array_equal(k, k.T)


def test_params_validation():
    assert BoundaryParams(1, 1, 0).alpha == 1
    assert BoundaryParams(1, 1, -SQRT3).alpha == pytest.approx(2)
    assert BoundaryParams.from_xi_squared(0.25, 0.5, 3.0, -1).alpha == 2.0
    with pytest.raises(ValueError):
        BoundaryParams(0, 1, 1)
    with pytest.raises(ValueError):
        BoundaryParams(1, 0, 1)
    with pytest.raises(ValueError):
        ChainSpec(11, BoundaryParams(1, 1, 1))
    with pytest.raises(ValueError):
        ChainSpec(3, BoundaryParams(1, 1, 1), sign="x")


@settings(max_examples=5, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_yang_baxter(u, v):
    p12 = np.kron(PERMUTATION, I2)
    p23 = np.kron(I2, PERMUTATION)
    p13 = p12 @ p23 @ p12
    eye = np.eye(8)

    def r(w, perm):
        return w * eye + perm

    lhs = r(u - v, p12) @ r(u, p13) @ r(v, p23)
    rhs = r(v, p23) @ r(u, p13) @ r(u - v, p12)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, abs(u) + abs(v)) ** 3


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_r_unitarity(u):
    np.testing.assert_allclose(r_matrix(u) @ r_matrix(-u), (1 - u * u) * np.eye(4), atol=1e-12 * max(1, abs(u) ** 2))


def test_apply_transfer_matches_dense(rng):
    spec = generic_spec(rng, 3)
    t = transfer_matrix(0.3 + 0.1j, spec)
    v = rng.normal(size=(8, 2))
    np.testing.assert_allclose(apply_transfer(0.3 + 0.1j, spec, v), t @ v, atol=1e-12)
    np.testing.assert_allclose(apply_transfer(0.3 + 0.1j, spec, v[:, 0]), t @ v[:, 0], atol=1e-12)


def test_transfer_single_site_by_hand():
    # N = 1: both monodromies are a single R
    prm = BoundaryParams(0.7, -1.3, 0.4)
    spec = ChainSpec(1, prm)
    u = 0.37
    # aux space is the left tensor factor: tr_0 K+ R K- R
    kp, km = k_plus(u, prm), k_minus(u, prm)
    full = np.kron(kp, I2) @ r_matrix(u) @ np.kron(km, I2) @ r_matrix(u)
    dense = full.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    np.testing.assert_allclose(transfer_matrix(u, spec), dense, atol=1e-13)


def test_hamiltonian_symmetric_traceless(rng):
    for n in (2, 3, 5):
        h = hamiltonian(generic_spec(rng, n))
        np.testing.assert_array_equal(h, h.T)
        assert np.all(h.imag == 0)
        assert abs(np.trace(h)) < 1e-12


def test_hamiltonian_needs_two_sites():
    with pytest.raises(ValueError):
        hamiltonian(ChainSpec(1, BoundaryParams(1, 1, 1)))


def test_hamiltonian_spectrum_extremes(table1_spec, table2_spec):
    assert abs(np.linalg.eigvalsh(hamiltonian(table1_spec).real)[0] - (-10.4854)) < 5e-4
    assert abs(np.linalg.eigvalsh(hamiltonian(table2_spec).real)[-1] - 10.8455) < 5e-4


def test_commutativity_n4(rng):
    spec = generic_spec(rng, 4)
    assert rel_comm(transfer_matrix(0.7, spec), transfer_matrix(-0.3, spec)) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_commuting_family(rng, n):
    spec = generic_spec(rng, n)
    h = hamiltonian(spec)
    for _ in range(2):
        u, v = rng.normal(size=2) + 1j * rng.normal(size=2)
        tu, tv = transfer_matrix(u, spec), transfer_matrix(v, spec)
        assert rel_comm(tu, tv) < 1e-9
        assert rel_comm(h, tu) < 1e-9


def test_entries_polynomial(rng):
    n = 3
    spec = generic_spec(rng, n)
    nodes = 0.2 + 0.4 * np.arange(2 * n + 4)
    samples = np.array([transfer_matrix(u, spec) for u in nodes])
    for i, j in [(0, 0), (1, 2), (5, 3), (7, 7)]:
        _, res = poly_fit(nodes, samples[:, i, j], 2 * n + 2)
        assert res < 1e-9
