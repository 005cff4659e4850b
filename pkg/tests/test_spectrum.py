import numpy as np
import pytest

from conftest import generic_spec
from inhomtq.algebra import poly_eval, poly_magnitude, x_to_u
from inhomtq.lattice import BoundaryParams, ChainSpec, apply_transfer, hamiltonian, transfer_matrix
from inhomtq.spectrum import (
    LambdaReconstructionError,
    diagonalize_h,
    lambda_for_state,
    lambda_functions,
    lambda_u_fit,
    sample_nodes,
)
from inhomtq.tq import check_nodes, q_from_roots, tq_residual
from reference import TABLE1, TABLE2


def test_table_energies(table1_eigen, table2_spec):
    np.testing.assert_allclose(table1_eigen.energies, [e for e, _ in TABLE1], atol=5e-4)
    np.testing.assert_allclose(diagonalize_h(table2_spec).energies, [e for e, _ in TABLE2], atol=5e-4)


def test_eigensystem_contract(rng):
    spec = generic_spec(rng, 5)
    es = diagonalize_h(spec)
    h = hamiltonian(spec).real
    assert abs(np.sum(es.energies)) < 1e-9
    assert np.all(np.diff(es.energies) >= 0)
    assert np.max(np.abs(h @ es.vectors - es.vectors * es.energies)) <= 1e-10 * es.h_norm
    np.testing.assert_allclose(es.vectors.T @ es.vectors, np.eye(spec.dim), atol=1e-12)


def test_lambda_shape(rng):
    spec = generic_spec(rng, 4)
    es = diagonalize_h(spec)
    for lf in lambda_functions(spec, es):
        assert lf.lam.degree == 2 * spec.n_sites + 2
        assert abs(lf.lam.leading - 2) < 1e-6
        u = rng.normal(size=10) + 1j * rng.normal(size=10)
        a, b = poly_eval(lf.lam, u), poly_eval(lf.lam, -u - 1)
        assert np.max(np.abs(a - b) / poly_magnitude(lf.lam, u)) < 1e-8


def test_lambda_matches_rayleigh_quotient(rng):
    spec = generic_spec(rng, 4)
    es = diagonalize_h(spec)
    lams = lambda_functions(spec, es)
    for u in rng.uniform(0.1, 3.0, 5):
        vals = np.sum(es.vectors * apply_transfer(u, spec, es.vectors).real, axis=0)
        fitted = np.array([poly_eval(lf.lam, u) for lf in lams])
        np.testing.assert_allclose(fitted, vals, rtol=1e-8)


def test_lambda_sum_is_trace(rng):
    spec = generic_spec(rng, 3)
    lams = lambda_functions(spec, diagonalize_h(spec))
    for u in (0.31, 1.7 - 0.4j, -2.2):
        total = sum(poly_eval(lf.lam, u) for lf in lams)
        trace = np.trace(transfer_matrix(u, spec))
        assert abs(total - trace) <= 1e-8 * abs(trace)


def test_lambda_independent_of_nodes(rng, monkeypatch):
    import inhomtq.spectrum as spectrum

    spec = generic_spec(rng, 3)
    es = diagonalize_h(spec)
    base = lambda_functions(spec, es)
    monkeypatch.setattr(spectrum, "sample_nodes", lambda n: sample_nodes(n, radius=2.5))
    moved = lambda_functions(spec, es)
    for a, b in zip(base, moved):
        np.testing.assert_allclose(a.xlam.xcoeffs, b.xlam.xcoeffs, rtol=1e-9, atol=1e-9 * np.max(np.abs(a.xlam.xcoeffs)))


def test_u_basis_cross_check(table1_spec, table1_eigen):
    for k in (0, 4, 7):
        lf = lambda_for_state(table1_spec, table1_eigen, k)
        direct, res = lambda_u_fit(table1_spec, table1_eigen, k)
        assert res < 1e-8
        np.testing.assert_allclose(direct.coeffs, lf.lam.coeffs, rtol=1e-6, atol=1e-6 * lf.lam.norm())


def test_ground_state_solves_with_table_roots(table1_spec, table1_eigen):
    lf = lambda_for_state(table1_spec, table1_eigen, 0)
    q = x_to_u(q_from_roots(TABLE1[0][1]))
    # six printed digits bound how small this can get
    assert tq_residual(lf.lam, q, table1_spec, check_nodes(3)) < 1e-5


def test_degenerate_levels_resolved():
    # xi = 0 keeps S^z conserved and p = -q makes the boundary fields cancel,
    # so H has degenerate levels that t(u) still separates
    spec = ChainSpec(3, BoundaryParams(0.8, -0.8, 0.0))
    es = diagonalize_h(spec)
    assert any(len(es.cluster_of(k)) > 1 for k in range(spec.dim))
    lams = lambda_functions(spec, es)
    assert not any(isinstance(lf, LambdaReconstructionError) for lf in lams)
    flagged = [lf for lf in lams if lf.degenerate]
    assert flagged
    # Rayleigh quotients are polynomial for any vector, so check eigenvectors directly
    from inhomtq.spectrum import _state_vectors

    vecs, _ = _state_vectors(spec, es, range(spec.dim))
    for u in (0.9, -1.7 + 0.3j):
        tv = apply_transfer(u, spec, vecs)
        lam_u = np.array([poly_eval(lf.lam, u) for lf in lams])
        assert np.max(np.abs(tv - vecs * lam_u)) < 1e-9 * np.max(np.abs(lam_u))


def test_reconstruction_failure_reported(table1_spec, table1_eigen):
    (res,) = lambda_functions(table1_spec, table1_eigen, [2], tol=0.0)
    assert isinstance(res, LambdaReconstructionError) and res.state_index == 2
    with pytest.raises(LambdaReconstructionError):
        lambda_for_state(table1_spec, table1_eigen, 2, tol=0.0)
