"""
Tests for R and K matrices, monodromies, the transfer matrix and the Hamiltonian
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ConfigError, SingularBoundary
from lattice_operators import (PERMUTATION, BoundaryParams, ChainConfig, boundary_monodromy,
                               hamiltonian, homogeneous_transfer_hamiltonian, k_matrix, k_minus,
                               r_matrix, total_sz, transfer_matrix, traceless)
from spectrum import derive_phi_psi

I2 = np.eye(2)


def test_r_matrix_regularity_and_unitarity(eta):
    assert_allclose(r_matrix(0, eta), np.sinh(eta) * PERMUTATION, atol=1e-15)
    lam = 0.37 - 0.21j
    expected = (np.sinh(eta) ** 2 - np.sinh(lam) ** 2) * np.eye(4)
    assert_allclose(r_matrix(lam, eta) @ r_matrix(-lam, eta), expected, atol=1e-13)


def test_yang_baxter_equation(eta):
    lam, mu = 0.31 + 0.12j, -0.18 + 0.27j
    P23 = np.kron(I2, PERMUTATION)

    def r12(x):
        return np.kron(r_matrix(x, eta), I2)

    def r23(x):
        return np.kron(I2, r_matrix(x, eta))

    def r13(x):
        return P23 @ r12(x) @ P23

    left = r12(lam - mu) @ r13(lam) @ r23(mu)
    right = r23(mu) @ r13(lam) @ r12(lam - mu)
    assert_allclose(left, right, atol=1e-12)


def test_reflection_equation(eta):
    lam, mu = 0.29 + 0.14j, -0.41 + 0.06j
    params = (0.41 + 0.17j, 0.63 - 0.11j, 0.22 + 0.09j)
    K1 = np.kron(k_matrix(lam, eta, *params), I2)
    K2 = np.kron(I2, k_matrix(mu, eta, *params))
    R_diff, R_sum = r_matrix(lam - mu, eta), r_matrix(lam + mu - eta, eta)
    left = R_diff @ K1 @ R_sum @ K2
    right = K2 @ R_sum @ K1 @ R_diff
    assert_allclose(left, right, atol=1e-12)


def test_k_matrix_normalization_and_singular_boundary(eta):
    assert_allclose(k_matrix(eta / 2, eta, 0.4 + 0.1j, 0.7, 0.3j), np.eye(2), atol=1e-15)
    with pytest.raises(SingularBoundary):
        k_matrix(0.2, eta, 0, 0.7, 0.3)


def test_boundary_monodromy_factorizations_agree(eta, boundary):
    chain = ChainConfig.generic(3, eta)
    lam = 0.23 + 0.17j
    reflected = boundary_monodromy(chain, boundary, lam, 'reflected')
    bulk = boundary_monodromy(chain, boundary, lam, 'bulk')
    for a in range(2):
        for b in range(2):
            assert_allclose(reflected[a][b], bulk[a][b], atol=1e-12)


def test_one_site_monodromy_is_reflection_sandwich(eta, boundary):
    chain = ChainConfig(1, eta, (0.13 + 0.071j,))
    lam = 0.4 - 0.2j
    u = r_matrix(lam - chain.xi[0] - eta / 2, eta)
    u_hat = r_matrix(lam + chain.xi[0] - eta / 2, eta)
    full = u @ np.kron(k_minus(lam, eta, boundary), I2) @ u_hat
    blocks = boundary_monodromy(chain, boundary, lam)
    for a in range(2):
        for b in range(2):
            assert_allclose(blocks[a][b], full.reshape(2, 2, 2, 2)[a, :, b, :], atol=1e-13)


@pytest.mark.parametrize('N', [3, 4])
def test_transfer_matrices_commute(eta, boundary, N):
    chain = ChainConfig.generic(N, eta)
    T1 = transfer_matrix(chain, boundary, 0.21 + 0.13j)
    T2 = transfer_matrix(chain, boundary, -0.34 + 0.08j)
    commutator = np.linalg.norm(T1 @ T2 - T2 @ T1) / (np.linalg.norm(T1) * np.linalg.norm(T2))
    assert commutator < 1e-10


def test_hamiltonian_from_transfer_matrix(eta, boundary):
    H = hamiltonian(ChainConfig.homogeneous(3, eta), boundary)
    Ht, increment = homogeneous_transfer_hamiltonian(3, eta, boundary)
    deviation = np.linalg.norm(traceless(Ht) - traceless(H)) / np.linalg.norm(traceless(H))
    assert deviation < 1e-6
    assert increment < 1e-6

    coarse, _ = homogeneous_transfer_hamiltonian(3, eta, boundary, deltas=(4e-2, 2e-2, 1e-2))
    coarse_deviation = np.linalg.norm(traceless(coarse) - traceless(H)) / np.linalg.norm(traceless(H))
    assert coarse_deviation > deviation


def test_diagonal_boundaries_conserve_magnetization(eta):
    diagonal = BoundaryParams(0.41 + 0.17j, 0, 0, -0.27 + 0.35j, 0, 0)
    assert diagonal.is_diagonal
    H = hamiltonian(ChainConfig.homogeneous(4, eta), diagonal)
    Sz = total_sz(4)
    assert_allclose(H @ Sz - Sz @ H, 0, atol=1e-13)


def test_hamiltonian_is_hermitian_for_real_fields():
    # imaginary ς with real κ and τ = 0 gives real fields when |Δ| < 1
    eta = -0.9j
    real_boundary = BoundaryParams(0.7j, 0.4, 0, -0.4j, 0.25, 0)
    fields = real_boundary.fields(eta)
    assert_allclose(np.imag(fields['+']), 0, atol=1e-14)
    H = hamiltonian(ChainConfig.homogeneous(3, eta), real_boundary)
    assert_allclose(H, H.conj().T, atol=1e-13)


def test_fields_agree_in_both_parametrizations(eta, boundary):
    direct = boundary.fields(eta)
    via_phi_psi = boundary.fields_from_phi_psi(eta)
    for side in ('+', '-'):
        assert_allclose(via_phi_psi[side], direct[side], rtol=1e-12)


def test_from_phi_psi_inverts_derived_parameters():
    plus, minus = (0.48 - 0.21j, 0.33 + 0.12j, 0.1j), (0.55 + 0.3j, 0.2 - 0.15j, -0.07)
    params = BoundaryParams.from_phi_psi(plus, minus)
    assert_allclose(derive_phi_psi(params.varsigma_p, params.kappa_p), plus[:2], atol=1e-12)
    assert_allclose(derive_phi_psi(params.varsigma_m, params.kappa_m), minus[:2], atol=1e-12)
    assert params.tau_m == pytest.approx(-0.07)


def test_chain_config_validation(eta):
    with pytest.raises(ConfigError):
        ChainConfig(2, eta, (0.1, 0.1))
    with pytest.raises(ConfigError):
        ChainConfig(3, eta, (0.1, 0.2))
    chain = ChainConfig.generic(12, eta)
    assert max(abs(x.imag) for x in chain.xi) < np.pi / 4
    assert chain.xi_shift(2, 1) == pytest.approx(chain.xi[1] - eta / 2)
