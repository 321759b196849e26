"""
Tests for the exact-diagonalization oracle
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import EPS, HERMITIAN_BOUNDARY, MASSIVE_ETA
from errors import ConfigError, NonHermitianRegime, VerificationFailure
from lattice_operators import BoundaryParams, ChainConfig, hamiltonian, total_sz, transfer_matrix
from oracle import (build_spectrum_table, completeness_audit, fit_q_polynomial, ground_branch,
                    match_branch, seed_roots_from_oracle)
from spectrum import bethe_solve_all, check_constraint, tune_tau_plus


def random_boundary(rng):
    draw = lambda: complex(rng.normal(scale=0.4), rng.normal(scale=0.4))
    return BoundaryParams(draw(), 0.5 + draw(), draw(), draw(), 0.5 + draw(), draw())


@pytest.mark.parametrize('N', [3, 4, 5])
def test_table_commutes_for_random_boundaries(eta, rng, N):
    table = build_spectrum_table(ChainConfig.generic(N, eta), random_boundary(rng))
    assert table.branches == 2 ** N
    assert table.diagnostics['commutator'] < 1e-10
    assert table.diagnostics['biorthogonality'] < 1e-8


def test_branch_values_are_transfer_eigenvalues(sector):
    table = sector(3, 1).table
    lam = -0.28 + 0.19j
    T = transfer_matrix(table.config, table.boundary, lam)
    values = table.eigenvalues_at(lam)
    for k in range(table.branches):
        v = table.right[:, k]
        assert np.linalg.norm(T @ v - values[k] * v) < 1e-9 * np.linalg.norm(T)
    assert_allclose(values[2], table.eigenvalue(2, lam), rtol=1e-12)
    assert_allclose(table.eigenvalues[:, 0], table.eigenvalues_at(table.lambda_samples[0]), rtol=1e-10)


def test_table_rejects_repeated_samples(eta, boundary):
    with pytest.raises(ConfigError):
        build_spectrum_table(ChainConfig.generic(3, eta), boundary, lambda_samples=(0.1, 0.2, 0.1))


def test_match_branch_reports_missing_branch(sector):
    table = sector(3, 1).table
    with pytest.raises(VerificationFailure) as info:
        match_branch(table, lambda lam: 1e3 + lam, tol=1e-7)
    assert info.value.exit_code == 2
    branch, deviation = match_branch(table, table.tau(5))
    assert branch == 5 and deviation < 1e-12


def test_completeness_of_sector_and_companion(sector, eps):
    data = sector(3, 1)
    report = completeness_audit(data.chain, data.boundary, eps, 1, data.table)
    assert report.total == 8
    assert report.complete, report.to_dict()


def test_inhomogeneous_fit_for_unconstrained_boundary(eta, boundary, eps):
    chain = ChainConfig.generic(3, eta)
    table = build_spectrum_table(chain, boundary.with_tau_p(0.37 - 0.12j))
    for k in (0, table.branches - 1):
        fit = fit_q_polynomial(chain, table.boundary, eps, table.tau(k), chain.N, inhomogeneous=True)
        assert fit.residual < 1e-6


def test_ground_state_of_hermitian_chain():
    eta = -0.9j
    real_boundary = BoundaryParams(0.7j, 0.4, 0, -0.4j, 0.25, 0)
    chain = ChainConfig.homogeneous(3, eta)
    state = ground_branch(chain, real_boundary)
    assert state.hermitian
    H = hamiltonian(chain, real_boundary)
    assert state.energy == pytest.approx(np.linalg.eigvalsh(H)[0])
    assert np.linalg.norm(H @ state.vector - state.energy * state.vector) < 1e-10


def test_ground_state_refuses_non_hermitian_chain(sector):
    data = sector(3, 1)
    chain = ChainConfig.homogeneous(3, data.chain.eta)
    with pytest.raises(NonHermitianRegime):
        ground_branch(chain, data.boundary)
    state = ground_branch(chain, data.boundary, allow_non_hermitian=True)
    assert not state.hermitian
    assert state.energy == pytest.approx(np.linalg.eigvals(hamiltonian(chain, data.boundary)).real.min())
    assert state.extrapolation_increment < 1e-5
    assert state.sector is None


def test_zero_field_gapped_ground_state_has_no_magnetization():
    eta = 0.9
    no_field = BoundaryParams(0.5j * np.pi, 0, 0, 0.5j * np.pi, 0, 0)
    chain = ChainConfig.homogeneous(4, eta)
    state = ground_branch(chain, no_field)
    assert state.hermitian
    magnetization = state.vector.conj() @ total_sz(4) @ state.vector
    assert abs(magnetization) < 1e-10
    H = hamiltonian(chain, no_field)
    assert state.energy == pytest.approx(np.linalg.eigvalsh(H)[0])


def test_ground_state_reports_its_sector():
    N, M = 4, 2
    boundary = tune_tau_plus(HERMITIAN_BOUNDARY, EPS, N, M, MASSIVE_ETA)
    chain = ChainConfig.homogeneous(N, MASSIVE_ETA)
    table = build_spectrum_table(chain, boundary)
    solutions = []
    for degree, signs in ((M, EPS), (N - 1 - M, EPS.negated())):
        assert check_constraint(boundary, signs, N, degree, MASSIVE_ETA).holds
        seeds = [q.roots for _, q in seed_roots_from_oracle(chain, boundary, signs, degree, table)]
        solutions += bethe_solve_all(chain, boundary, signs, degree, seeds=seeds)

    state = ground_branch(chain, boundary, solutions=solutions)
    assert state.hermitian
    assert state.sector in (M, N - 1 - M)
    assert state.solution.M == state.sector
    assert state.match_deviation < 1e-7
    assert state.to_dict()['sector'] == state.sector

    unmatched = ground_branch(chain, boundary, solutions=[s for s in solutions if s is not state.solution])
    assert unmatched.sector is None
