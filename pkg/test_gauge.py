"""
Tests for the gauge layer: S-matrices, gauged operators, boundary Bethe states
and the boundary-bulk decomposition
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import BASE_BOUNDARY, ETA
from errors import GaugeConstraintViolated, SingularGauge
from gauge import (GaugePair, b_hat, b_hat_from_bulk, b_hat_x, boundary_bethe_state,
                   boundary_bulk_decompose, boundary_from_bulk, bulk_entry, choice_gamma_delta,
                   cond_bb_residual, gauged_boundary_monodromy, gauged_bulk_monodromy, materialize,
                   null_sum_bracket, s_inverse, s_matrix, separate_state_gauge)
from lattice_operators import ChainConfig, apply_transfer
from spectrum import eigenvalue_from_q, tune_tau_plus

OFF_SHELL_ROOTS = (0.23 + 0.11j, 0.47 - 0.09j)


def relative(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(np.asarray(b))


def test_s_matrix_inverse(eta):
    S = s_matrix(0.3 - 0.1j, 0.7 + 0.2j, 1.3 - 0.4j, eta)
    assert_allclose(s_inverse(0.3 - 0.1j, 0.7 + 0.2j, 1.3 - 0.4j, eta) @ S, np.eye(2), atol=1e-13)
    with pytest.raises(SingularGauge):
        s_inverse(0.3, 0.7, 0.0, eta)


def test_gauged_bulk_entries_follow_row_column_form(eta):
    chain = ChainConfig.generic(3, eta)
    lam = 0.27 - 0.12j
    left, right = GaugePair(0.4 + 0.3j, 1.1 - 0.2j), GaugePair(-0.6 + 0.1j, 0.8 + 0.5j)
    gauged = gauged_bulk_monodromy(chain, lam, left, right)
    assert relative(gauged['A'], bulk_entry(chain, lam, left.diff, right.total)) < 1e-11
    assert relative(gauged['B'], bulk_entry(chain, lam, left.diff, right.diff)) < 1e-11
    assert relative(gauged['C'], -bulk_entry(chain, lam, left.total, right.total)) < 1e-11
    assert relative(gauged['D'], -bulk_entry(chain, lam, left.total, right.diff)) < 1e-11


def test_b_hat_depends_on_gauge_difference_only(eta, boundary):
    chain = ChainConfig.generic(3, eta)
    lam = 0.31 + 0.07j
    gauge = GaugePair(0.9 - 0.3j, 1.4 + 0.2j)
    closed = b_hat_x(chain, boundary, lam, gauge.diff)
    assert relative(b_hat(chain, boundary, lam, gauge), closed) < 1e-11
    assert relative(b_hat(chain, boundary, lam, gauge.shifted(0.37, 0.37)), closed) < 1e-11


@pytest.mark.parametrize('eps_plus', [1, -1])
def test_b_hat_two_term_bulk_expression(eta, boundary, eps_plus):
    chain = ChainConfig.generic(3, eta)
    lam, x = 0.26 + 0.15j, 0.8 - 0.35j
    assert relative(b_hat_from_bulk(chain, boundary, lam, x, eps_plus),
                    b_hat_x(chain, boundary, lam, x)) < 1e-10


def test_gauged_boundary_monodromy_from_bulk(eta, boundary):
    chain = ChainConfig.generic(2, eta)
    lam = 0.22 - 0.18j
    gauge = GaugePair(0.6 + 0.2j, 1.2 - 0.3j)
    inner, inner_prime = GaugePair(0.3 + 0.1j, 0.7 - 0.2j), GaugePair(-0.4 + 0.2j, 0.55 + 0.3j)
    direct = gauged_boundary_monodromy(chain, boundary, lam, gauge)
    rebuilt = boundary_from_bulk(chain, boundary, lam, gauge, inner, inner_prime)
    for a in range(2):
        for b in range(2):
            assert relative(rebuilt[a][b], direct[a][b]) < 1e-9


def test_null_sum_bracket_vanishes_for_the_chosen_delta(eta, boundary):
    lam_a, lam_b = 0.29 + 0.13j, -0.17 + 0.36j
    for eps_plus in (1, -1):
        delta = choice_gamma_delta(boundary, eps_plus, eta).beta
        bracket, closed = null_sum_bracket(boundary, eps_plus, lam_a, lam_b, delta, eta)
        assert abs(closed) < 1e-12
        assert abs(bracket) < 1e-9
        generic, _ = null_sum_bracket(boundary, eps_plus, lam_a, lam_b, 0.41 - 0.27j, eta)
        assert abs(generic) > 1e-6


def test_separate_state_gauge_satisfies_boundary_bulk_condition(sector, eps):
    for N, M in ((3, 1), (4, 2)):
        data = sector(N, M)
        gauge = separate_state_gauge(data.boundary, eps, data.chain.eta)
        assert cond_bb_residual(data.boundary, gauge, N, M, eps.eps_plus, data.chain.eta) < 1e-10


@pytest.mark.parametrize('N,M', [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_boundary_bulk_decomposition(eps, N, M):
    chain = ChainConfig.generic(N, ETA)
    boundary = tune_tau_plus(BASE_BOUNDARY, eps, N, M, ETA)
    gauge = separate_state_gauge(boundary, eps, chain.eta)
    roots = OFF_SHELL_ROOTS[:M]
    state = boundary_bethe_state(chain, boundary, roots, gauge)
    decomposition = boundary_bulk_decompose(chain, boundary, roots, gauge, eps.eps_plus)
    assert len(decomposition.terms) == 2 ** M
    assert relative(materialize(chain, decomposition), state.vector) < 1e-11
    assert relative(materialize(chain, decomposition, threads=3), state.vector) < 1e-11


def test_decomposition_refuses_gauge_off_condition(sector, eps):
    data = sector(3, 1)
    with pytest.raises(GaugeConstraintViolated):
        boundary_bulk_decompose(data.chain, data.boundary, OFF_SHELL_ROOTS[:1],
                                GaugePair(0.3 + 0.2j, 0.9 - 0.1j), eps.eps_plus)


def test_boundary_bethe_state_is_transfer_eigenstate(sector, eps):
    data = sector(4, 2)
    chain, boundary = data.chain, data.boundary
    gauge = separate_state_gauge(boundary, eps, chain.eta)
    for solution in data.solutions:
        v = boundary_bethe_state(chain, boundary, solution.roots, gauge).vector
        assert np.linalg.norm(v) > 0
        for lam in (0.21 + 0.13j, 0.37 - 0.08j, -0.15 + 0.27j, 0.52 + 0.31j, 0.09 - 0.22j):
            tau = eigenvalue_from_q(chain, boundary, eps, solution.q, lam)
            image = apply_transfer(chain, boundary, lam, v)
            assert np.linalg.norm(image - tau * v) / np.linalg.norm(v) < 1e-8 * max(1.0, abs(tau))
