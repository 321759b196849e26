"""
Tests for the gauged local-operator basis and its action on boundary Bethe states
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import BASE_BOUNDARY, ETA
from errors import BasisDegenerate, ConfigError, GaugeConstraintViolated
from gauge import GaugePair, boundary_bethe_state, separate_state_gauge
from lattice_operators import ChainConfig
from local_ops import (OperatorWord, action_coefficient, act_on_state, apply_e_word, build_e_word,
                       check_basis, enumerate_b_sets, local_e_word, materialize_action, scale_by_prefactor)
from spectrum import tune_tau_plus

OFF_SHELL_ROOTS = (0.23 + 0.11j, 0.47 - 0.09j)

WORDS = {
    1: OperatorWord((2,), (2,)),
    2: OperatorWord((1, 2), (2, 1)),
}


def relative(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def tuned_state(eps, N, M):
    chain = ChainConfig.generic(N, ETA)
    boundary = tune_tau_plus(BASE_BOUNDARY, eps, N, M, ETA)
    gauge = separate_state_gauge(boundary, eps, ETA)
    return chain, boundary, boundary_bethe_state(chain, boundary, OFF_SHELL_ROOTS[:M], gauge)


def test_word_bookkeeping():
    word = OperatorWord((2, 1), (1, 2))
    assert word.m == 2
    assert word.i_p == (1, 1)
    assert (word.s, word.s_prime) == (1, 1)
    assert word.conserving
    assert word.b(0.4) == [0.4 - 1, 0.4]
    raising = OperatorWord((1,), (2,))
    assert raising.m_tilde() == 1 and not raising.conserving


@pytest.mark.parametrize('eps,eps_prime', [((1, 2), (1,)), ((1, 3), (2, 2))])
def test_malformed_words(eps, eps_prime):
    with pytest.raises(ConfigError):
        OperatorWord(eps, eps_prime)


def test_word_longer_than_chain():
    with pytest.raises(ConfigError):
        local_e_word(ChainConfig.generic(2, ETA), OperatorWord((1, 1, 1), (1, 1, 1)),
                     GaugePair(0.3, 0.7))


def test_enumerate_b_sets():
    assert enumerate_b_sets(OperatorWord((2,), (2,)), 2) == [(1,), (2,)]
    assert enumerate_b_sets(OperatorWord((1,), (1,)), 2) == [(1,), (2,), (3,)]
    assert enumerate_b_sets(OperatorWord((1,), (2,)), 1) == [()]
    mixed = enumerate_b_sets(OperatorWord((2, 1), (1, 2)), 1)
    assert all(len(set(b)) == len(b) == 2 for b in mixed)
    assert mixed == sorted(mixed)


def test_single_site_basis_spans_local_operators():
    chain = ChainConfig.generic(3, ETA)
    gauge = GaugePair(0.31 + 0.2j, 0.77 - 0.15j)
    stacked = [local_e_word(chain, OperatorWord((e,), (ep,)), gauge).ravel()
               for e in (1, 2) for ep in (1, 2)]
    assert np.linalg.matrix_rank(np.array(stacked), tol=1e-10) == 4


def test_degenerate_basis_is_rejected():
    with pytest.raises(BasisDegenerate):
        check_basis(OperatorWord((1,), (1,)), -1, ETA)


def test_apply_e_word_matches_dense_embedding(rng):
    chain = ChainConfig.generic(4, ETA)
    word, gauge = WORDS[2], GaugePair(0.21 - 0.3j, 1.13 + 0.4j)
    vec = rng.normal(size=16) + 1j * rng.normal(size=16)
    assert_allclose(apply_e_word(chain, word, gauge, vec), build_e_word(chain, word, gauge) @ vec, atol=1e-12)


@pytest.mark.parametrize('N,m,M', [(3, 1, 1), (4, 1, 2), (4, 2, 1), (5, 2, 2)])
def test_action_on_off_shell_state(eps, N, m, M):
    chain, boundary, state = tuned_state(eps, N, M)
    word = WORDS[m]
    terms = act_on_state(chain, boundary, eps, word, state)
    assert len(terms) == len(enumerate_b_sets(word, M))
    for term in terms:
        assert len(term.resulting_roots) == M
        assert term.gauge == state.gauge
    expected = apply_e_word(chain, word, state.gauge, state.vector)
    assert relative(materialize_action(chain, boundary, terms), expected) < 1e-9


def test_action_of_raising_word(eps):
    chain, boundary, state = tuned_state(eps, 3, 1)
    word = OperatorWord((1,), (2,))
    terms = act_on_state(chain, boundary, eps, word, state)
    assert all(len(t.resulting_roots) == 2 for t in terms)
    assert terms[0].gauge.beta == pytest.approx(state.gauge.beta + 2)
    expected = apply_e_word(chain, word, state.gauge, state.vector)
    assert relative(materialize_action(chain, boundary, terms, threads=2), expected) < 1e-9


def test_action_coefficient_matches_term(eps):
    chain, boundary, state = tuned_state(eps, 4, 2)
    word = WORDS[1]
    for term in act_on_state(chain, boundary, eps, word, state, threads=1):
        direct = action_coefficient(chain, boundary, eps, word, term.b_set, state.roots, state.gauge.beta)
        assert_allclose(direct, term.coefficient, rtol=1e-12)
        split = sum(action_coefficient(chain, boundary, eps, word, term.b_set, state.roots,
                                       state.gauge.beta, sigma=s) for s in term.sigma_terms)
        assert_allclose(split, term.coefficient, rtol=1e-10)


def test_action_requires_boundary_bulk_gauge(eps):
    chain, boundary, _ = tuned_state(eps, 3, 1)
    state = boundary_bethe_state(chain, boundary, OFF_SHELL_ROOTS[:1], GaugePair(0.3 + 0.2j, 0.9 - 0.1j))
    with pytest.raises(GaugeConstraintViolated):
        act_on_state(chain, boundary, eps, WORDS[1], state)


def test_long_chain_prefactor_in_log_magnitude():
    chain = ChainConfig.homogeneous(12, ETA)
    raising = OperatorWord((1,), (2,))
    beta, total = 0.43 - 0.27j, 2.5 + 1.1j
    assert_allclose(scale_by_prefactor(chain, raising, beta, total, log_path=True),
                    scale_by_prefactor(chain, raising, beta, total, log_path=False), rtol=1e-12)
    assert scale_by_prefactor(chain, raising, beta, 0) == 0

    huge = 2100.0
    value = scale_by_prefactor(chain, raising, huge, 1e-300)
    assert np.isfinite(value)
    assert_allclose(value, -2 * np.exp(ETA) * 1e-300, rtol=1e-9)
