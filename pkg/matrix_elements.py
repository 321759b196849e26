"""
Finite-chain matrix elements of conserving gauged words in Bethe eigenstates.

``matel_finite`` evaluates the multiple-sum formula; ``matel_oracle`` and
``matel_via_action`` give the same quantity from exact diagonalization, the
second one routed through the action on boundary Bethe states.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import ConstraintViolated, NonConservingWord, PoleHit, SingularN
from gauge import GaugePair, boundary_bethe_state, separate_state_gauge
from lattice_operators import BoundaryParams, ChainConfig
from local_ops import OperatorWord, act_on_state, build_e_word, check_basis
from oracle import SpectrumTable, match_branch
from spectrum import (BetheSolution, EpsilonChoice, QPolynomial, check_constraint, eigenvalue_from_q,
                      log_A_eps_derivative)

logger = logging.getLogger(__name__)

SINGULAR_N_COND = 1e12


@dataclass
class KernelBundle:
    t: Callable[[complex], complex]
    K: Callable[[complex], complex]
    xi_prime: Callable[[complex], complex]
    N: int

    def n_diagonal(self, mu: complex) -> complex:
        """2N Ξ′(μ)"""
        return 2 * self.N * self.xi_prime(mu)


def kernels(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
            q: QPolynomial) -> KernelBundle:
    eta, N = config.eta, config.N

    # sinh-ratio forms, regular at the Gaudin diagonal K(0)
    def t(lam):
        return np.sinh(eta) / (np.sinh(lam - eta / 2) * np.sinh(lam + eta / 2))

    def K(lam):
        return 1j * np.sinh(2 * eta) / (2 * np.pi * np.sinh(lam + eta) * np.sinh(lam - eta))

    def xi_prime(mu):
        for shift in (eta, -eta):
            if abs(q(mu + shift)) < Config.POLE_TOL:
                raise PoleHit(f"Q(μ{'+' if shift == eta else '-'}η) vanishes at μ = {mu}")
        derivative = (-log_A_eps_derivative(config, boundary, eps, -mu)
                      + q.log_derivative(mu + eta)
                      - log_A_eps_derivative(config, boundary, eps, mu)
                      - q.log_derivative(mu - eta))
        return 1j / (2 * N) * derivative

    return KernelBundle(t=t, K=K, xi_prime=xi_prime, N=N)


@dataclass
class OmegaAssembly:
    n_matrix: np.ndarray
    m_matrix: np.ndarray
    omega: np.ndarray
    condition: float

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.omega)) if self.omega.size else 1.0 + 0j


def gaudin_matrix(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                  q: QPolynomial, bundle: Optional[KernelBundle] = None) -> np.ndarray:
    """𝒩 for the roots of q"""
    bundle = bundle or kernels(config, boundary, eps, q)
    lam = q.roots
    M = len(lam)
    n_matrix = np.zeros((M, M), dtype=complex)
    for j in range(M):
        for k in range(M):
            n_matrix[j, k] = 2 * np.pi * (bundle.K(lam[j] - lam[k]) - bundle.K(lam[j] + lam[k]))
        n_matrix[j, j] += bundle.n_diagonal(lam[j])
    return n_matrix


def assemble_omega(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                   q: QPolynomial, b_set: Sequence[int], m: int,
                   cache: Optional[Dict[str, Any]] = None) -> OmegaAssembly:
    """Ω for one index tuple: unit rows for ξ-labels, 𝒩⁻¹ℳ rows for root labels"""
    M = q.M
    if cache is None:
        cache = precompute_omega(config, boundary, eps, q, m)
    omega = np.zeros((len(b_set), m), dtype=complex)
    for l, b in enumerate(b_set):
        if b > M:
            omega[l, M + m - b] = -1
        else:
            omega[l] = cache['solved'][b - 1]
    return OmegaAssembly(n_matrix=cache['n_matrix'], m_matrix=cache['m_matrix'],
                         omega=omega, condition=cache['condition'])


def precompute_omega(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                     q: QPolynomial, m: int) -> Dict[str, Any]:
    M = q.M
    bundle = kernels(config, boundary, eps, q)
    if M == 0:
        empty = np.zeros((0, m), dtype=complex)
        return {'n_matrix': np.zeros((0, 0), dtype=complex), 'm_matrix': empty,
                'solved': empty, 'condition': 1.0}
    n_matrix = gaudin_matrix(config, boundary, eps, q, bundle)
    condition = float(np.linalg.cond(n_matrix))
    if condition > SINGULAR_N_COND:
        raise SingularN(f"Gaudin-type matrix is ill-conditioned (cond {condition:.2e})",
                        {'condition': condition})
    m_matrix = np.array([[1j * (bundle.t(config.xi[k] - lam) - bundle.t(config.xi[k] + lam))
                          for k in range(m)] for lam in q.roots], dtype=complex).reshape(M, m)
    solved = np.linalg.solve(n_matrix, m_matrix)
    return {'n_matrix': n_matrix, 'm_matrix': m_matrix, 'solved': solved, 'condition': condition}


def boundary_weight(boundary: BoundaryParams, eps: EpsilonChoice, lam, eta: complex):
    """sinh(λ+η/2−ε_{φ−}φ₋) cosh(λ+η/2+ε_{ψ−}ψ₋), the reflected '−' factor of 𝐚_ε"""
    phi, psi = boundary.phi_psi('-')
    return np.sinh(lam + eta / 2 - eps.e_phi_m * phi) * np.cosh(lam + eta / 2 + eps.e_psi_m * psi)


def vandermonde_prefactor(xi: Sequence[complex]) -> complex:
    """∏_{l<k} sinh(ξ_k−ξ_l) ∏_{l≤k} sinh(ξ_k+ξ_l)"""
    out = 1.0 + 0j
    for k in range(len(xi)):
        for l in range(k + 1):
            if l < k:
                out *= np.sinh(xi[k] - xi[l])
            out *= np.sinh(xi[k] + xi[l])
    return complex(out)


def word_integrand_weight(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                          word: OperatorWord, beta: complex, lams: Sequence[complex]) -> complex:
    """
    Common weight of the finite sums and of the thermodynamic integrand for the
    ordered spectral values λ_1..λ_m (already signed)
    """
    eta, m = config.eta, word.m
    sinh = np.sinh
    xi = config.xi[:m]
    xi1 = [config.xi_shift(k, 1) for k in range(1, m + 1)]
    xi0 = [config.xi_shift(k, 0) for k in range(1, m + 1)]
    b_gauge, b_bar = word.b(beta), word.b_bar(beta)
    i_p, s = word.i_p, word.s

    t = 1.0 + 0j
    for lam in lams:
        for x in xi:
            t *= sinh(lam + x + eta / 2)
    for i, j in itertools.combinations(range(m), 2):
        t /= sinh(lams[i] - lams[j] - eta) * sinh(lams[i] + lams[j] + eta)
    for p in range(1, m + 1):
        ip, lam = i_p[p - 1], lams[p - 1]
        if p <= s:
            t *= sinh(lam - xi1[ip - 1] - eta * (1 + b_gauge[ip - 1]))
            for k in range(1, ip):
                t *= sinh(lam - xi1[k - 1])
            for k in range(ip + 1, m + 1):
                t *= sinh(lam - xi0[k - 1])
        else:
            t *= sinh(lam - xi1[ip - 1] + eta * (1 - b_bar[ip - 1]))
            for k in range(1, ip):
                t *= sinh(lam - xi1[k - 1])
            for k in range(ip + 1, m + 1):
                t *= sinh(lam - xi1[k - 1] + eta)
    for k in range(m):
        t *= boundary_weight(boundary, eps, xi1[k], eta) / boundary_weight(boundary, eps, lams[k], eta)
    return t


def _tuple_value(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                 word: OperatorWord, beta: complex, roots: Sequence[complex], b_tuple: Tuple[int, ...],
                 cache: Dict[str, Any], q: QPolynomial) -> complex:
    M, m = len(roots), word.m
    values = list(roots) + [config.xi_shift(m + 1 - j, 1) for j in range(1, m + 1)]
    det = assemble_omega(config, boundary, eps, q, b_tuple, m, cache).det
    if det == 0:
        return 0j
    free = [l for l, b in enumerate(b_tuple) if b <= M]
    total = 0j
    for signs in itertools.product((1, -1), repeat=len(free)):
        sigma = [1] * m
        for l, sgn in zip(free, signs):
            sigma[l] = sgn
        lams = [sigma[l] * values[b - 1] for l, b in enumerate(b_tuple)]
        weight = word_integrand_weight(config, boundary, eps, word, beta, lams)
        total += (-1) ** word.s * np.prod(sigma) * weight
    return total * det


def matel_finite(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                 bethe: BetheSolution, word: OperatorWord, gauge: Optional[GaugePair] = None,
                 threads: int = None) -> complex:
    """Multiple-sum formula for ⟨Q| word |Q⟩ / ⟨Q|Q⟩"""
    threads = Config.THREADS if threads is None else threads
    if not word.conserving:
        raise NonConservingWord(f"word {word.eps}/{word.eps_prime} changes the number of gauged B-operators "
                                f"(m̃ = {word.m_tilde()})")
    m = word.m
    if m == 0:
        return 1.0 + 0j
    eta, M = config.eta, bethe.M
    report = check_constraint(boundary, eps, config.N, M, eta)
    if not report.holds:
        raise ConstraintViolated(f"linear constraint fails for sector M={M}", report.to_dict())
    gauge = gauge or separate_state_gauge(boundary, eps, eta)
    beta = gauge.beta
    check_basis(word, beta, eta)

    q = bethe.q
    cache = precompute_omega(config, boundary, eps, q, m)
    ranges = [range(1, M + 1)] * word.s + [range(1, M + m + 1)] * (m - word.s)
    tuples = [b for b in itertools.product(*ranges) if len(set(b)) == len(b)]

    def evaluate(b_tuple):
        return _tuple_value(config, boundary, eps, word, beta, bethe.roots, b_tuple, cache, q)

    if threads > 1 and len(tuples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(evaluate, tuples))
    else:
        parts = [evaluate(b) for b in tuples]

    total = 0j
    for part in parts:
        total += part
    pre = 1.0 + 0j
    for b in word.b(beta):
        pre *= np.exp(eta) / np.sinh(eta * b)
    denominator = vandermonde_prefactor(config.xi[:m])
    if abs(denominator) < Config.POLE_TOL:
        raise PoleHit("coinciding inhomogeneities in the prefactor")
    logger.debug(f"matel_finite: {len(tuples)} index tuples, cond(N) = {cache['condition']:.2e}")
    return complex(pre * total / denominator)


def matel_oracle(table: SpectrumTable, word_matrix: np.ndarray,
                 tau: Optional[Callable[[complex], complex]] = None,
                 branch: Optional[int] = None) -> complex:
    """u W v / (u v) on the branch matched by τ (or given directly)"""
    if branch is None:
        if tau is None:
            raise ValueError("matel_oracle needs either tau or branch")
        branch, _ = match_branch(table, tau)
    u, v = table.left[branch], table.right[:, branch]
    return complex(u @ (word_matrix @ v) / (u @ v))


def bethe_tau(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
              bethe: BetheSolution) -> Callable[[complex], complex]:
    return lambda lam: eigenvalue_from_q(config, boundary, eps, bethe.q, lam)


def matel_via_action(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                     bethe: BetheSolution, word: OperatorWord, table: SpectrumTable,
                     gauge: Optional[GaugePair] = None) -> complex:
    """Σ_B F̄_B ⟨u|Q̄_B⟩ / ⟨u|Q⟩ with ⟨u| the oracle left eigenvector of the matched branch"""
    eta = config.eta
    gauge = gauge or separate_state_gauge(boundary, eps, eta)
    branch, _ = match_branch(table, bethe_tau(config, boundary, eps, bethe))
    u = table.left[branch]
    state = boundary_bethe_state(config, boundary, bethe.roots, gauge)
    norm = u @ state.vector
    if abs(norm) < 1e-14 * np.linalg.norm(state.vector):
        raise PoleHit("boundary Bethe state is orthogonal to the matched left eigenvector")
    total = 0j
    for term in act_on_state(config, boundary, eps, word, state):
        image = boundary_bethe_state(config, boundary, term.resulting_roots, term.gauge).vector
        total += term.coefficient * (u @ image)
    return complex(total / norm)


def dense_matel(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                bethe: BetheSolution, word: OperatorWord, table: SpectrumTable,
                gauge: Optional[GaugePair] = None) -> complex:
    """Oracle value of the gauged word in the eigenstate matched to the Bethe solution"""
    gauge = gauge or separate_state_gauge(boundary, eps, config.eta)
    return matel_oracle(table, build_e_word(config, word, gauge),
                        tau=bethe_tau(config, boundary, eps, bethe))
