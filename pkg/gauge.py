"""
Vertex-IRF gauge layer: S-matrices, gauged bulk and boundary operators,
reference states, boundary Bethe states and their decomposition into gauged
bulk Bethe states.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import GaugeConstraintViolated, SingularGauge, SingularKinematics
from lattice_operators import (BoundaryParams, ChainConfig, boundary_chain,
                               boundary_monodromy, bulk_chain, bulk_monodromy, k_minus)
from numerics import principal_mod_2ipi
from spectrum import EpsilonChoice, a_d, a_eps_plus

logger = logging.getLogger(__name__)

SINGULAR_BETA_TOL = 1e-10


@dataclass(frozen=True)
class GaugePair:
    """Gauge parameters (α, β); also used for the internal pairs (γ, δ)"""
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, 'alpha', complex(self.alpha))
        object.__setattr__(self, 'beta', complex(self.beta))

    @property
    def diff(self) -> complex:
        return self.alpha - self.beta

    @property
    def total(self) -> complex:
        return self.alpha + self.beta

    def validate(self, eta: complex) -> 'GaugePair':
        if abs(np.sinh(eta * self.beta)) < SINGULAR_BETA_TOL:
            raise SingularGauge(f"sinh(ηβ) vanishes for β = {self.beta}")
        return self

    def shifted(self, d_alpha: complex = 0, d_beta: complex = 0) -> 'GaugePair':
        return GaugePair(self.alpha + d_alpha, self.beta + d_beta)

    def to_dict(self) -> Dict[str, Any]:
        return {'alpha': [self.alpha.real, self.alpha.imag], 'beta': [self.beta.real, self.beta.imag]}


def s_matrix(lam: complex, alpha: complex, beta: complex, eta: complex) -> np.ndarray:
    return np.array([[np.exp(lam - eta * (beta + alpha)), np.exp(lam + eta * (beta - alpha))],
                     [1, 1]], dtype=complex)


def s_inverse(lam: complex, alpha: complex, beta: complex, eta: complex) -> np.ndarray:
    if abs(np.sinh(eta * beta)) < SINGULAR_BETA_TOL:
        raise SingularGauge(f"S(λ|α, β) is singular: sinh(ηβ) ≈ 0 for β = {beta}")
    S = s_matrix(lam, alpha, beta, eta)
    det = -2 * np.exp(lam - eta * alpha) * np.sinh(eta * beta)
    return np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]], dtype=complex) / det


def conjugate_blocks(left: np.ndarray, blocks: List[List[np.ndarray]], right: np.ndarray) -> List[List[np.ndarray]]:
    """left · [[X_ab]] · right for scalar 2×2 matrices acting on the auxiliary space"""
    return [[sum(left[i, a] * blocks[a][b] * right[b, j] for a in range(2) for b in range(2))
             for j in range(2)] for i in range(2)]


def gauge_row(lam: complex, x: complex, eta: complex) -> np.ndarray:
    return np.array([-np.exp(lam), np.exp(-eta / 2 - eta * x)], dtype=complex)


def gauge_col(lam: complex, y: complex, eta: complex) -> np.ndarray:
    return np.array([np.exp(-eta / 2 - lam - eta * y), 1], dtype=complex)


def apply_bulk_entry(config: ChainConfig, lam: complex, x: complex, y: complex,
                     vec: np.ndarray) -> np.ndarray:
    """
    Gauged bulk entry B(λ|x, y) = A(λ|x, y) applied to vec.

    C and D are the negatives of the same function of their two arguments.
    """
    eta = config.eta
    return bulk_chain(config, lam).act(gauge_row(lam, x, eta), gauge_col(lam, y, eta), vec)


def bulk_entry(config: ChainConfig, lam: complex, x: complex, y: complex) -> np.ndarray:
    eta = config.eta
    return bulk_chain(config, lam).matrix(gauge_row(lam, x, eta), gauge_col(lam, y, eta))


def conjugated_bulk_monodromy(config: ChainConfig, lam: complex, left: GaugePair,
                              right: GaugePair) -> List[List[np.ndarray]]:
    """S⁻¹(−η/2−λ|α,β) M(λ) S(−η/2−λ|γ,δ), unscaled"""
    eta = config.eta
    mu = -eta / 2 - lam
    return conjugate_blocks(s_inverse(mu, left.alpha, left.beta, eta),
                            bulk_monodromy(config, lam),
                            s_matrix(mu, right.alpha, right.beta, eta))


def gauged_bulk_monodromy(config: ChainConfig, lam: complex, left: GaugePair,
                          right: GaugePair) -> Dict[str, np.ndarray]:
    """
    Rescaled gauged bulk entries

        A(λ|α−β, γ+δ), B(λ|α−β, γ−δ), C(λ|α+β, γ+δ), D(λ|α+β, γ−δ)

    obtained by conjugation and multiplication by 2 sinh(ηβ) e^{−η(α+1/2)}.
    """
    eta = config.eta
    blocks = conjugated_bulk_monodromy(config, lam, left, right)
    scale = 2 * np.sinh(eta * left.beta) * np.exp(-eta * (left.alpha + 0.5))
    return {'A': scale * blocks[0][0], 'B': scale * blocks[0][1],
            'C': scale * blocks[1][0], 'D': scale * blocks[1][1]}


def gauged_boundary_monodromy(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                              gauge: GaugePair) -> List[List[np.ndarray]]:
    """𝒰₋(λ|α,β) = S⁻¹(η/2−λ|α,β) 𝒰₋(λ) S(λ−η/2|α,β)"""
    eta = config.eta
    return conjugate_blocks(s_inverse(eta / 2 - lam, gauge.alpha, gauge.beta, eta),
                            boundary_monodromy(config, boundary, lam),
                            s_matrix(lam - eta / 2, gauge.alpha, gauge.beta, eta))


def gauged_k_matrix(boundary: BoundaryParams, lam: complex, eta: complex,
                    inner: GaugePair, inner_prime: GaugePair) -> np.ndarray:
    """K₋(λ|(γ,δ),(γ′,δ′)) = S⁻¹(η/2−λ|γ,δ) K₋(λ) S(λ−η/2|γ′,δ′)"""
    return (s_inverse(eta / 2 - lam, inner.alpha, inner.beta, eta)
            @ k_minus(lam, eta, boundary)
            @ s_matrix(lam - eta / 2, inner_prime.alpha, inner_prime.beta, eta))


def choice_gamma_delta(boundary: BoundaryParams, eps_plus: int, eta: complex) -> GaugePair:
    """Internal pair (γ, δ) making the gauged K₋ diagonal, principal branch"""
    phi, psi = boundary.phi_psi('+')
    eta_gamma = principal_mod_2ipi(-boundary.tau_p + eps_plus * 1j * np.pi / 2)
    eta_delta = principal_mod_2ipi(-eps_plus * (phi + psi) - 1j * np.pi / 2)
    return GaugePair(eta_gamma / eta, eta_delta / eta)


def boundary_from_bulk(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                       gauge: GaugePair, inner: GaugePair, inner_prime: GaugePair) -> List[List[np.ndarray]]:
    """Right-hand side of the gauged boundary-bulk identity for 𝒰₋(λ|α,β)"""
    eta, N = config.eta, config.N
    alpha, beta = gauge.alpha, gauge.beta
    gamma, delta = inner.alpha, inner.beta
    gamma_p, delta_p = inner_prime.alpha, inner_prime.beta
    if abs(np.sinh(eta * delta_p)) < SINGULAR_BETA_TOL or abs(np.sinh(eta * beta)) < SINGULAR_BETA_TOL:
        raise SingularGauge("sinh(ηδ′) or sinh(ηβ) vanishes")

    def F(mu, x, y):
        return bulk_entry(config, mu, x, y)

    left = [[-F(lam, gamma + delta - 1, alpha - beta - 1), -F(lam, gamma - delta - 1, alpha - beta - 1)],
            [F(lam, gamma + delta - 1, alpha + beta - 1), F(lam, gamma - delta - 1, alpha + beta - 1)]]
    right = [[F(-lam, gamma_p - delta_p, alpha + beta), F(-lam, gamma_p - delta_p, alpha - beta)],
             [-F(-lam, gamma_p + delta_p, alpha + beta), -F(-lam, gamma_p + delta_p, alpha - beta)]]
    K = gauged_k_matrix(boundary, lam, eta, inner, inner_prime)
    prefactor = ((-1) ** N * np.exp(eta * (gamma_p + alpha))
                 / (4 * np.sinh(eta * delta_p) * np.sinh(eta * beta)))
    return [[prefactor * sum(K[a, b] * (left[i][a] @ right[b][j]) for a in range(2) for b in range(2))
             for j in range(2)] for i in range(2)]


def _b_hat_vectors(lam: complex, x: complex, eta: complex) -> Tuple[np.ndarray, np.ndarray]:
    row = -0.5 * np.array([np.exp(eta * x), -np.exp(eta / 2 - lam)], dtype=complex)
    col = np.array([np.exp(lam - eta / 2 - eta * x), 1], dtype=complex)
    return row, col


def b_hat(config: ChainConfig, boundary: BoundaryParams, lam: complex, gauge: GaugePair) -> np.ndarray:
    """𝐁̂₋(λ|α−β) = sinh(ηβ) e^{−ηβ} e^{−(λ−η/2)} ℬ₋(λ|α,β), through the full conjugation"""
    eta = config.eta
    gauge.validate(eta)
    blocks = gauged_boundary_monodromy(config, boundary, lam, gauge)
    return np.sinh(eta * gauge.beta) * np.exp(-eta * gauge.beta) * np.exp(-(lam - eta / 2)) * blocks[0][1]


def b_hat_x(config: ChainConfig, boundary: BoundaryParams, lam: complex, x: complex) -> np.ndarray:
    """𝐁̂₋(λ|x) from the closed row/column form; depends on x = α−β only"""
    row, col = _b_hat_vectors(lam, x, config.eta)
    return boundary_chain(config, boundary, lam).matrix(row, col)


def apply_b_hat(config: ChainConfig, boundary: BoundaryParams, lam: complex, x: complex,
                vec: np.ndarray) -> np.ndarray:
    row, col = _b_hat_vectors(lam, x, config.eta)
    return boundary_chain(config, boundary, lam).act(row, col, vec)


def b_hat_from_bulk(config: ChainConfig, boundary: BoundaryParams, lam: complex, x: complex,
                    eps_plus: int, vec: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Two-term bulk expression of 𝐁̂₋(λ|x) with (γ, δ) fixed by ``eps_plus``.

    Returns the dense operator, or its action on ``vec`` when given.
    """
    eta, N = config.eta, config.N
    inner = choice_gamma_delta(boundary, eps_plus, eta)
    gamma, delta = inner.alpha, inner.beta
    s2 = np.sinh(2 * lam)
    if abs(s2) < Config.POLE_TOL:
        raise SingularKinematics(f"sinh 2λ vanishes at λ = {lam}")
    if vec is None:
        vec = np.eye(config.dim, dtype=complex)

    def B(mu, xx, yy, v):
        return apply_bulk_entry(config, mu, xx, yy, v)

    def D(mu, xx, yy, v):
        return -apply_bulk_entry(config, mu, xx, yy, v)

    first = B(-lam, gamma - delta - 1, x - 1, D(lam, gamma + delta, x, vec))
    second = B(lam, gamma - delta - 1, x - 1, D(-lam, gamma + delta, x, vec))
    prefactor = ((-1) ** N * np.exp(eta * (gamma + x)) / (4 * np.sinh(eta * (delta + 1)))
                 * np.sinh(2 * lam - eta) / s2)
    return prefactor * (a_eps_plus(boundary, eps_plus, lam, eta) * first
                        - a_eps_plus(boundary, eps_plus, -lam, eta) * second)


def reference_state(config: ChainConfig, x: complex) -> np.ndarray:
    """|η, x⟩ = ⊗ₙ (e^{−(n−N+x)η−ξₙ}, 1)ᵗ"""
    eta, N = config.eta, config.N
    out = np.ones(1, dtype=complex)
    for n in range(1, N + 1):
        local = np.array([np.exp(-(n - N + x) * eta - config.xi[n - 1]), 1], dtype=complex)
        out = np.kron(out, local)
    return out


@dataclass
class BoundaryBetheState:
    roots: Tuple[complex, ...]
    gauge: GaugePair
    vector: np.ndarray
    normalization: complex = 1.0

    @property
    def M(self) -> int:
        return len(self.roots)


def boundary_bethe_state(config: ChainConfig, boundary: BoundaryParams, roots: Sequence[complex],
                         gauge: GaugePair) -> BoundaryBetheState:
    """∏_{j=1→M} 𝐁̂₋(λ_j|α−β+2j−1) |η, α+β+N−2M−1⟩, the λ_M factor applied first"""
    eta, N = config.eta, config.N
    gauge.validate(eta)
    roots = tuple(complex(r) for r in roots)
    M = len(roots)
    vec = reference_state(config, gauge.total + N - 2 * M - 1)
    for j in range(M, 0, -1):
        vec = apply_b_hat(config, boundary, roots[j - 1], gauge.diff + 2 * j - 1, vec)
    return BoundaryBetheState(roots=roots, gauge=gauge, vector=vec)


def separate_state_gauge(boundary: BoundaryParams, eps: EpsilonChoice, eta: complex,
                         eps_minus: int = 1) -> GaugePair:
    """(α, β) for separate states, principal branch with k = 0"""
    phi, psi = boundary.phi_psi('-')
    e_phi = eps.e_phi_m
    eta_alpha = (-boundary.tau_m + (e_phi - eps_minus) / 2 * (phi - psi)
                 - (eps_minus + e_phi) / 4 * 1j * np.pi)
    eta_beta = ((eps_minus + e_phi) / 2 * (phi - psi)
                + (2 + eps_minus - e_phi) / 4 * 1j * np.pi)
    pair = GaugePair(principal_mod_2ipi(eta_alpha) / eta, principal_mod_2ipi(eta_beta) / eta)
    return pair.validate(eta)


def cond_bb_residual(boundary: BoundaryParams, gauge: GaugePair, N: int, M: int,
                     eps_plus: int, eta: complex) -> float:
    """Distance mod 2iπ of η(α+β+N−2M−1) from −τ₊ − ε₊(φ₊+ψ₊) + (ε₊−1)iπ/2"""
    phi, psi = boundary.phi_psi('+')
    target = -boundary.tau_p - eps_plus * (phi + psi) + (eps_plus - 1) / 2 * 1j * np.pi
    return abs(principal_mod_2ipi(eta * (gauge.total + N - 2 * M - 1) - target))


def h_m(M: int, N: int, eta: complex, gamma: complex, delta: complex, x: complex) -> complex:
    """Prefactor h_M(γ−δ, x, γ+δ) of the boundary-bulk state decomposition"""
    out = (-1) ** (M * N) * np.exp(M * eta * (gamma - delta + x + N) / 2)
    for j in range(1, M + 1):
        out *= (np.sinh(eta * (x - gamma - delta + N - 1 + 2 * j) / 2)
                / (2 * np.sinh(eta * (delta + j))))
    return complex(out)


def h_sigma(config: ChainConfig, boundary: BoundaryParams, eps_plus: int,
            lambdas: Sequence[complex], sigma: Sequence[int]) -> complex:
    """Boundary-bulk coefficient H_σ({λ})"""
    eta = config.eta
    signed = [s * lam for s, lam in zip(sigma, lambdas)]
    out = 1.0 + 0j
    for s, lam, ls in zip(sigma, lambdas, signed):
        a_minus, _ = a_d(config, -ls)
        out *= (s * a_minus * a_eps_plus(boundary, eps_plus, -ls, eta)
                * np.sinh(2 * lam - eta) / np.sinh(2 * lam))
    for i in range(len(signed)):
        for j in range(i + 1, len(signed)):
            out *= np.sinh(signed[i] + signed[j] + eta) / np.sinh(signed[i] + signed[j])
    return complex(out)


def null_sum_bracket(boundary: BoundaryParams, eps_plus: int, lam_a: complex, lam_b: complex,
                     delta: complex, eta: complex) -> Tuple[complex, complex]:
    """
    Signed four-term sum cancelled by the choice of δ, with its factorized form.

    Returns ``(bracket, closed_form)``.
    """
    total = 0j
    for s_a, s_b in itertools.product((1, -1), repeat=2):
        la, lb = s_a * lam_a, s_b * lam_b
        total += (s_a * s_b * a_eps_plus(boundary, eps_plus, -lb, eta)
                  * a_eps_plus(boundary, eps_plus, -la, eta)
                  * np.sinh(lb + la - eta * (delta + 1)) / np.sinh(lb + la))
    phi, psi = boundary.phi_psi('+')
    w = eps_plus * (phi + psi)
    closed = (-np.sinh(2 * lam_b) * np.sinh(2 * lam_a) * np.cosh(w + eta * delta) * np.cosh(w - eta)
              / (np.sinh(eps_plus * phi) ** 2 * np.cosh(eps_plus * psi) ** 2))
    return complex(total), complex(closed)


@dataclass
class BulkTerm:
    """One term h_M H_σ · B(...)···B(...) |η, ref_x⟩ of the decomposition"""
    sigma: Tuple[int, ...]
    coefficient: complex
    word: List[Tuple[complex, complex, complex]]
    ref_x: complex


@dataclass
class BulkDecomposition:
    terms: List[BulkTerm]
    inner: GaugePair
    prefactor: complex
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def boundary_bulk_decompose(config: ChainConfig, boundary: BoundaryParams, roots: Sequence[complex],
                            gauge: GaugePair, eps_plus: int, tol: float = 1e-8) -> BulkDecomposition:
    """
    Decompose the boundary Bethe state into 2^M gauged bulk Bethe states.

    Words are listed left to right: the k-th factor is
    B(λ_{M+1−k}^{(σ)}|γ−δ−k, α−β+k−1).
    """
    eta, N = config.eta, config.N
    roots = tuple(complex(r) for r in roots)
    M = len(roots)
    residual = cond_bb_residual(boundary, gauge, N, M, eps_plus, eta)
    if residual > tol:
        raise GaugeConstraintViolated(
            f"gauge (α, β) violates the boundary-bulk condition (residual {residual:.2e})",
            {'residual': residual, 'eps_plus': eps_plus})

    delta = choice_gamma_delta(boundary, eps_plus, eta).beta
    # γ+δ pinned to α+β+N−2M−1 exactly, not only mod 2iπ/η
    gamma = gauge.total + N - 2 * M - 1 - delta
    inner = GaugePair(gamma, delta)
    x = gauge.diff
    prefactor = h_m(M, N, eta, gamma, delta, x)

    terms = []
    for sigma in itertools.product((1, -1), repeat=M):
        coefficient = prefactor * h_sigma(config, boundary, eps_plus, roots, sigma)
        word = [(sigma[M - k] * roots[M - k], gamma - delta - k, x + k - 1) for k in range(1, M + 1)]
        terms.append(BulkTerm(sigma=sigma, coefficient=coefficient, word=word, ref_x=gamma + delta + M))
    logger.debug(f"boundary-bulk decomposition: {len(terms)} terms, h_M = {prefactor:.4g}")
    return BulkDecomposition(terms=terms, inner=inner, prefactor=prefactor,
                             diagnostics={'cond_bb_residual': residual})


def apply_bulk_word(config: ChainConfig, word: Sequence[Tuple[complex, complex, complex]],
                    vec: np.ndarray) -> np.ndarray:
    for lam, x, y in reversed(word):
        vec = apply_bulk_entry(config, lam, x, y, vec)
    return vec


def materialize(config: ChainConfig, decomposition: BulkDecomposition, threads: int = None) -> np.ndarray:
    """Sum of all decomposition terms as a 2^N vector (terms summed in σ order)"""
    threads = Config.THREADS if threads is None else threads

    def evaluate(term: BulkTerm) -> np.ndarray:
        return term.coefficient * apply_bulk_word(config, term.word, reference_state(config, term.ref_x))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(evaluate, decomposition.terms))
    else:
        parts = [evaluate(t) for t in decomposition.terms]
    total = np.zeros(config.dim, dtype=complex)
    for part in parts:
        total = total + part
    return total
