"""
Gauged local-operator basis on the first m sites of the chain and its action
on boundary Bethe states.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import (BasisDegenerate, ConfigError, GaugeConstraintViolated, PoleHit)
from gauge import (GaugePair, BoundaryBetheState, boundary_bethe_state, cond_bb_residual,
                   h_sigma, s_inverse, s_matrix)
from lattice_operators import BoundaryParams, ChainConfig
from numerics import kron_all
from spectrum import EpsilonChoice, a_d

logger = logging.getLogger(__name__)

BASIS_TOL = 1e-8
LOG_PATH_MIN_N = 11


@dataclass(frozen=True)
class OperatorWord:
    """Word (ε, ε′) of elementary matrices E^{ε′_n, ε_n} on sites 1..m"""
    eps: Tuple[int, ...]
    eps_prime: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'eps', tuple(int(e) for e in self.eps))
        object.__setattr__(self, 'eps_prime', tuple(int(e) for e in self.eps_prime))
        if len(self.eps) != len(self.eps_prime):
            raise ConfigError("eps and eps_prime must have the same length")
        if any(e not in (1, 2) for e in self.eps + self.eps_prime):
            raise ConfigError("word entries must be 1 or 2")

    @property
    def m(self) -> int:
        return len(self.eps)

    def m_tilde(self, n: int = 1) -> int:
        """m̃_n = Σ_{r=n}^{m} (ε′_r − ε_r)"""
        return sum(self.eps_prime[r] - self.eps[r] for r in range(n - 1, self.m))

    @property
    def conserving(self) -> bool:
        return self.m_tilde() == 0

    @property
    def s(self) -> int:
        return sum(1 for e in self.eps if e == 2)

    @property
    def s_prime(self) -> int:
        return sum(1 for e in self.eps_prime if e == 1)

    @property
    def i_p(self) -> Tuple[int, ...]:
        """Sites with ε = 2 increasing, then sites with ε′ = 1 decreasing (1-based)"""
        first = [j for j in range(1, self.m + 1) if self.eps[j - 1] == 2]
        second = [j for j in range(self.m, 0, -1) if self.eps_prime[j - 1] == 1]
        return tuple(first + second)

    def a(self, alpha: complex) -> List[complex]:
        return [alpha + 1] * self.m

    def a_bar(self, alpha: complex) -> List[complex]:
        return [alpha - 1] * self.m

    def b(self, beta: complex) -> List[complex]:
        out, acc = [], 0
        for e in self.eps:
            acc += (-1) ** e
            out.append(beta - acc)
        return out

    def b_bar(self, beta: complex) -> List[complex]:
        return [b + 2 * self.m_tilde(n + 2) for n, b in enumerate(self.b(beta))]

    def to_dict(self) -> Dict[str, Any]:
        return {'eps': list(self.eps), 'eps_prime': list(self.eps_prime),
                'm_tilde': self.m_tilde(), 'conserving': self.conserving}


def check_basis(word: OperatorWord, beta: complex, eta: complex):
    for n, b in enumerate(word.b(beta), start=1):
        if abs(np.sinh(eta * b)) < BASIS_TOL:
            raise BasisDegenerate(f"sinh(η b_{n}) vanishes for β = {beta}; the gauged basis is degenerate")


def local_e_word(config: ChainConfig, word: OperatorWord, gauge: GaugePair) -> np.ndarray:
    """2^m × 2^m matrix ∏ₙ S(−ξₙ|āₙ, b̄ₙ) E^{ε′ₙ,εₙ} S⁻¹(−ξₙ|aₙ, bₙ)"""
    eta = config.eta
    if word.m > config.N:
        raise ConfigError(f"word on {word.m} sites does not fit a chain of {config.N}")
    check_basis(word, gauge.beta, eta)
    a, b = word.a(gauge.alpha), word.b(gauge.beta)
    a_bar, b_bar = word.a_bar(gauge.alpha), word.b_bar(gauge.beta)
    factors = []
    for n in range(word.m):
        E = np.zeros((2, 2), dtype=complex)
        E[word.eps_prime[n] - 1, word.eps[n] - 1] = 1
        xi = config.xi[n]
        factors.append(s_matrix(-xi, a_bar[n], b_bar[n], eta) @ E @ s_inverse(-xi, a[n], b[n], eta))
    return kron_all(factors)


def build_e_word(config: ChainConfig, word: OperatorWord, gauge: GaugePair) -> np.ndarray:
    local = local_e_word(config, word, gauge)
    return np.kron(local, np.eye(2 ** (config.N - word.m), dtype=complex))


def apply_e_word(config: ChainConfig, word: OperatorWord, gauge: GaugePair,
                 vec: np.ndarray) -> np.ndarray:
    local = local_e_word(config, word, gauge)
    rest = 2 ** (config.N - word.m)
    return (local @ np.asarray(vec, dtype=complex).reshape(2 ** word.m, rest)).reshape(-1)


def enumerate_b_sets(word: OperatorWord, M: int) -> List[Tuple[int, ...]]:
    """Admissible ordered index sets, lexicographic in (b_1, ..., b_{s+s′})"""
    i_p, s, m = word.i_p, word.s, word.m
    out: List[Tuple[int, ...]] = []

    def extend(prefix: List[int]):
        p = len(prefix) + 1
        if p > len(i_p):
            out.append(tuple(prefix))
            return
        top = M if p <= s else M + m + 1 - i_p[p - 1]
        for b in range(1, top + 1):
            if b not in prefix:
                extend(prefix + [b])

    extend([])
    return out


def _check_den(value: complex, what: str) -> complex:
    if abs(value) < Config.POLE_TOL:
        raise PoleHit(f"vanishing denominator in {what}; re-randomize the inhomogeneities")
    return value


def _sigma_terms(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                 word: OperatorWord, b_set: Sequence[int], roots: Sequence[complex],
                 beta: complex) -> Dict[Tuple[int, ...], complex]:
    """Contributions to the action coefficient, one per sign choice on the root part of the set"""
    eta, M, m = config.eta, len(roots), word.m
    eps_plus = eps.eps_plus
    sinh = np.sinh
    mu = [complex(r) for r in roots] + [config.xi_shift(m + 1 - j, 1) for j in range(1, m + 1)]
    xi1 = [config.xi_shift(k, 1) for k in range(1, m + 1)]
    xi0 = [config.xi_shift(k, 0) for k in range(1, m + 1)]
    b_gauge, b_bar = word.b(beta), word.b_bar(beta)
    i_p, s = word.i_p, word.s

    alpha_plus = sorted(b for b in b_set if b <= M)
    alpha_minus = [i for i in range(1, M + 1) if i not in alpha_plus]
    gamma_minus = {M + m + 1 - j for j in b_set if j > M}
    gamma_plus = [k for k in range(1, m + 1) if k not in gamma_minus]

    d_xi = np.prod([a_d(config, x)[1] for x in xi1])
    _check_den(d_xi, "d(ξ^(1))")
    h_ref = _check_den(h_sigma(config, boundary, eps_plus, [xi1[k - 1] for k in gamma_plus],
                               [1] * len(gamma_plus)), "H_1(ξ^(1))")

    out = {}
    for signs in itertools.product((1, -1), repeat=len(alpha_plus)):
        sig = dict(zip(alpha_plus, signs))

        def ms(i):
            return sig.get(i, 1) * mu[i - 1]

        t = np.prod([a_d(config, ms(b))[1] for b in b_set]) / d_xi
        t *= h_sigma(config, boundary, eps_plus, [mu[i - 1] for i in alpha_plus], signs) / h_ref
        for i in alpha_minus:
            for e in (1, -1):
                for j in alpha_plus:
                    t *= sinh(ms(j) + e * mu[i - 1] + eta) / _check_den(sinh(ms(j) + e * mu[i - 1]), "root pair")
                for j in gamma_plus:
                    t *= sinh(xi1[j - 1] + e * mu[i - 1]) / _check_den(sinh(xi0[j - 1] + e * mu[i - 1]), "ξ^(0) pair")
        for i in alpha_plus:
            for j in gamma_plus:
                t *= sinh(xi1[j - 1] - ms(i)) / _check_den(sinh(xi0[j - 1] - ms(i)), "ξ^(0) pair")
            for j in alpha_plus:
                t *= sinh(ms(j) - ms(i) - eta)
                if j != i:
                    t /= _check_den(sinh(ms(j) - ms(i)), "root difference")
        for x, y in itertools.combinations(range(len(b_set)), 2):
            diff = ms(b_set[x]) - ms(b_set[y])
            t *= sinh(diff) / _check_den(sinh(diff - eta), "shifted difference")
        for p in range(1, s + 1):
            ip, u = i_p[p - 1], ms(b_set[p - 1])
            t *= sinh(xi1[ip - 1] - u + eta * (1 + b_gauge[ip - 1]))
            for k in range(ip + 1, m + 1):
                t *= sinh(u - xi1[k - 1] - eta)
            for k in range(ip, m + 1):
                t /= _check_den(sinh(u - xi1[k - 1]), "ξ^(1) factor")
        for p in range(s + 1, len(b_set) + 1):
            ip, bp = i_p[p - 1], b_set[p - 1]
            u = ms(bp)
            t *= sinh(xi1[ip - 1] - u - eta * (1 - b_bar[ip - 1]))
            for k in range(ip + 1, m + 1):
                t *= sinh(xi1[k - 1] - u - eta)
            for k in range(ip, m + 1):
                if k != M + m + 1 - bp:
                    t /= _check_den(sinh(xi1[k - 1] - u), "ξ^(1) factor")
        out[tuple(signs)] = complex(t)
    return out


def action_prefactor(config: ChainConfig, word: OperatorWord, beta: complex) -> complex:
    """(−1)^{(N+1)m̃} e^{ηm̃(β+m̃)} ∏ₙ e^η / sinh(η bₙ)"""
    eta, mt = config.eta, word.m_tilde()
    out = (-1) ** ((config.N + 1) * mt) * np.exp(eta * mt * (beta + mt))
    for b in word.b(beta):
        out *= np.exp(eta) / _check_den(np.sinh(eta * b), "sinh(η b_n)")
    return complex(out)


def _log_sinh(z: complex) -> complex:
    z = complex(z)
    if z.real < 0:
        return _log_sinh(-z) + 1j * np.pi
    return complex(z - np.log(2) + np.log1p(-np.exp(-2 * z)))


def log_action_prefactor(config: ChainConfig, word: OperatorWord, beta: complex) -> complex:
    """Logarithm of the action prefactor: log-magnitude in the real part, phase in the imaginary part"""
    eta, mt = config.eta, word.m_tilde()
    out = 1j * np.pi * (((config.N + 1) * mt) % 2) + eta * mt * (beta + mt)
    for b in word.b(beta):
        log_s = _log_sinh(eta * b)
        if log_s.real < np.log(Config.POLE_TOL):
            raise PoleHit("vanishing denominator in sinh(η b_n)")
        out += eta - log_s
    return complex(out)


def scale_by_prefactor(config: ChainConfig, word: OperatorWord, beta: complex, total: complex,
                       log_path: Optional[bool] = None) -> complex:
    """prefactor · total, combined in log-magnitude and phase on long chains"""
    if log_path is None:
        log_path = config.N >= LOG_PATH_MIN_N
    if not log_path:
        return action_prefactor(config, word, beta) * total
    if total == 0:
        return 0j
    return complex(np.exp(log_action_prefactor(config, word, beta) + np.log(complex(total))))


def action_coefficient(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                       word: OperatorWord, b_set: Sequence[int], roots: Sequence[complex],
                       beta: complex, sigma: Optional[Sequence[int]] = None) -> complex:
    """
    Coefficient of the boundary Bethe state labelled by ``b_set`` in the action
    of the gauged word.

    Sums over the signs of the root part of the set unless ``sigma`` picks one.
    """
    terms = _sigma_terms(config, boundary, eps, word, b_set, roots, beta)
    if sigma is not None:
        return scale_by_prefactor(config, word, beta, terms[tuple(sigma)])
    return scale_by_prefactor(config, word, beta, sum(terms[k] for k in sorted(terms, reverse=True)))


@dataclass
class ActionTerm:
    b_set: Tuple[int, ...]
    coefficient: complex
    resulting_roots: Tuple[complex, ...]
    gauge: GaugePair
    sigma_terms: Dict[Tuple[int, ...], complex] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'b_set': list(self.b_set),
                'coefficient': [self.coefficient.real, self.coefficient.imag],
                'roots': [[r.real, r.imag] for r in self.resulting_roots],
                'gauge': self.gauge.to_dict()}


def act_on_state(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                 word: OperatorWord, state: BoundaryBetheState, tol: float = 1e-8,
                 threads: int = None) -> List[ActionTerm]:
    """Expand the gauged word acting on a boundary Bethe state into boundary Bethe states"""
    threads = Config.THREADS if threads is None else threads
    eta, N, M, m = config.eta, config.N, state.M, word.m
    alpha, beta = state.gauge.alpha, state.gauge.beta
    residual = cond_bb_residual(boundary, state.gauge, N, M, eps.eps_plus, eta)
    if residual > tol:
        raise GaugeConstraintViolated(
            f"state gauge violates the boundary-bulk condition (residual {residual:.2e})",
            {'residual': residual})
    check_basis(word, beta, eta)

    mu = list(state.roots) + [config.xi_shift(m + 1 - j, 1) for j in range(1, m + 1)]
    shifted = GaugePair(alpha, beta + 2 * word.m_tilde())
    b_sets = enumerate_b_sets(word, M)

    def evaluate(b_set: Tuple[int, ...]) -> ActionTerm:
        terms = _sigma_terms(config, boundary, eps, word, b_set, state.roots, beta)
        total = sum(terms[k] for k in sorted(terms, reverse=True))
        coefficient = scale_by_prefactor(config, word, beta, total)
        remaining = tuple(mu[i - 1] for i in range(1, M + m + 1) if i not in b_set)
        return ActionTerm(b_set=b_set, coefficient=coefficient, resulting_roots=remaining,
                          gauge=shifted, sigma_terms=terms)

    if threads > 1 and len(b_sets) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(evaluate, b_sets))
    else:
        out = [evaluate(b) for b in b_sets]
    logger.debug(f"action of word {word.eps}/{word.eps_prime}: {len(out)} index sets")
    return out


def materialize_action(config: ChainConfig, boundary: BoundaryParams, terms: Sequence[ActionTerm],
                       threads: int = None) -> np.ndarray:
    """Σ_B coefficient · boundary Bethe state, summed in index-set order"""
    threads = Config.THREADS if threads is None else threads

    def evaluate(term: ActionTerm) -> np.ndarray:
        return term.coefficient * boundary_bethe_state(config, boundary, term.resulting_roots,
                                                       term.gauge).vector

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(evaluate, terms))
    else:
        parts = [evaluate(t) for t in terms]
    total = np.zeros(config.dim, dtype=complex)
    for part in parts:
        total = total + part
    return total
