"""
Half-infinite chain: ground-state density, boundary roots and regimes, and the
multiple-integral representation of conserving gauged words.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import (ConfigError, DegenerateSpectrum, NonConvergentSequence, NonConservingWord, PoleHit,
                    QuadratureNotConverged, RegimeMismatch, UnresolvedPoleOrder, VerificationFailure)
from gauge import GaugePair, separate_state_gauge
from lattice_operators import BoundaryParams, ChainConfig
from local_ops import OperatorWord, check_basis
from matrix_elements import dense_matel, matel_finite, vandermonde_prefactor, word_integrand_weight
from numerics import panel_rule, richardson
from oracle import (ORACLE_MAX_N, build_spectrum_table, ground_branch, match_ground_state,
                    seed_roots_from_oracle)
from spectrum import (BetheSolution, EpsilonChoice, bethe_solve, bethe_solve_all, boundary_root_candidates,
                      canonical_root, check_constraint, tune_tau_plus)

logger = logging.getLogger(__name__)

THETA_TOL = 1e-16
MAX_M = 3


# -- theta functions (nome q, ϑ₃ = 1 + 2Σ q^{n²} cos 2nz) ---------------------

def _theta_sum(term: Callable[[int], np.ndarray], start: int, z) -> np.ndarray:
    total = np.zeros_like(np.asarray(z, dtype=complex))
    for n in range(start, 400):
        t = term(n)
        total = total + t
        if n > start + 1 and np.max(np.abs(t)) < THETA_TOL * max(1.0, float(np.max(np.abs(total)))):
            return total
    raise NonConvergentSequence("theta q-series did not reach the truncation threshold")


def theta(n: int, z, q: float):
    """Jacobi theta function ϑ_n(z, q) by its q-series"""
    z = np.asarray(z, dtype=complex)
    if not 0 < q < 1:
        raise RegimeMismatch(f"nome must lie in (0, 1), got {q}")
    if n == 1:
        out = _theta_sum(lambda k: 2 * (-1) ** k * q ** ((k + 0.5) ** 2) * np.sin((2 * k + 1) * z), 0, z)
    elif n == 2:
        out = _theta_sum(lambda k: 2 * q ** ((k + 0.5) ** 2) * np.cos((2 * k + 1) * z), 0, z)
    elif n == 3:
        out = 1 + _theta_sum(lambda k: 2 * q ** (k * k) * np.cos(2 * k * z), 1, z)
    elif n == 4:
        out = 1 + _theta_sum(lambda k: 2 * (-1) ** k * q ** (k * k) * np.cos(2 * k * z), 1, z)
    else:
        raise ValueError(f"theta index must be 1..4, got {n}")
    return out if out.ndim else complex(out)


def theta1_prime0(q: float) -> float:
    total, k = 0.0, 0
    while True:
        t = 2 * (-1) ** k * (2 * k + 1) * q ** ((k + 0.5) ** 2)
        total += t
        if abs(t) < THETA_TOL * max(1.0, abs(total)):
            return total
        k += 1


# -- density ---------------------------------------------------------------

def density_regime(eta: complex) -> str:
    eta = complex(eta)
    zeta = 1j * eta
    if abs(zeta.imag) < 1e-14 and 0 < zeta.real < np.pi:
        return 'massless'
    if abs(eta.imag) < 1e-14 and eta.real < 0:
        return 'massive'
    raise RegimeMismatch(f"η = {eta} is neither iη ∈ (0, π) (|Δ| < 1) nor real negative (Δ > 1)")


def lambda_endpoint(regime: str, eta: complex) -> complex:
    """Λ: truncated +∞ in the massless regime, −iπ/2 in the massive one"""
    if regime == 'massless':
        return complex(Config.MASSLESS_CUT * (1j * eta).real)
    return -0.5j * np.pi


def density(regime: str, eta: complex, lam):
    """Ground-state root density ρ(λ)"""
    if density_regime(eta) != regime:
        raise RegimeMismatch(f"regime '{regime}' does not match η = {eta}")
    lam = np.asarray(lam, dtype=complex)
    if regime == 'massless':
        zeta = (1j * complex(eta)).real
        out = 1 / (zeta * np.cosh(np.pi * lam / zeta))
    else:
        q = float(np.exp(complex(eta).real))
        ratio = theta1_prime0(q) / theta(2, 0, q).real
        out = 1j / np.pi * ratio * theta(3, 1j * lam, q) / theta(4, 1j * lam, q)
    return out if np.ndim(out) else complex(out)


def massive_density_fourier(x, eta: complex, terms: int = 200):
    """ρ(−ix) = (i/π) Σ_n e^{2inx}/cosh(nη), the Fourier form along the massive segment"""
    x = np.asarray(x, dtype=float)
    total = np.ones_like(x, dtype=complex)
    for n in range(1, terms):
        c = 2 / np.cosh(n * complex(eta).real)
        if c < 1e-18:
            break
        total = total + c * np.cos(2 * n * x)
    return 1j / np.pi * total


def t_kernel(lam, eta):
    return 1 / np.tanh(lam - eta / 2) - 1 / np.tanh(lam + eta / 2)


def k_kernel(lam, eta):
    """(i/2π)[t(λ+η/2) + t(λ−η/2)] with the coth λ terms cancelled"""
    return 1j / (2 * np.pi) * (1 / np.tanh(lam - eta) - 1 / np.tanh(lam + eta))


def base_path(regime: str, eta: complex, nodes: int, panels: int,
              bend: complex = 0j) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature on [−Λ, Λ], optionally through the displaced midpoint ``bend``"""
    end = lambda_endpoint(regime, eta)
    if bend == 0:
        return panel_rule(-end, end, panels, nodes)
    x1, w1 = panel_rule(-end, bend, max(1, panels // 2), nodes)
    x2, w2 = panel_rule(bend, end, max(1, panels // 2), nodes)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


@dataclass
class DensityProfile:
    regime: str
    eta: complex
    Lambda: complex
    grid: np.ndarray
    values: np.ndarray
    residual: float
    tail_bound: float = 0.0
    integral: complex = 0j

    @property
    def parameter(self) -> float:
        """ζ in the massless regime, q in the massive one"""
        if self.regime == 'massless':
            return (1j * self.eta).real
        return float(np.exp(self.eta.real))

    def to_dict(self) -> Dict[str, Any]:
        return {'regime': self.regime, 'parameter': self.parameter,
                'Lambda': [self.Lambda.real, self.Lambda.imag],
                'residual': self.residual, 'tail_bound': self.tail_bound,
                'half_integral': [0.5 * self.integral.real, 0.5 * self.integral.imag]}


def density_residual(eta: complex, grid, nodes: int = 32, panels: int = 24) -> np.ndarray:
    """ρ(λ) + ∫_{−Λ}^{Λ} K(λ−μ)ρ(μ)dμ − i t(λ)/π at the grid points"""
    regime = density_regime(eta)
    mu, w = base_path(regime, eta, nodes, panels)
    grid = np.asarray(grid, dtype=complex)
    rho_mu = density(regime, eta, mu)
    integral = (k_kernel(grid[:, None] - mu[None, :], eta) * (w * rho_mu)[None, :]).sum(axis=1)
    return density(regime, eta, grid) + integral - 1j * t_kernel(grid, eta) / np.pi


def density_profile(eta: complex, n_grid: int = 50) -> DensityProfile:
    regime = density_regime(eta)
    end = lambda_endpoint(regime, eta)
    if regime == 'massless':
        zeta = (1j * eta).real
        grid = np.linspace(-3 * zeta, 3 * zeta, n_grid).astype(complex)
        tail = float(4 / np.pi * np.exp(-np.pi * end.real / zeta))
    else:
        grid = -1j * np.linspace(-0.49 * np.pi, 0.49 * np.pi, n_grid)
        tail = 0.0
    residual = float(np.max(np.abs(density_residual(eta, grid))))
    mu, w = base_path(regime, eta, 32, 24)
    integral = complex(np.sum(w * density(regime, eta, mu)))
    logger.info(f"density ({regime}): integral-equation residual {residual:.2e}")
    return DensityProfile(regime=regime, eta=complex(eta), Lambda=end, grid=grid,
                          values=density(regime, eta, grid), residual=residual, tail_bound=tail,
                          integral=integral)


# -- regimes ----------------------------------------------------------------

@dataclass(frozen=True)
class RegimeSpec:
    label: str
    boundary_roots: Tuple[complex, ...]
    poles: Tuple[complex, ...]


_REGIME_ROOTS = {'A': (), 'B': (0,), 'C': (1,), 'D': (0, 1)}


def regime_spec(label: str, boundary: BoundaryParams, eps: EpsilonChoice, eta: complex) -> RegimeSpec:
    """
    Boundary roots λ̌_{−,i} included by the regime, and the points encircled by 𝒞.

    The integrand is singular at the reflected images of the roots,
    ε_{φ−}φ₋ − η/2 and −ε_{ψ−}ψ₋ − η/2 + iπ/2, so those are the encircled points.
    """
    if label not in _REGIME_ROOTS:
        raise RegimeMismatch(f"unknown regime '{label}', expected one of A, B, C, D")
    candidates = boundary_root_candidates(boundary, eps, eta)[2:]
    phi, psi = boundary.phi_psi('-')
    images = (eps.e_phi_m * phi - eta / 2, -eps.e_psi_m * psi - eta / 2 + 0.5j * np.pi)
    picks = _REGIME_ROOTS[label]
    return RegimeSpec(label=label,
                      boundary_roots=tuple(complex(candidates[i]) for i in picks),
                      poles=tuple(complex(images[i]) for i in picks))


def detect_regime(roots: Sequence[complex], boundary: BoundaryParams, eps: EpsilonChoice,
                  eta: complex, tol: float = 1e-3) -> str:
    """Advisory regime label from a finite-N root set"""
    candidates = [canonical_root(c) for c in boundary_root_candidates(boundary, eps, eta)[2:]]
    found = [any(abs(canonical_root(r) - c) < tol for r in roots) for c in candidates]
    return {(False, False): 'A', (True, False): 'B', (False, True): 'C', (True, True): 'D'}[tuple(found)]


# -- residues and the multiple integral ---------------------------------------

def residue(f: Callable[[complex], Any], point: complex, h0: float = 1e-3,
            levels: int = 4, direction: complex = np.exp(0.37j)) -> Tuple[Any, float]:
    """
    lim_{h→0} h f(p + h) by Richardson extrapolation over h0/2^k.

    Raises UnresolvedPoleOrder when h f(p+h) grows as h shrinks.
    """
    steps = [h0 / 2 ** k for k in range(levels)]
    values = [np.asarray(h * direction * f(point + h * direction)) for h in steps]
    first, last = np.max(np.abs(values[0])), np.max(np.abs(values[-1]))
    if last > 2 * first + 1e-14:
        raise UnresolvedPoleOrder(f"pole at {point:.4g} is not simple (|h f| grows from {first:.2e} to {last:.2e})")
    return richardson(steps, values, order=1)


@dataclass
class ThermoResult:
    value: complex
    regime: str
    density_regime: str
    Lambda: complex
    nodes: int
    drift: Optional[float] = None
    residue_ledger: List[Dict[str, Any]] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'value': [self.value.real, self.value.imag], 'regime': self.regime,
                'density_regime': self.density_regime, 'Lambda': [self.Lambda.real, self.Lambda.imag],
                'nodes': self.nodes, 'drift': self.drift, 'residues': self.residue_ledger,
                **self.diagnostics}


@dataclass
class ThermoSetup:
    eta: complex
    boundary: BoundaryParams
    eps: EpsilonChoice
    word: OperatorWord
    beta: complex
    chain: ChainConfig
    regime: RegimeSpec
    density_regime: str

    def phi(self, lam, x):
        """Φ(λ, ξ) = ½[ρ(λ−ξ) − ρ(λ+ξ)]"""
        return 0.5 * (density(self.density_regime, self.eta, lam - x)
                      - density(self.density_regime, self.eta, lam + x))

    def integrand(self, lams: Sequence) -> np.ndarray:
        """H_m(λ; ξ) det Φ(λ_j, ξ_k) with broadcasting over the λ arrays"""
        lams = np.broadcast_arrays(*[np.asarray(l, dtype=complex) for l in lams])
        m = self.word.m
        weight = word_integrand_weight(self.chain, self.boundary, self.eps, self.word, self.beta, lams)
        matrix = np.stack([np.stack([self.phi(lams[j], self.chain.xi[k]) for k in range(m)], axis=-1)
                           for j in range(m)], axis=-2)
        return weight * np.linalg.det(matrix)

    def prefactor(self) -> complex:
        eta = self.eta
        out = (-1) ** self.word.s / vandermonde_prefactor(self.chain.xi)
        for b in self.word.b(self.beta):
            out *= np.exp(eta) / np.sinh(eta * b)
        return complex(out)

    @property
    def residue_step(self) -> float:
        """Limit step, kept below the distance 2|ξ_k| to the partner pole of ρ(λ+ξ_k)"""
        return 1e-3 * min(1.0, 10 * min(abs(2 * x) for x in self.chain.xi))

    def encircled(self, j: int) -> List[Tuple[str, complex]]:
        """Points encircled by the contour of the j-th variable (0-based)"""
        points = [(f"boundary[{i}]", p) for i, p in enumerate(self.regime.poles)]
        if j >= self.word.s:
            points += [(f"xi1[{k + 1}]", self.chain.xi_shift(k + 1, 1)) for k in range(self.word.m)]
        return points


def thermo_setup(eta: complex, boundary: BoundaryParams, eps: EpsilonChoice, regime: RegimeSpec,
                 word: OperatorWord, xi: Sequence[complex], gauge: Optional[GaugePair] = None) -> ThermoSetup:
    if not word.conserving:
        raise NonConservingWord(f"word {word.eps}/{word.eps_prime} is not conserving")
    if not 1 <= word.m <= MAX_M:
        raise ConfigError(f"thermodynamic correlators are evaluated for 1 <= m <= {MAX_M}, got m={word.m}")
    if len(xi) != word.m:
        raise ConfigError(f"need {word.m} inhomogeneities, got {len(xi)}")
    if abs(vandermonde_prefactor(xi)) < Config.POLE_TOL:
        raise PoleHit("coinciding inhomogeneities: take the homogeneous limit instead")
    gauge = gauge or separate_state_gauge(boundary, eps, eta)
    check_basis(word, gauge.beta, eta)
    chain = ChainConfig(word.m, eta, tuple(xi), require_generic=False)
    return ThermoSetup(eta=complex(eta), boundary=boundary, eps=eps, word=word, beta=gauge.beta,
                       chain=chain, regime=regime, density_regime=density_regime(eta))


def _combination_value(setup: ThermoSetup, pins: Dict[int, complex], nodes: np.ndarray,
                       weights: np.ndarray, threads: int) -> complex:
    """(2πi)^{|pins|} times the residues in the pinned variables of the segment integral over the rest"""
    m = setup.word.m
    free = [j for j in range(m) if j not in pins]

    if len(set(pins.values())) < len(pins):
        # two variables on one simple pole: equal rows in the determinant
        return 0j
    axes = len(free)
    chunk = max(1, int(1e6 // max(1, len(nodes) ** max(0, axes - 1))))

    def grid_integral(pinned_values: Dict[int, complex]) -> complex:
        if not free:
            return complex(setup.integrand([pinned_values[j] for j in range(m)]))

        def block(start: int) -> complex:
            head, head_w = nodes[start:start + chunk], weights[start:start + chunk]
            lams = []
            for j in range(m):
                if j in pinned_values:
                    lams.append(pinned_values[j])
                    continue
                axis = free.index(j)
                shape = [1] * axes
                x = head if axis == 0 else nodes
                shape[axis] = len(x)
                lams.append(x.reshape(shape))
            w = head_w
            for _ in range(1, axes):
                w = np.multiply.outer(w, weights)
            values = setup.integrand(lams)
            return complex(np.sum(w * values))

        starts = list(range(0, len(nodes), chunk))
        if threads > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(block, starts))
        else:
            parts = [block(s) for s in starts]
        total = 0j
        for part in parts:
            total += part
        return total

    if not pins:
        return grid_integral({})

    def shifted(h: complex) -> complex:
        return grid_integral({j: p + h for j, p in pins.items()}) * h ** (len(pins) - 1)

    value, _ = residue(shifted, 0j, h0=setup.residue_step)
    return complex((2j * np.pi) ** len(pins) * value)


def _integrate(setup: ThermoSetup, nodes: int, panels: int, bend: complex,
               threads: int) -> Tuple[complex, List[Dict[str, Any]]]:
    x, w = base_path(setup.density_regime, setup.eta, nodes, panels, bend)
    m = setup.word.m
    options = [[None] + setup.encircled(j) for j in range(m)]
    total, ledger = 0j, []
    for combo in itertools.product(*options):
        pins = {j: c[1] for j, c in enumerate(combo) if c is not None}
        value = _combination_value(setup, pins, x, w, threads)
        total += value
        if pins:
            ledger.append({'points': {str(j + 1): combo[j][0] for j in pins},
                           'value': [value.real, value.imag]})
    return total, ledger


def correlator_thermo(eta: complex, boundary: BoundaryParams, eps: EpsilonChoice, regime: RegimeSpec,
                      word: OperatorWord, xi: Sequence[complex], quadrature: Optional[Dict[str, Any]] = None,
                      gauge: Optional[GaugePair] = None, threads: int = None) -> ThermoResult:
    """
    Multiple-integral value of a conserving word at inhomogeneities ξ.

    Variables λ_1..λ_s run over 𝒞 and λ_{s+1}..λ_m over 𝒞_ξ; encircled simple
    poles are taken as residues.
    """
    quadrature = dict(quadrature or {})
    threads = Config.THREADS if threads is None else threads
    setup = thermo_setup(eta, boundary, eps, regime, word, xi, gauge)
    nodes = int(quadrature.get('nodes', Config.QUAD_NODES if word.m == 1 else 16))
    panels = int(quadrature.get('panels', 8 if word.m == 1 else 4))
    bend = complex(*quadrature['bend']) if 'bend' in quadrature else 0j
    check = quadrature.get('check', word.m == 1)
    drift_tol = float(quadrature.get('tol', 1e-6))

    pre = setup.prefactor()
    raw, ledger = _integrate(setup, nodes, panels, bend, threads)
    value = pre * raw
    for entry in ledger:
        entry['value'] = [(pre * complex(*entry['value'])).real, (pre * complex(*entry['value'])).imag]

    drift = None
    if check:
        refined, _ = _integrate(setup, 2 * nodes, panels, bend, threads)
        drift = float(abs(pre * refined - value) / max(abs(value), 1e-300))
        if drift > drift_tol:
            raise QuadratureNotConverged(f"quadrature drift {drift:.2e} under node doubling",
                                         {'drift': drift, 'nodes': nodes})
        value = pre * refined
    logger.info(f"thermo correlator m={word.m} regime {regime.label}: {value:.8g}")
    return ThermoResult(value=complex(value), regime=regime.label, density_regime=setup.density_regime,
                        Lambda=lambda_endpoint(setup.density_regime, eta), nodes=nodes, drift=drift,
                        residue_ledger=ledger,
                        diagnostics={'beta': [setup.beta.real, setup.beta.imag], 'panels': panels})


def homogeneous_limit_xi(evaluate: Callable[[float], complex], scales: Sequence[float],
                         order: int = 1) -> Tuple[complex, float]:
    """Richardson extrapolation of evaluate(scale) to scale → 0"""
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise NonConvergentSequence("homogeneous limit needs at least three scales")
    if any(b >= a for a, b in zip(scales, scales[1:])) or scales[-1] <= 0:
        raise NonConvergentSequence("scales must be positive and strictly decreasing")
    values = [evaluate(s) for s in scales]
    value, increment = richardson(scales, values, order=order)
    return complex(value), float(increment)


XI_PATTERN = (1.0, -1.7, 2.3)


def correlator_homogeneous(eta: complex, boundary: BoundaryParams, eps: EpsilonChoice, regime: RegimeSpec,
                           word: OperatorWord, scales: Sequence[float] = (0.08, 0.04, 0.02, 0.01),
                           quadrature: Optional[Dict[str, Any]] = None) -> Tuple[complex, float]:
    def evaluate(scale: float) -> complex:
        xi = [scale * XI_PATTERN[k] for k in range(word.m)]
        return correlator_thermo(eta, boundary, eps, regime, word, xi, quadrature).value

    return homogeneous_limit_xi(evaluate, scales)


# -- finite-size comparison -----------------------------------------------------

@dataclass
class FiniteChainValue:
    N: int
    value: complex
    sector: int
    energy: float
    xi: List[complex]
    roots: Tuple[complex, ...]
    oracle_value: Optional[complex] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {'N': self.N, 'value': [self.value.real, self.value.imag], 'sector': self.sector,
               'energy': self.energy, 'roots': [[r.real, r.imag] for r in self.roots]}
        if self.oracle_value is not None:
            out['oracle_value'] = [self.oracle_value.real, self.oracle_value.imag]
        return out


def _sector_candidates(chain: ChainConfig, boundary: BoundaryParams,
                       sectors: Sequence[Tuple[int, EpsilonChoice]]) -> List[BetheSolution]:
    """Bethe solutions of the homogeneous chain in each sector; oracle-seeded up to the oracle size"""
    table = None
    if chain.N <= ORACLE_MAX_N:
        try:
            table = build_spectrum_table(chain, boundary)
        except DegenerateSpectrum as e:
            logger.warning(f"homogeneous spectrum is degenerate, falling back to built-in seeds: {e}")
    found: List[BetheSolution] = []
    for M, eps in sectors:
        if table is None:
            found.extend(bethe_solve_all(chain, boundary, eps, M))
            continue
        seeds = [q.roots for _, q in seed_roots_from_oracle(chain, boundary, eps, M, table)]
        found.extend(bethe_solve_all(chain, boundary, eps, M, seeds=seeds))
    return found


def finite_chain_expectation(eta: complex, boundary: BoundaryParams, eps: EpsilonChoice,
                             word: OperatorWord, N: int, xi: Optional[Sequence[complex]] = None,
                             allow_non_hermitian: bool = False, ramp: int = 4) -> FiniteChainValue:
    """
    Ground-state value of the gauged word on a chain of length N whose first m
    sites carry the inhomogeneities ``xi`` (the rest stays homogeneous).

    τ₊ is tuned to the constraint in sector ⌊N/2⌋. The ground state of the
    homogeneous Hamiltonian is identified among the Bethe solutions of that
    sector and of its companion, whenever their constraint holds. Its roots are
    followed to the inhomogeneous chain in ``ramp`` steps and the value comes
    from the finite-chain formula. Up to the oracle size the dense expectation
    value is attached as a cross-check.
    """
    M, m = N // 2, word.m
    xi = [0.1 * XI_PATTERN[k] for k in range(m)] if xi is None else [complex(x) for x in xi]
    if len(xi) != m:
        raise ConfigError(f"need one inhomogeneity per word site ({m}), got {len(xi)}")
    tuned = tune_tau_plus(boundary, eps, N, M, eta)
    homogeneous = ChainConfig.homogeneous(N, eta)

    sectors = []
    for degree, signs in ((M, eps), (N - 1 - M, eps.negated())):
        report = check_constraint(tuned, signs, N, degree, eta)
        if degree >= 0 and report.holds and report.tq_holds:
            sectors.append((degree, signs))
    ground = ground_branch(homogeneous, tuned, allow_non_hermitian=allow_non_hermitian)
    candidates = _sector_candidates(homogeneous, tuned, sectors)
    ground = match_ground_state(ground, homogeneous, tuned, candidates)
    if ground.solution is None:
        raise VerificationFailure(f"the ground state at N={N} is not among the Bethe solutions found",
                                  {'candidates': len(candidates), 'energy': ground.energy,
                                   'sectors': [degree for degree, _ in sectors]})

    solution = ground.solution
    for step in range(1, ramp + 1):
        shifted = [x * step / ramp for x in xi] + [0j] * (N - m)
        chain = ChainConfig(N, eta, tuple(shifted), require_generic=False)
        solution = bethe_solve(chain, tuned, solution.eps, solution.M, seed_roots=solution.roots)
    value = complex(matel_finite(chain, tuned, solution.eps, solution, word))
    result = FiniteChainValue(N=N, value=value, sector=solution.M, energy=ground.energy, xi=xi,
                              roots=solution.roots)
    if N <= ORACLE_MAX_N and m > 0:
        try:
            table = build_spectrum_table(chain, tuned)
        except DegenerateSpectrum as e:
            logger.warning(f"no dense cross-check at N={N}: {e}")
            return result
        result.oracle_value = complex(dense_matel(chain, tuned, solution.eps, solution, word, table))
        deviation = abs(value - result.oracle_value) / max(1.0, abs(result.oracle_value))
        logger.info(f"finite chain N={N}: formula vs dense deviation {deviation:.2e}")
    return result


@dataclass
class FiniteSizeSeries:
    sizes: List[int]
    values: List[complex]
    extrapolated: complex
    error: float

    def to_dict(self) -> Dict[str, Any]:
        return {'sizes': self.sizes, 'values': [[v.real, v.imag] for v in self.values],
                'extrapolated': [self.extrapolated.real, self.extrapolated.imag], 'error': self.error}


def finite_size_series(values: Dict[int, complex]) -> FiniteSizeSeries:
    """Linear extrapolation in 1/N; the error compares fits with and without the smallest size"""
    sizes = sorted(values)
    if len(sizes) < 2:
        raise NonConvergentSequence("finite-size extrapolation needs at least two sizes")
    inv = np.array([1 / n for n in sizes])
    vals = np.array([values[n] for n in sizes], dtype=complex)
    fit = np.polyfit(inv, vals, 1)
    error = float('nan')
    if len(sizes) > 2:
        error = float(abs(np.polyfit(inv[1:], vals[1:], 1)[-1] - fit[-1]))
    return FiniteSizeSeries(sizes=sizes, values=list(vals), extrapolated=complex(fit[-1]), error=error)


def soft_compare(thermo_value: complex, series: FiniteSizeSeries, tolerance: float = 0.02) -> Dict[str, Any]:
    deviation = abs(thermo_value - series.extrapolated) / max(abs(thermo_value), 1e-300)
    ok = deviation < tolerance
    if not ok:
        logger.warning(f"thermodynamic value differs from the finite-size extrapolation by {deviation:.1%}")
    return {'deviation': float(deviation), 'within_tolerance': bool(ok), 'tolerance': tolerance}
