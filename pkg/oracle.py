"""
Exact-diagonalization oracle.

The transfer matrices form a commuting family, so one eigen-decomposition at a
generic spectral parameter gives the common eigenbasis; branch values at any
other λ are read off as u_k 𝒯(λ) v_k.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import Config
from errors import (AmbiguousMatch, ConfigError, DegenerateSpectrum, NonHermitianRegime,
                    VerificationFailure)
from lattice_operators import (BoundaryParams, ChainConfig, apply_transfer, hamiltonian,
                               homogeneous_transfer_hamiltonian, transfer_matrix)
from numerics import eig_dense
from spectrum import (A_eps, BetheSolution, EpsilonChoice, QPolynomial, eigenvalue_from_q,
                      inhomogeneous_term, tq_residual_hom, tq_residual_inhom)

logger = logging.getLogger(__name__)

ORACLE_MAX_N = 10
BASE_LAMBDA = 0.3137 + 0.1891j
DEFAULT_SAMPLES = (0.21 + 0.13j, 0.37 - 0.08j, -0.15 + 0.27j, 0.52 + 0.31j, 0.09 - 0.22j)


@dataclass
class SpectrumTable:
    config: ChainConfig
    boundary: BoundaryParams
    lambda_samples: List[complex]
    eigenvalues: np.ndarray          # (branches, samples)
    right: np.ndarray                # columns v_k
    left: np.ndarray                 # rows u_k, u_k·v_k = 1
    base_lambda: complex
    matching_tolerance: float = 1e-6
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def branches(self) -> int:
        return self.eigenvalues.shape[0]

    def eigenvalue(self, k: int, lam: complex) -> complex:
        """τ_k(λ) = u_k 𝒯(λ) v_k, matrix-free"""
        image = apply_transfer(self.config, self.boundary, lam, self.right[:, k])
        return complex(self.left[k] @ image)

    def eigenvalues_at(self, lam: complex) -> np.ndarray:
        image = apply_transfer(self.config, self.boundary, lam, self.right)
        return np.einsum('ki,ik->k', self.left, image)

    def tau(self, k: int) -> Callable[[complex], complex]:
        return lambda lam: self.eigenvalue(k, lam)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'N': self.config.N,
            'lambda_samples': [[z.real, z.imag] for z in self.lambda_samples],
            'eigenvalues': [[[z.real, z.imag] for z in row] for row in self.eigenvalues],
            'diagnostics': self.diagnostics,
        }


def build_spectrum_table(config: ChainConfig, boundary: BoundaryParams,
                         lambda_samples: Sequence[complex] = DEFAULT_SAMPLES,
                         base_lambda: complex = BASE_LAMBDA,
                         commute_tol: float = 1e-10) -> SpectrumTable:
    """Diagonalize 𝒯 at a generic λ and tabulate every branch on the samples"""
    if config.N > ORACLE_MAX_N:
        raise ConfigError(f"oracle tables are limited to N <= {ORACLE_MAX_N}, got N={config.N}")
    samples = [complex(z) for z in lambda_samples]
    if len(set(samples)) != len(samples):
        raise ConfigError("lambda samples must be pairwise distinct")

    T_base = transfer_matrix(config, boundary, base_lambda)
    w, V, U = eig_dense(T_base)
    gaps = np.abs(w[:, None] - w[None, :]) + np.eye(len(w)) * np.inf
    min_gap = float(gaps.min()) / max(1.0, float(np.abs(w).max()))
    if min_gap < Config.GAP_TOL:
        raise DegenerateSpectrum(
            f"relative eigen-gap {min_gap:.2e} below {Config.GAP_TOL:.0e}; re-randomize the inhomogeneities",
            {'min_gap': min_gap})

    worst_commutator = 0.0
    worst_residual = 0.0
    values = np.empty((len(w), len(samples)), dtype=complex)
    base_norm = np.linalg.norm(T_base)
    for i, lam in enumerate(samples):
        T = transfer_matrix(config, boundary, lam)
        comm = np.linalg.norm(T_base @ T - T @ T_base) / (base_norm * np.linalg.norm(T))
        worst_commutator = max(worst_commutator, float(comm))
        TV = T @ V
        values[:, i] = np.einsum('ki,ik->k', U, TV)
        residual = np.linalg.norm(TV - V * values[:, i], axis=0).max() / max(np.linalg.norm(T), 1e-300)
        worst_residual = max(worst_residual, float(residual))
    if worst_commutator > commute_tol:
        raise VerificationFailure(f"transfer matrices fail to commute ({worst_commutator:.2e})",
                                  {'commutator': worst_commutator})

    biorthogonality = float(np.abs(U @ V - np.eye(len(w))).max())
    logger.info(f"spectrum table N={config.N}: gap {min_gap:.2e}, "
                f"commutator {worst_commutator:.2e}, eigen-residual {worst_residual:.2e}")
    return SpectrumTable(
        config=config, boundary=boundary, lambda_samples=samples, eigenvalues=values,
        right=V, left=U, base_lambda=base_lambda,
        diagnostics={'min_gap': min_gap, 'commutator': worst_commutator,
                     'eigen_residual': worst_residual, 'biorthogonality': biorthogonality})


def match_branch(table: SpectrumTable, tau: Callable[[complex], complex],
                 tol: float = None) -> Tuple[int, float]:
    """Branch whose samples deviate least from τ; (branch, max relative deviation)"""
    tol = Config.MATCH_TOL if tol is None else tol
    target = np.array([tau(lam) for lam in table.lambda_samples])
    scale = np.maximum(1.0, np.abs(table.eigenvalues))
    deviation = (np.abs(table.eigenvalues - target[None, :]) / scale).max(axis=1)
    order = np.argsort(deviation)
    best = int(order[0])
    if deviation[best] > tol:
        raise VerificationFailure(f"no oracle branch within {tol:.0e} (best {deviation[best]:.2e})",
                                  {'best_branch': best, 'deviation': float(deviation[best])})
    if len(order) > 1 and deviation[order[1]] < tol:
        raise AmbiguousMatch(f"branches {best} and {int(order[1])} both match within {tol:.0e}")
    return best, float(deviation[best])


def _fit_points(count: int) -> List[complex]:
    """Deterministic generic points for least-squares TQ fits"""
    k = np.arange(1, count + 1)
    return list(0.11 * k / count + 0.6 * np.exp(2j * np.pi * k * 0.618) * np.sqrt(k / count))


@dataclass
class QFit:
    coefficients: np.ndarray         # in s = sinh²λ, lowest degree first
    residual: float
    inhomogeneous: bool
    q: Optional[QPolynomial] = None

    def __call__(self, lam):
        s = np.sinh(lam) ** 2
        return np.polynomial.polynomial.polyval(s, self.coefficients)


def fit_q_polynomial(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                     tau: Callable[[complex], complex], degree: int,
                     inhomogeneous: bool = False) -> QFit:
    """
    Least-squares Q solving the TQ relation for a given eigenvalue function τ.

    Homogeneous fits are monic of degree ``degree``; inhomogeneous fits have
    degree N and their normalization is fixed by the inhomogeneous term.
    """
    eta = config.eta
    n_coef = degree + 1
    points = _fit_points(3 * n_coef + 6)
    rows, rhs = [], []
    for lam in points:
        t = tau(lam)
        a_p, a_m = A_eps(config, boundary, eps, lam), A_eps(config, boundary, eps, -lam)
        s0, s_minus, s_plus = np.sinh(lam) ** 2, np.sinh(lam - eta) ** 2, np.sinh(lam + eta) ** 2
        row = np.array([t * s0 ** k - a_p * s_minus ** k - a_m * s_plus ** k for k in range(n_coef)])
        target = inhomogeneous_term(config, boundary, eps, lam) if inhomogeneous else 0j
        scale = max(np.abs(row).max(), abs(target), 1e-300)
        rows.append(row / scale)
        rhs.append(target / scale)
    rows, rhs = np.array(rows), np.array(rhs)

    if inhomogeneous:
        coef, *_ = scipy.linalg.lstsq(rows, rhs)
    else:
        sub, *_ = scipy.linalg.lstsq(rows[:, :-1], -rows[:, -1]) if degree > 0 else (np.zeros(0),)
        coef = np.concatenate([sub, [1.0]])
    coef = np.asarray(coef, dtype=complex)

    fit = QFit(coefficients=coef, residual=np.inf, inhomogeneous=inhomogeneous)
    check_points = [z * (1.07 + 0.05j) + 0.03 for z in _fit_points(7)]
    if inhomogeneous:
        fit.residual = tq_residual_inhom(config, boundary, eps, fit, tau, check_points)
    else:
        try:
            fit.q = QPolynomial.from_s_coefficients(coef[::-1])
        except Exception as e:
            logger.debug(f"fitted polynomial has no admissible roots: {e}")
        fit.residual = tq_residual_hom(config, boundary, eps, fit, tau, check_points)
    return fit


def seed_roots_from_oracle(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                           M: int, table: SpectrumTable, tol: float = 1e-6) -> List[Tuple[int, QPolynomial]]:
    """Branches of the table satisfying the homogeneous TQ relation in sector M, with their roots"""
    found = []
    for k in range(table.branches):
        fit = fit_q_polynomial(config, boundary, eps, table.tau(k), M)
        if fit.residual < tol and fit.q is not None:
            found.append((k, fit.q))
    logger.info(f"sector M={M}: {len(found)} branches satisfy the homogeneous TQ relation")
    return found


@dataclass
class CompletenessReport:
    total: int
    covered: List[int]
    sector_branches: Dict[str, List[int]]
    missing: List[int]

    @property
    def complete(self) -> bool:
        return not self.missing

    def to_dict(self) -> Dict[str, Any]:
        return {'total': self.total, 'covered': len(self.covered), 'missing': self.missing,
                'sectors': self.sector_branches, 'complete': self.complete}


def completeness_audit(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice, M: int,
                       table: SpectrumTable, tol: float = 1e-7) -> CompletenessReport:
    """Which branches are reached by the sectors (M, ε) and (N−1−M, −ε)"""
    sectors = {f"M={M}": (M, eps), f"M={config.N - 1 - M}(-eps)": (config.N - 1 - M, eps.negated())}
    hits: Dict[str, List[int]] = {}
    for label, (degree, signs) in sectors.items():
        hits[label] = []
        if degree < 0:
            continue
        for k in range(table.branches):
            if fit_q_polynomial(config, boundary, signs, table.tau(k), degree).residual < tol:
                hits[label].append(k)
    covered = sorted(set().union(*hits.values()))
    missing = [k for k in range(table.branches) if k not in covered]
    if missing:
        logger.warning(f"completeness audit: {len(missing)} of {table.branches} branches uncovered")
    return CompletenessReport(total=table.branches, covered=covered, sector_branches=hits, missing=missing)


@dataclass
class GroundState:
    energy: float
    vector: np.ndarray
    left: np.ndarray
    hermitian: bool
    transfer_energy: complex
    extrapolation_increment: float
    samples: List[complex]
    tau_samples: np.ndarray
    sector: Optional[int] = None
    solution: Optional[BetheSolution] = None
    match_deviation: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'energy': self.energy,
            'hermitian': self.hermitian,
            'transfer_energy': [self.transfer_energy.real, self.transfer_energy.imag],
            'extrapolation_increment': self.extrapolation_increment,
            'sector': self.sector,
            'match_deviation': self.match_deviation,
        }


def ground_branch(config: ChainConfig, boundary: BoundaryParams, solutions: Sequence[BetheSolution] = (),
                  samples: Sequence[complex] = DEFAULT_SAMPLES, allow_non_hermitian: bool = False,
                  tol: float = 1e-6) -> GroundState:
    """
    Ground state of the homogeneous chain of length config.N.

    The lowest level of the homogeneous-extrapolated transfer Hamiltonian must
    agree with the lowest level of the Hamiltonian (both taken traceless). The
    state's transfer eigenvalue is sampled on ``samples`` and compared with the
    given Bethe solutions, whose sector is reported for the best match.
    """
    N, eta = config.N, config.eta
    chain = ChainConfig.homogeneous(N, eta)
    H = hamiltonian(chain, boundary)
    hermitian = bool(np.allclose(H, H.conj().T, atol=1e-12))
    if not hermitian:
        if not allow_non_hermitian:
            raise NonHermitianRegime("Hamiltonian is not Hermitian; ordering by real part is heuristic")
        logger.warning("non-Hermitian Hamiltonian: ground state chosen by smallest real part")

    if hermitian:
        w, V = np.linalg.eigh(H)
        U = V.conj().T
    else:
        w, V, U = eig_dense(H)
    k = int(np.argmin(w.real))
    Ht, increment = homogeneous_transfer_hamiltonian(N, eta, boundary)
    w_t = np.linalg.eigvals(Ht)
    dim = H.shape[0]
    shifted_t = w_t - np.trace(Ht) / dim
    lowest_t = shifted_t[int(np.argmin(shifted_t.real))]
    lowest = w[k] - np.trace(H) / dim
    deviation = float(abs(lowest_t - lowest)) / max(1.0, float(abs(w[k])))
    if deviation > tol:
        raise VerificationFailure(
            f"transfer-derived ground level differs from the Hamiltonian one by {deviation:.2e}",
            {'deviation': deviation, 'extrapolation_increment': increment})

    right, left = V[:, k], U[k]
    taus = np.array([left @ apply_transfer(chain, boundary, lam, right) for lam in samples])
    state = GroundState(energy=float(w[k].real), vector=right, left=left, hermitian=hermitian,
                        transfer_energy=complex(lowest_t + np.trace(Ht) / dim),
                        extrapolation_increment=increment, samples=[complex(z) for z in samples],
                        tau_samples=taus)

    return match_ground_state(state, chain, boundary, solutions)


def match_ground_state(state: GroundState, config: ChainConfig, boundary: BoundaryParams,
                       solutions: Sequence[BetheSolution]) -> GroundState:
    """Record the Bethe solution whose eigenvalue reproduces the sampled τ of the ground state"""
    scale = np.maximum(1.0, np.abs(state.tau_samples))
    for solution in solutions:
        target = np.array([eigenvalue_from_q(config, boundary, solution.eps, solution.q, lam)
                           for lam in state.samples])
        gap = float((np.abs(target - state.tau_samples) / scale).max())
        if gap < Config.MATCH_TOL and (state.match_deviation is None or gap < state.match_deviation):
            state.sector, state.solution, state.match_deviation = solution.M, solution, gap
    if solutions and state.sector is None:
        logger.warning(f"ground state matches none of the {len(solutions)} Bethe solutions given")
    return state
