"""
Constrained spectrum of the open chain: constraint bookkeeping, the
functions a, d, 𝐚_ε and 𝐀_ε, Q-polynomials, TQ residuals and the Bethe solver.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import (ConfigError, ConstraintViolated, DivisionNearZero, NoConvergence,
                    RootCollision, SingularBoundary, SingularJacobian, SingularKinematics)
from lattice_operators import BoundaryParams, ChainConfig
from numerics import distance_mod_ipi, newton_multidim, principal_mod_2ipi

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsilonChoice:
    """Sign tuple (ε_{φ+}, ε_{φ−}, ε_{ψ+}, ε_{ψ−}) with product +1"""
    e_phi_p: int = 1
    e_phi_m: int = 1
    e_psi_p: int = 1
    e_psi_m: int = 1

    def __post_init__(self):
        signs = (self.e_phi_p, self.e_phi_m, self.e_psi_p, self.e_psi_m)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"epsilon entries must be ±1, got {signs}")
        if np.prod(signs) != 1:
            raise ValueError(f"product of epsilon signs must be +1, got {signs}")

    def negated(self) -> 'EpsilonChoice':
        return EpsilonChoice(-self.e_phi_p, -self.e_phi_m, -self.e_psi_p, -self.e_psi_m)

    @property
    def eps_plus(self) -> int:
        return self.e_phi_p

    @property
    def eps_minus(self) -> int:
        return self.e_phi_m

    def as_list(self) -> List[int]:
        return [self.e_phi_p, self.e_phi_m, self.e_psi_p, self.e_psi_m]


def derive_phi_psi(varsigma: complex, kappa: complex) -> Tuple[complex, complex]:
    """(φ, ψ) with sinh φ cosh ψ = sinh ς/(2κ) and cosh φ sinh ψ = cosh ς/(2κ)"""
    if kappa == 0:
        raise SingularBoundary("κ = 0: (φ, ψ) are undefined for a diagonal boundary")
    u = np.sinh(varsigma) / (2 * kappa)
    v = np.cosh(varsigma) / (2 * kappa)
    plus, minus = np.arcsinh(complex(u + v)), np.arcsinh(complex(u - v))
    return 0.5 * (plus + minus), 0.5 * (plus - minus)


def a_d(config: ChainConfig, lam: complex) -> Tuple[complex, complex]:
    """a(λ) = ∏ sinh(λ−ξ_n+η/2), d(λ) = ∏ sinh(λ−ξ_n−η/2)"""
    xi = np.asarray(config.xi)
    eta = config.eta
    return (complex(np.prod(np.sinh(lam - xi + eta / 2))),
            complex(np.prod(np.sinh(lam - xi - eta / 2))))


def a_eps_plus(boundary: BoundaryParams, sign: int, lam: complex, eta: complex) -> complex:
    """Single-boundary factor sinh(λ−η/2+εφ₊) cosh(λ−η/2+εψ₊) / (sinh εφ₊ cosh εψ₊)"""
    phi, psi = boundary.phi_psi('+')
    u = lam - eta / 2
    return (np.sinh(u + sign * phi) * np.cosh(u + sign * psi)
            / (np.sinh(sign * phi) * np.cosh(sign * psi)))


def a_eps(boundary: BoundaryParams, eps: EpsilonChoice, lam: complex, eta: complex) -> complex:
    """𝐚_ε(λ), product of the two boundary factors"""
    phi_p, psi_p = boundary.phi_psi('+')
    phi_m, psi_m = boundary.phi_psi('-')
    u = lam - eta / 2
    plus = (np.sinh(u + eps.e_phi_p * phi_p) * np.cosh(u + eps.e_psi_p * psi_p)
            / (np.sinh(eps.e_phi_p * phi_p) * np.cosh(eps.e_psi_p * psi_p)))
    minus = (np.sinh(u + eps.e_phi_m * phi_m) * np.cosh(u - eps.e_psi_m * psi_m)
             / (np.sinh(eps.e_phi_m * phi_m) * np.cosh(eps.e_psi_m * psi_m)))
    return complex(plus * minus)


def log_a_eps_derivative(boundary: BoundaryParams, eps: EpsilonChoice, lam: complex,
                         eta: complex) -> complex:
    """d/dλ log 𝐚_ε(λ)"""
    phi_p, psi_p = boundary.phi_psi('+')
    phi_m, psi_m = boundary.phi_psi('-')
    u = lam - eta / 2
    return complex(1 / np.tanh(u + eps.e_phi_p * phi_p) + np.tanh(u + eps.e_psi_p * psi_p)
                   + 1 / np.tanh(u + eps.e_phi_m * phi_m) + np.tanh(u - eps.e_psi_m * psi_m))


def A_eps(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice, lam: complex) -> complex:
    """𝐀_ε(λ) = (−1)^N sinh(2λ+η)/sinh 2λ · 𝐚_ε(λ) a(λ) d(−λ)"""
    eta = config.eta
    s2 = np.sinh(2 * lam)
    if abs(s2) < Config.POLE_TOL:
        raise SingularKinematics(f"sinh 2λ vanishes at λ = {lam}")
    a, _ = a_d(config, lam)
    _, d_minus = a_d(config, -lam)
    return complex((-1) ** config.N * np.sinh(2 * lam + eta) / s2
                   * a_eps(boundary, eps, lam, eta) * a * d_minus)


def log_A_eps_derivative(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                         lam: complex) -> complex:
    """d/dλ log 𝐀_ε(λ)"""
    eta = config.eta
    xi = np.asarray(config.xi)
    return complex(2 / np.tanh(2 * lam + eta) - 2 / np.tanh(2 * lam)
                   + log_a_eps_derivative(boundary, eps, lam, eta)
                   + np.sum(1 / np.tanh(lam - xi + eta / 2))
                   + np.sum(1 / np.tanh(lam + xi + eta / 2)))


def _constraint_argument(boundary: BoundaryParams, eps: EpsilonChoice) -> complex:
    """Argument of the cosh form, all four signs"""
    phi_p, psi_p = boundary.phi_psi('+')
    phi_m, psi_m = boundary.phi_psi('-')
    return (eps.e_phi_p * phi_p + eps.e_phi_m * phi_m
            + eps.e_psi_p * psi_p - eps.e_psi_m * psi_m)


def _linear_argument(boundary: BoundaryParams, eps: EpsilonChoice) -> complex:
    """ε_{φ+}(φ₊+ψ₊) + ε_{φ−}(φ₋−ψ₋); only the φ-signs enter the linear form"""
    phi_p, psi_p = boundary.phi_psi('+')
    phi_m, psi_m = boundary.phi_psi('-')
    return eps.e_phi_p * (phi_p + psi_p) + eps.e_phi_m * (phi_m - psi_m)


def f_eps_r(boundary: BoundaryParams, eps: EpsilonChoice, N: int, r: int, eta: complex) -> complex:
    """f_ε^{(r)}, vanishing exactly when the cosh form of the constraint holds in sector r"""
    prefactor = (2 * boundary.kappa_p * boundary.kappa_m
                 / (np.sinh(boundary.varsigma_p) * np.sinh(boundary.varsigma_m)))
    if prefactor == 0:
        return 0j
    return complex(prefactor * _constraint_bracket(boundary, eps, N, r, eta))


def _constraint_bracket(boundary: BoundaryParams, eps: EpsilonChoice, N: int, r: int,
                        eta: complex) -> complex:
    X = _constraint_argument(boundary, eps)
    return complex(np.cosh(boundary.tau_p - boundary.tau_m)
                   - eps.e_phi_p * eps.e_phi_m * np.cosh(X + (N - 1 - 2 * r) * eta))


def constraint_target(boundary: BoundaryParams, eps: EpsilonChoice, N: int, M: int,
                      eta: complex) -> complex:
    """τ₊ − τ₋ (mod 2iπ) prescribed by the linear form of the constraint"""
    X = _linear_argument(boundary, eps)
    return complex(-X - (N - 1 - 2 * M) * eta
                   + (1 - eps.e_phi_p * eps.e_phi_m) / 2 * 1j * np.pi)


def tune_tau_plus(boundary: BoundaryParams, eps: EpsilonChoice, N: int, M: int,
                  eta: complex) -> BoundaryParams:
    """Solve the linear form of the constraint for τ₊, all other parameters fixed"""
    target = constraint_target(boundary, eps, N, M, eta)
    return boundary.with_tau_p(principal_mod_2ipi(boundary.tau_m + target))


@dataclass
class ConstraintReport:
    holds: bool
    residual: float
    tq_holds: bool
    tq_residual: float
    companion_sector: int
    companion_eps: EpsilonChoice
    companion_holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'holds': self.holds,
            'residual': self.residual,
            'tq_holds': self.tq_holds,
            'tq_residual': self.tq_residual,
            'companion_sector': self.companion_sector,
            'companion_eps': self.companion_eps.as_list(),
            'companion_holds': self.companion_holds,
        }


def check_constraint(boundary: BoundaryParams, eps: EpsilonChoice, N: int, M: int,
                     eta: complex, tol: float = 1e-10) -> ConstraintReport:
    """
    Constraint test for sector M.

    ``holds`` is the linear form τ₊ − τ₋ = −ε_{φ+}(φ₊+ψ₊) − ε_{φ−}(φ₋−ψ₋)
    − (N−1−2M)η + (1−ε_{φ+}ε_{φ−})iπ/2 mod 2iπ, which the gauge and
    matrix-element layers need. ``tq_holds`` is the cosh form with all four
    signs, which the homogeneous TQ equation of 𝐀_ε needs; the two coincide
    when ε_{ψ±} = ε_{φ±}. The companion (N−1−M, −ε) is tested on the cosh form.
    """
    gap = boundary.tau_p - boundary.tau_m - constraint_target(boundary, eps, N, M, eta)
    residual = abs(principal_mod_2ipi(gap))
    scale = max(1.0, abs(np.cosh(boundary.tau_p - boundary.tau_m)))
    tq_residual = abs(_constraint_bracket(boundary, eps, N, M, eta)) / scale
    companion = (N - 1 - M, eps.negated())
    companion_residual = abs(_constraint_bracket(boundary, companion[1], N, companion[0], eta)) / scale
    return ConstraintReport(
        holds=residual < tol,
        residual=float(residual),
        tq_holds=tq_residual < tol,
        tq_residual=float(tq_residual),
        companion_sector=companion[0],
        companion_eps=companion[1],
        companion_holds=companion_residual < tol,
    )


def canonical_root(lam: complex) -> complex:
    """Representative of λ modulo λ → −λ, λ → λ + iπ with Re ≥ 0, Im ∈ (−π/2, π/2]"""
    def fold(z):
        im = (z.imag + np.pi / 2) % np.pi - np.pi / 2
        if np.isclose(im, -np.pi / 2):
            im = np.pi / 2
        return complex(z.real, im)

    z = fold(complex(lam))
    if z.real < 0 or (z.real == 0 and z.imag < 0):
        z = fold(-z)
    return z


@dataclass(frozen=True)
class QPolynomial:
    """Q(λ) = ∏_j (sinh²λ − sinh²λ_j)"""
    roots: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, 'roots', tuple(complex(r) for r in self.roots))
        s = [np.sinh(r) ** 2 for r in self.roots]
        for i in range(len(s)):
            for j in range(i + 1, len(s)):
                if abs(s[i] - s[j]) < 1e-10:
                    raise RootCollision(f"roots {i + 1} and {j + 1} coincide in sinh²")

    @property
    def M(self) -> int:
        return len(self.roots)

    def __call__(self, lam) -> complex:
        s = np.sinh(lam) ** 2
        out = np.ones_like(np.asarray(s, dtype=complex))
        for r in self.roots:
            out = out * (s - np.sinh(r) ** 2)
        return out if np.ndim(out) else complex(out)

    def log_derivative(self, lam: complex) -> complex:
        r = np.asarray(self.roots)
        return complex(np.sum(1 / np.tanh(lam - r) + 1 / np.tanh(lam + r)))

    def s_coefficients(self) -> np.ndarray:
        """Coefficients in s = sinh²λ, highest degree first (monic)"""
        return np.poly([np.sinh(r) ** 2 for r in self.roots]) if self.roots else np.ones(1)

    @classmethod
    def from_s_coefficients(cls, coeffs: Sequence[complex]) -> 'QPolynomial':
        s_roots = np.roots(np.asarray(coeffs, dtype=complex))
        return cls(tuple(canonical_root(np.arcsinh(np.sqrt(complex(s)))) for s in s_roots))

    def lattice_violations(self, config: ChainConfig, tol: float = 1e-10) -> List[str]:
        issues = []
        for j, r in enumerate(self.roots, start=1):
            for n in range(1, config.N + 1):
                for h in (0, 1):
                    if abs(np.cosh(2 * r) - np.cosh(2 * config.xi_shift(n, h))) < tol:
                        issues.append(f"λ_{j} sits on ξ_{n}^({h})")
        return issues


def tq_residual_hom(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                    q: QPolynomial, tau: Callable[[complex], complex],
                    lambdas: Sequence[complex]) -> float:
    """max_λ |τQ − 𝐀_ε(λ)Q(λ−η) − 𝐀_ε(−λ)Q(λ+η)| relative to the largest term"""
    eta = config.eta
    worst = 0.0
    for lam in lambdas:
        terms = (tau(lam) * q(lam),
                 A_eps(config, boundary, eps, lam) * q(lam - eta),
                 A_eps(config, boundary, eps, -lam) * q(lam + eta))
        scale = max(abs(t) for t in terms) or 1.0
        worst = max(worst, abs(terms[0] - terms[1] - terms[2]) / scale)
    return float(worst)


def inhomogeneous_term(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                       lam: complex) -> complex:
    """f_ε^{(N)} a(λ)a(−λ)d(λ)d(−λ)(cosh²2λ − cosh²η)"""
    eta = config.eta
    a, d = a_d(config, lam)
    a_m, d_m = a_d(config, -lam)
    f = f_eps_r(boundary, eps, config.N, config.N, eta)
    return complex(f * a * a_m * d * d_m * (np.cosh(2 * lam) ** 2 - np.cosh(eta) ** 2))


def tq_residual_inhom(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                      q: QPolynomial, tau: Callable[[complex], complex],
                      lambdas: Sequence[complex]) -> float:
    eta = config.eta
    worst = 0.0
    for lam in lambdas:
        terms = (tau(lam) * q(lam),
                 A_eps(config, boundary, eps, lam) * q(lam - eta),
                 A_eps(config, boundary, eps, -lam) * q(lam + eta),
                 inhomogeneous_term(config, boundary, eps, lam))
        scale = max(abs(t) for t in terms) or 1.0
        worst = max(worst, abs(terms[0] - terms[1] - terms[2] - terms[3]) / scale)
    return float(worst)


def discrete_tq_check(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                      q: QPolynomial, tau: Callable[[complex], complex]) -> float:
    """Largest violation of Q(ξ^{(1)})/Q(ξ^{(0)}) = τ(ξ^{(0)})/𝐀_ε(ξ^{(0)}) = 𝐀_ε(−ξ^{(1)})/τ(ξ^{(1)})"""
    worst = 0.0
    for n in range(1, config.N + 1):
        x0, x1 = config.xi_shift(n, 0), config.xi_shift(n, 1)
        q0 = q(x0)
        if abs(q0) < 1e-12:
            raise DivisionNearZero(f"Q(ξ_{n}^(0)) vanishes")
        ratio = q(x1) / q0
        first = tau(x0) / A_eps(config, boundary, eps, x0)
        second = A_eps(config, boundary, eps, -x1) / tau(x1)
        scale = max(abs(ratio), 1e-300)
        worst = max(worst, abs(ratio - first) / scale, abs(ratio - second) / scale)
    return float(worst)


def eigenvalue_from_q(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                      q: QPolynomial, lam: complex) -> complex:
    """τ(λ) = [𝐀_ε(λ)Q(λ−η) + 𝐀_ε(−λ)Q(λ+η)] / Q(λ)"""
    eta = config.eta
    q_lam = q(lam)
    if abs(q_lam) < 1e-12:
        raise DivisionNearZero(f"Q vanishes at λ = {lam}")
    return complex((A_eps(config, boundary, eps, lam) * q(lam - eta)
                    + A_eps(config, boundary, eps, -lam) * q(lam + eta)) / q_lam)


def bethe_residual(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                   roots: Sequence[complex]) -> np.ndarray:
    """Normalized 𝐀_ε(λ_j)Q(λ_j−η) + 𝐀_ε(−λ_j)Q(λ_j+η) at each root"""
    q = QPolynomial(tuple(roots))
    eta = config.eta
    out = []
    for lam in q.roots:
        left = A_eps(config, boundary, eps, lam) * q(lam - eta)
        right = A_eps(config, boundary, eps, -lam) * q(lam + eta)
        out.append((left + right) / max(abs(left) + abs(right), 1e-300))
    return np.array(out, dtype=complex)


def bethe_product(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                  roots: Sequence[complex]) -> np.ndarray:
    """Left-hand sides of the product form of the Bethe equations (equal to 1 at solutions)"""
    eta = config.eta
    roots = np.asarray(roots, dtype=complex)
    out = []
    for j, lam in enumerate(roots):
        a_p, d_p = a_d(config, lam)
        a_m, d_m = a_d(config, -lam)
        value = (a_m * d_p / (a_p * d_m)
                 * a_eps(boundary, eps, -lam, eta) / a_eps(boundary, eps, lam, eta))
        others = np.delete(roots, j)
        value *= np.prod(np.sinh(lam - others + eta) * np.sinh(lam + others + eta)
                         / (np.sinh(lam - others - eta) * np.sinh(lam + others - eta)))
        out.append(value)
    return np.array(out, dtype=complex)


def bethe_log_residual(config, boundary, eps, roots) -> np.ndarray:
    return np.log(bethe_product(config, boundary, eps, roots))


def bethe_log_jacobian(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice,
                       roots: Sequence[complex]) -> np.ndarray:
    """Analytic jacobian of the logarithmic Bethe equations"""
    eta = config.eta
    xi = np.asarray(config.xi)
    roots = np.asarray(roots, dtype=complex)
    M = len(roots)
    J = np.zeros((M, M), dtype=complex)

    def coth(z):
        return 1 / np.tanh(z)

    for j, lam in enumerate(roots):
        diag = np.sum(-coth(-lam - xi + eta / 2) + coth(lam - xi - eta / 2)
                      - coth(lam - xi + eta / 2) + coth(-lam - xi - eta / 2))
        diag += (-log_a_eps_derivative(boundary, eps, -lam, eta)
                 - log_a_eps_derivative(boundary, eps, lam, eta))
        for k, mu in enumerate(roots):
            if k == j:
                continue
            diag += (coth(lam - mu + eta) + coth(lam + mu + eta)
                     - coth(lam - mu - eta) - coth(lam + mu - eta))
            J[j, k] = (-coth(lam - mu + eta) + coth(lam + mu + eta)
                       + coth(lam - mu - eta) - coth(lam + mu - eta))
        J[j, j] = diag
    return J


@dataclass
class BetheSolution:
    q: QPolynomial
    M: int
    eps: EpsilonChoice
    gauge: Optional[Any] = None
    residual_inf: float = 0.0
    product_residual: float = 0.0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def roots(self) -> Tuple[complex, ...]:
        return self.q.roots

    def to_dict(self) -> Dict[str, Any]:
        out = {
            'M': self.M,
            'eps': self.eps.as_list(),
            'roots': [[r.real, r.imag] for r in self.roots],
            'residual_inf': self.residual_inf,
            'product_residual': self.product_residual,
        }
        if self.gauge is not None:
            out['gauge'] = self.gauge.to_dict()
        out.update(self.diagnostics)
        return out


def boundary_root_candidates(boundary: BoundaryParams, eps: EpsilonChoice, eta: complex) -> List[complex]:
    """λ̌_{σ,1} = η/2 − ε_{φσ}φ_σ, λ̌_{σ,2} = η/2 − σε_{φσ}ψ_σ + iπ/2, for σ = +, −"""
    out = []
    for sigma, side, e in ((1, '+', eps.e_phi_p), (-1, '-', eps.e_phi_m)):
        phi, psi = boundary.phi_psi(side)
        out.append(eta / 2 - e * phi)
        out.append(eta / 2 - sigma * e * psi + 1j * np.pi / 2)
    return [complex(z) for z in out]


def bethe_seeds(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice, M: int) -> List[np.ndarray]:
    """Diagonal-style spread of real roots, then variants with a boundary-root candidate"""
    if M == 0:
        return [np.zeros(0, dtype=complex)]
    spread = np.array([(j + 0.5) / M * 0.9 for j in range(M)], dtype=complex)
    tilted = spread + 0.05j
    seeds = [spread, tilted]
    for root in boundary_root_candidates(boundary, eps, config.eta):
        seed = tilted.copy()
        seed[-1] = canonical_root(root) + 1e-3
        seeds.append(seed)
    return seeds


def bethe_solve(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice, M: int,
                seed_roots: Optional[Sequence[complex]] = None, tol: float = None) -> BetheSolution:
    """Solve the Bethe equations of sector M from the given seed (or built-in seeds)"""
    tol = Config.TOL if tol is None else tol
    eta = config.eta
    report = check_constraint(boundary, eps, config.N, M, eta)
    if not report.tq_holds:
        raise ConstraintViolated(f"constraint fails for sector M={M}, eps={eps.as_list()}",
                                 report.to_dict())

    seeds = [np.asarray(seed_roots, dtype=complex)] if seed_roots is not None \
        else bethe_seeds(config, boundary, eps, M)
    last_error = None
    for seed in seeds:
        if len(seed) != M:
            raise ConfigError(f"seed has {len(seed)} roots, sector needs {M}")
        if M == 0:
            roots = seed
        else:
            try:
                roots = newton_multidim(
                    lambda x: bethe_log_residual(config, boundary, eps, x),
                    lambda x: bethe_log_jacobian(config, boundary, eps, x),
                    seed, tol=tol * 1e-2)
            except (NoConvergence, SingularJacobian, RootCollision, FloatingPointError) as e:
                last_error = e
                logger.debug(f"seed {np.round(seed, 4)} failed: {e}")
                continue
        roots = tuple(sorted((canonical_root(r) for r in roots), key=lambda z: (z.real, z.imag)))
        try:
            q = QPolynomial(roots)
        except RootCollision as e:
            last_error = e
            continue
        issues = q.lattice_violations(config)
        if issues:
            last_error = RootCollision("; ".join(issues))
            continue
        residual = float(np.max(np.abs(bethe_residual(config, boundary, eps, roots)), initial=0.0))
        product = float(np.max(np.abs(bethe_product(config, boundary, eps, roots) - 1), initial=0.0))
        if residual > tol:
            last_error = NoConvergence(f"polished roots keep residual {residual:.2e}")
            continue
        logger.info(f"Bethe solution M={M}: residual {residual:.2e}")
        return BetheSolution(q=q, M=M, eps=eps, residual_inf=residual, product_residual=product,
                             diagnostics={'constraint': report.to_dict()})

    if isinstance(last_error, RootCollision):
        raise last_error
    raise NoConvergence(f"no seed converged for sector M={M}: {last_error}",
                        diagnostics={'seeds_tried': len(seeds)})


def bethe_solve_all(config: ChainConfig, boundary: BoundaryParams, eps: EpsilonChoice, M: int,
                    seeds: Optional[Sequence[Sequence[complex]]] = None,
                    tol: float = None) -> List[BetheSolution]:
    """
    Distinct Bethe solutions reached from every seed (built-in seeds by default).

    Solutions are identified through their Q-polynomial; seeds that fail are
    skipped and logged.
    """
    seeds = bethe_seeds(config, boundary, eps, M) if seeds is None else seeds
    found: List[BetheSolution] = []
    for seed in seeds:
        try:
            solution = bethe_solve(config, boundary, eps, M, seed_roots=seed, tol=tol)
        except (NoConvergence, RootCollision, SingularJacobian) as e:
            logger.debug(f"seed {np.round(np.asarray(seed), 4)} dropped: {e}")
            continue
        key = np.sort_complex(np.sinh(np.asarray(solution.roots)) ** 2)
        if any(np.allclose(key, np.sort_complex(np.sinh(np.asarray(s.roots)) ** 2), atol=1e-8)
               for s in found):
            continue
        found.append(solution)
    logger.info(f"sector M={M}: {len(found)} distinct Bethe solutions from {len(seeds)} seeds")
    return found
