"""
Lattice operators of the open XXZ chain.

R and K matrices, bulk and boundary monodromies, the transfer matrix and the
Hamiltonian. Site 1 is the most significant tensor factor of the 2^N space;
the auxiliary space is the leading axis (length 2) of a state tensor.
Operators are applied matrix-free on (2, 2^N, batch) tensors and densified
only on request.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import ConfigError, SingularBoundary
from numerics import distance_mod_ipi, richardson

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PERMUTATION = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class ChainConfig:
    """Chain length, anisotropy η (Δ = cosh η) and inhomogeneities ξ_n"""
    N: int
    eta: complex
    xi: Tuple[complex, ...]
    require_generic: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'eta', complex(self.eta))
        object.__setattr__(self, 'xi', tuple(complex(x) for x in self.xi))
        if self.N < 1:
            raise ConfigError(f"chain needs N >= 1, got {self.N}")
        if len(self.xi) != self.N:
            raise ConfigError(f"expected {self.N} inhomogeneities, got {len(self.xi)}")
        if self.require_generic:
            bad = self.genericity_violations()
            if bad:
                raise ConfigError("inhomogeneities are not generic: " + "; ".join(bad[:3]))

    @classmethod
    def generic(cls, N: int, eta: complex, scale: float = 1.0) -> 'ChainConfig':
        """Deterministic generic recipe ξ_n = scale·n·(0.13 + 0.071i), kept inside |Im| < π/4"""
        xi = [scale * n * (0.13 + 0.071j) for n in range(1, N + 1)]
        top = max(abs(x.imag) for x in xi)
        if top >= np.pi / 4:
            shrink = 0.9 * (np.pi / 4) / top
            xi = [complex(x.real, x.imag * shrink) for x in xi]
        return cls(N, eta, tuple(xi))

    @classmethod
    def homogeneous(cls, N: int, eta: complex) -> 'ChainConfig':
        return cls(N, eta, tuple([0j] * N), require_generic=False)

    @classmethod
    def ramp(cls, N: int, eta: complex, delta: float) -> 'ChainConfig':
        """ξ_n = n·δ, the sequence used to approach the homogeneous chain"""
        return cls(N, eta, tuple(n * delta for n in range(1, N + 1)), require_generic=False)

    @property
    def dim(self) -> int:
        return 2 ** self.N

    def xi_shift(self, n: int, h: int) -> complex:
        """ξ_n^{(h)} = ξ_n + η/2 − hη (n is 1-based)"""
        return self.xi[n - 1] + self.eta / 2 - h * self.eta

    def genericity_violations(self, tol: float = None) -> List[str]:
        tol = Config.GENERIC_TOL if tol is None else tol
        forbidden = (0j, self.eta, -self.eta)
        issues = []

        def check(value, label):
            for f in forbidden:
                if distance_mod_ipi(value - f) < tol:
                    issues.append(f"{label} = {value:.4g} hits {f:.4g} mod iπ")

        for j, xj in enumerate(self.xi, start=1):
            check(xj, f"ξ_{j}")
            check(2 * xj, f"2ξ_{j}")
            for k in range(j + 1, self.N + 1):
                xk = self.xi[k - 1]
                check(xj - xk, f"ξ_{j}-ξ_{k}")
                check(xj + xk, f"ξ_{j}+ξ_{k}")
        return issues


@dataclass(frozen=True)
class BoundaryParams:
    """Boundary parameters (ς±, κ±, τ±); (φ±, ψ±) are derived on demand"""
    varsigma_p: complex
    kappa_p: complex
    tau_p: complex
    varsigma_m: complex
    kappa_m: complex
    tau_m: complex

    def __post_init__(self):
        for name in ('varsigma_p', 'kappa_p', 'tau_p', 'varsigma_m', 'kappa_m', 'tau_m'):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_phi_psi(cls, plus: Tuple[complex, complex, complex],
                     minus: Tuple[complex, complex, complex]) -> 'BoundaryParams':
        """
        Boundary with prescribed (φ, ψ, τ) on each side.

        Inverse of the (ς, κ) → (φ, ψ) map while |Im(φ ± ψ)| < π/2.
        """
        values = {}
        for side, (phi, psi, tau) in (('p', plus), ('m', minus)):
            s_plus, s_minus = np.sinh(phi + psi), np.sinh(phi - psi)
            if abs(s_plus) < Config.POLE_TOL or abs(s_minus) < Config.POLE_TOL:
                raise SingularBoundary(f"sinh(φ ± ψ) vanishes on side {side}")
            varsigma = 0.5 * np.log(complex(-s_plus / s_minus))
            values[f'varsigma_{side}'] = varsigma
            values[f'kappa_{side}'] = np.exp(varsigma) / (2 * s_plus)
            values[f'tau_{side}'] = tau
        return cls(**values)

    def with_tau_p(self, tau_p: complex) -> 'BoundaryParams':
        return replace(self, tau_p=complex(tau_p))

    def params(self, side: str) -> Tuple[complex, complex, complex]:
        if side == '+':
            return self.varsigma_p, self.kappa_p, self.tau_p
        if side == '-':
            return self.varsigma_m, self.kappa_m, self.tau_m
        raise ValueError(f"side must be '+' or '-', got {side!r}")

    def phi_psi(self, side: str) -> Tuple[complex, complex]:
        from spectrum import derive_phi_psi
        varsigma, kappa, _ = self.params(side)
        return derive_phi_psi(varsigma, kappa)

    @property
    def phi_p(self) -> complex:
        return self.phi_psi('+')[0]

    @property
    def psi_p(self) -> complex:
        return self.phi_psi('+')[1]

    @property
    def phi_m(self) -> complex:
        return self.phi_psi('-')[0]

    @property
    def psi_m(self) -> complex:
        return self.phi_psi('-')[1]

    @property
    def is_diagonal(self) -> bool:
        return self.kappa_p == 0 and self.kappa_m == 0

    def fields(self, eta: complex) -> Dict[str, np.ndarray]:
        """Field vectors (h^x, h^y, h^z) on site 1 ('-') and site N ('+')"""
        out = {}
        for side in ('+', '-'):
            varsigma, kappa, tau = self.params(side)
            if abs(np.sinh(varsigma)) < Config.POLE_TOL:
                raise SingularBoundary(f"sinh ς{side} vanishes")
            out[side] = np.array([
                2 * kappa * np.sinh(eta) * np.cosh(tau) / np.sinh(varsigma),
                2j * kappa * np.sinh(eta) * np.sinh(tau) / np.sinh(varsigma),
                np.sinh(eta) / np.tanh(varsigma),
            ])
        return out

    def fields_from_phi_psi(self, eta: complex) -> Dict[str, np.ndarray]:
        """The same field vectors written with (φ±, ψ±)"""
        out = {}
        for side in ('+', '-'):
            phi, psi = self.phi_psi(side)
            tau = self.params(side)[2]
            denom = np.sinh(phi) * np.cosh(psi)
            out[side] = np.array([
                np.sinh(eta) * np.cosh(tau) / denom,
                1j * np.sinh(eta) * np.sinh(tau) / denom,
                np.sinh(eta) / np.tanh(phi) * np.tanh(psi),
            ])
        return out


def r_matrix(lam: complex, eta: complex) -> np.ndarray:
    """Six-vertex trigonometric R-matrix on V0 ⊗ Vn"""
    a, b, c = np.sinh(lam + eta), np.sinh(lam), np.sinh(eta)
    return np.array([[a, 0, 0, 0],
                     [0, b, c, 0],
                     [0, c, b, 0],
                     [0, 0, 0, a]], dtype=complex)


def r_bar_matrix(lam: complex, eta: complex) -> np.ndarray:
    return -r_matrix(-lam, eta)


def k_matrix(lam: complex, eta: complex, varsigma: complex, kappa: complex, tau: complex) -> np.ndarray:
    """Scalar reflection matrix K(λ; ς, κ, τ)"""
    s = np.sinh(varsigma)
    if abs(s) < Config.POLE_TOL:
        raise SingularBoundary(f"sinh ς vanishes for ς = {varsigma}")
    u = lam - eta / 2
    off = kappa * np.sinh(2 * lam - eta)
    return np.array([[np.sinh(u + varsigma), np.exp(tau) * off],
                     [np.exp(-tau) * off, np.sinh(varsigma - u)]], dtype=complex) / s


def k_minus(lam: complex, eta: complex, boundary: BoundaryParams) -> np.ndarray:
    return k_matrix(lam, eta, *boundary.params('+'))


def k_plus(lam: complex, eta: complex, boundary: BoundaryParams) -> np.ndarray:
    return k_matrix(lam + eta, eta, *boundary.params('-'))


class AuxChain:
    """
    Ordered product of auxiliary-space operators, written left to right.

    Factors are either ('site', n, R) with R a 4×4 matrix on V0 ⊗ Vn or
    ('aux', 0, K) with K a 2×2 scalar matrix on V0. Application runs from the
    rightmost factor.
    """

    def __init__(self, N: int, factors: Optional[List[Tuple[str, int, np.ndarray]]] = None):
        self.N = N
        self.factors = list(factors or [])

    def __matmul__(self, other: 'AuxChain') -> 'AuxChain':
        return AuxChain(self.N, self.factors + other.factors)

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Apply to a tensor of shape (2, 2^N, batch)"""
        N = self.N
        out = state
        for kind, site, mat in reversed(self.factors):
            if kind == 'aux':
                out = np.einsum('ab,bxk->axk', mat, out)
                continue
            batch = out.shape[-1]
            view = out.reshape(2, 2 ** (site - 1), 2, 2 ** (N - site), batch)
            view = np.einsum('acbd,bxdyk->axcyk', mat.reshape(2, 2, 2, 2), view)
            out = view.reshape(2, 2 ** N, batch)
        return out

    def act(self, row: np.ndarray, col: np.ndarray, vec: np.ndarray) -> np.ndarray:
        """row · Op · (col ⊗ vec) on the quantum space; vec may be (D,) or (D, batch)"""
        vec = np.asarray(vec, dtype=complex)
        flat = vec.ndim == 1
        v = vec[:, None] if flat else vec
        state = np.asarray(col, dtype=complex)[:, None, None] * v[None, :, :]
        out = np.einsum('a,axk->xk', np.asarray(row, dtype=complex), self.apply(state))
        return out[:, 0] if flat else out

    def matrix(self, row: np.ndarray, col: np.ndarray, chunk: int = 512) -> np.ndarray:
        """Dense quantum-space operator row · Op · col, built in column chunks"""
        D = 2 ** self.N
        out = np.empty((D, D), dtype=complex)
        for start in range(0, D, chunk):
            stop = min(D, start + chunk)
            basis = np.zeros((D, stop - start), dtype=complex)
            basis[np.arange(start, stop), np.arange(stop - start)] = 1.0
            out[:, start:stop] = self.act(row, col, basis)
        return out

    def block(self, a: int, b: int, chunk: int = 512) -> np.ndarray:
        """Dense quantum-space operator ⟨a| Op |b⟩"""
        basis = np.eye(2, dtype=complex)
        return self.matrix(basis[a], basis[b], chunk)

    def blocks(self) -> List[List[np.ndarray]]:
        return [[self.block(0, 0), self.block(0, 1)], [self.block(1, 0), self.block(1, 1)]]


def monodromy_t(config: ChainConfig, lam: complex) -> AuxChain:
    """T₀(λ) = R₀₁(λ−ξ₁−η/2)…R₀N(λ−ξ_N−η/2)"""
    eta = config.eta
    return AuxChain(config.N, [('site', n, r_matrix(lam - config.xi[n - 1] - eta / 2, eta))
                               for n in range(1, config.N + 1)])


def monodromy_t_hat(config: ChainConfig, lam: complex) -> AuxChain:
    """T̂₀(λ) = R₀N(λ+ξ_N−η/2)…R₀₁(λ+ξ₁−η/2)"""
    eta = config.eta
    return AuxChain(config.N, [('site', n, r_matrix(lam + config.xi[n - 1] - eta / 2, eta))
                               for n in range(config.N, 0, -1)])


def bulk_chain(config: ChainConfig, lam: complex) -> AuxChain:
    """M(λ) = R̄₀N(λ−ξ_N+η/2)…R̄₀₁(λ−ξ₁+η/2)"""
    eta = config.eta
    return AuxChain(config.N, [('site', n, r_bar_matrix(lam - config.xi[n - 1] + eta / 2, eta))
                               for n in range(config.N, 0, -1)])


def bulk_hat_chain(config: ChainConfig, lam: complex) -> AuxChain:
    """M̂(λ) = R̄₀₁(λ+ξ₁+η/2)…R̄₀N(λ+ξ_N+η/2)"""
    eta = config.eta
    return AuxChain(config.N, [('site', n, r_bar_matrix(lam + config.xi[n - 1] + eta / 2, eta))
                               for n in range(1, config.N + 1)])


def boundary_chain(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                   factorization: str = 'reflected') -> AuxChain:
    """
    Double-row monodromy 𝒰₋(λ).

    'reflected' builds T(λ) K₋(λ) T̂(λ); 'bulk' builds M̂(−λ) K₋(λ) M(−λ).
    """
    K = AuxChain(config.N, [('aux', 0, k_minus(lam, config.eta, boundary))])
    if factorization == 'reflected':
        return monodromy_t(config, lam) @ K @ monodromy_t_hat(config, lam)
    if factorization == 'bulk':
        return bulk_hat_chain(config, -lam) @ K @ bulk_chain(config, -lam)
    raise ValueError(f"unknown factorization {factorization!r}")


def bulk_monodromy(config: ChainConfig, lam: complex) -> List[List[np.ndarray]]:
    """Dense blocks [[A, B], [C, D]] of M(λ)"""
    return bulk_chain(config, lam).blocks()


def boundary_monodromy(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                       factorization: str = 'reflected') -> List[List[np.ndarray]]:
    """Dense blocks [[𝒜₋, ℬ₋], [𝒞₋, 𝒟₋]] of 𝒰₋(λ)"""
    return boundary_chain(config, boundary, lam, factorization).blocks()


def apply_transfer(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                   vec: np.ndarray) -> np.ndarray:
    """𝒯(λ) v = tr₀[K₊(λ) 𝒰₋(λ)] v without forming the matrix"""
    chain = AuxChain(config.N, [('aux', 0, k_plus(lam, config.eta, boundary))]) \
        @ boundary_chain(config, boundary, lam)
    basis = np.eye(2, dtype=complex)
    return chain.act(basis[0], basis[0], vec) + chain.act(basis[1], basis[1], vec)


def transfer_matrix(config: ChainConfig, boundary: BoundaryParams, lam: complex,
                    chunk: int = 512) -> np.ndarray:
    """Dense 𝒯(λ)"""
    D = config.dim
    out = np.empty((D, D), dtype=complex)
    for start in range(0, D, chunk):
        stop = min(D, start + chunk)
        basis = np.zeros((D, stop - start), dtype=complex)
        basis[np.arange(start, stop), np.arange(stop - start)] = 1.0
        out[:, start:stop] = apply_transfer(config, boundary, lam, basis)
    return out


def site_operator(N: int, n: int, op: np.ndarray) -> np.ndarray:
    """Embed a 2×2 operator at site n (1-based)"""
    return np.kron(np.kron(np.eye(2 ** (n - 1)), op), np.eye(2 ** (N - n)))


def hamiltonian(config: ChainConfig, boundary: BoundaryParams) -> np.ndarray:
    """
    Open XXZ Hamiltonian with boundary fields h₋ on site 1 and h₊ on site N.

    Built with bit arithmetic so that N = 12 stays a single dense allocation.
    """
    N, eta = config.N, config.eta
    D = 2 ** N
    delta = np.cosh(eta)
    idx = np.arange(D)
    bits = [(idx >> (N - n)) & 1 for n in range(1, N + 1)]
    spins = [1 - 2 * b for b in bits]
    H = np.zeros((D, D), dtype=complex)

    diagonal = np.zeros(D, dtype=complex)
    for n in range(N - 1):
        diagonal += delta * spins[n] * spins[n + 1]
        mask = (1 << (N - n - 1)) | (1 << (N - n - 2))
        flip = bits[n] != bits[n + 1]
        H[idx[flip] ^ mask, idx[flip]] += 2.0

    fields = boundary.fields(eta)
    for site, side in ((1, '-'), (N, '+')):
        hx, hy, hz = fields[side]
        bit = bits[site - 1]
        diagonal += hz * spins[site - 1]
        H[idx ^ (1 << (N - site)), idx] += hx + hy * np.where(bit == 0, 1j, -1j)

    H[idx, idx] += diagonal
    return H


def total_sz(N: int) -> np.ndarray:
    idx = np.arange(2 ** N)
    return np.diag(sum(1 - 2 * ((idx >> (N - n)) & 1) for n in range(1, N + 1)).astype(complex))


def transfer_hamiltonian(config: ChainConfig, boundary: BoundaryParams,
                         step: float = 1e-5) -> np.ndarray:
    """
    2 (sinh η)^{1−2N} / (tr K₊(η/2) tr K₋(η/2)) · d𝒯/dλ at λ = η/2.

    Central difference refined by one Richardson step.
    """
    eta, N = config.eta, config.N

    def derivative(h):
        return (transfer_matrix(config, boundary, eta / 2 + h)
                - transfer_matrix(config, boundary, eta / 2 - h)) / (2 * h)

    d_coarse, d_fine = derivative(step), derivative(step / 2)
    d = (4 * d_fine - d_coarse) / 3
    norm = np.trace(k_plus(eta / 2, eta, boundary)) * np.trace(k_minus(eta / 2, eta, boundary))
    return 2 * np.sinh(eta) ** (1 - 2 * N) / norm * d


def homogeneous_transfer_hamiltonian(N: int, eta: complex, boundary: BoundaryParams,
                                     deltas: Sequence[float] = (4e-3, 2e-3, 1e-3, 5e-4)
                                     ) -> Tuple[np.ndarray, float]:
    """
    Transfer-derived Hamiltonian extrapolated along ξ_n = nδ → 0.

    Each Neville level removes one more power of δ. Returns the estimate and
    the last tableau increment relative to its largest entry.
    """
    values = [transfer_hamiltonian(ChainConfig.ramp(N, eta, d), boundary) for d in deltas]
    estimate, increment = richardson(list(deltas), values, order=1)
    relative = increment / max(float(np.max(np.abs(estimate))), 1e-300)
    logger.debug(f"homogeneous extrapolation increment {relative:.2e}")
    return estimate, relative


def traceless(A: np.ndarray) -> np.ndarray:
    return A - np.trace(A) / A.shape[0] * np.eye(A.shape[0])
