"""
Shared fixtures: a generic anisotropy, non-diagonal boundary parameters tuned
onto the constraint, and oracle-seeded Bethe solutions cached per (N, M).
"""

import functools
from dataclasses import dataclass
from typing import List

import numpy as np
import pytest

from lattice_operators import BoundaryParams, ChainConfig
from oracle import SpectrumTable, build_spectrum_table, seed_roots_from_oracle
from spectrum import BetheSolution, EpsilonChoice, bethe_solve, tune_tau_plus

ETA = 0.35 + 0.62j

BASE_BOUNDARY = BoundaryParams(varsigma_p=0.41 + 0.17j, kappa_p=0.63 - 0.11j, tau_p=0,
                               varsigma_m=-0.27 + 0.35j, kappa_m=0.52 + 0.21j, tau_m=0.19 - 0.08j)

EPS = EpsilonChoice(1, 1, 1, 1)

# (φ, ψ, τ) per side for the half-infinite chain; poles of the boundary weight stay off the contours
THERMO_BOUNDARY = BoundaryParams.from_phi_psi((0.48 - 0.21j, 0.33 + 0.12j, 0.1 + 0.05j),
                                              (0.55 + 0.3j, 0.2 - 0.15j, -0.07 + 0.11j))

MASSLESS_ETA = -1.0j
MASSIVE_ETA = -0.8 + 0j


def hermitian_massive_boundary(kappa: float = 0.1, varsigma_p: float = 0.9,
                               tau: complex = 0.3j) -> BoundaryParams:
    """
    Real-field boundary at η = MASSIVE_ETA whose constraint for ε = (1, 1, 1, 1)
    and M = N/2 reads τ₊ = τ₋, so tuning keeps the Hamiltonian Hermitian.
    """
    a = np.arcsinh(np.exp(varsigma_p) / (2 * kappa))
    varsigma_m = -np.log(2 * kappa * np.sinh(a - MASSIVE_ETA.real))
    return BoundaryParams(varsigma_p, kappa, tau, varsigma_m, kappa, tau)


HERMITIAN_BOUNDARY = hermitian_massive_boundary()


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: oracle suites above N=5')


@dataclass
class Sector:
    chain: ChainConfig
    boundary: BoundaryParams
    table: SpectrumTable
    solutions: List[BetheSolution]
    M: int


@functools.lru_cache(maxsize=None)
def constrained_sector(N: int, M: int) -> Sector:
    """Generic chain of length N with τ₊ tuned for sector M, its oracle table and Bethe solutions"""
    chain = ChainConfig.generic(N, ETA)
    boundary = tune_tau_plus(BASE_BOUNDARY, EPS, N, M, ETA)
    table = build_spectrum_table(chain, boundary)
    solutions = [bethe_solve(chain, boundary, EPS, M, seed_roots=q.roots)
                 for _, q in seed_roots_from_oracle(chain, boundary, EPS, M, table)]
    return Sector(chain=chain, boundary=boundary, table=table, solutions=solutions, M=M)


@pytest.fixture
def eta():
    return ETA


@pytest.fixture
def eps():
    return EPS


@pytest.fixture
def boundary():
    return BASE_BOUNDARY


@pytest.fixture(scope='session')
def sector():
    return constrained_sector


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
