import os
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from errors import ConfigError

load_dotenv()


class Config:
    """Numerical defaults, overridable from the environment or a .env file"""
    TOL = float(os.getenv('XXZ_TOL', '1e-10'))
    NEWTON_MAX_ITER = int(os.getenv('XXZ_NEWTON_MAX_ITER', '60'))
    QUAD_NODES = int(os.getenv('XXZ_QUAD_NODES', '48'))
    THREADS = int(os.getenv('XXZ_THREADS', '1'))
    LOG_LEVEL = os.getenv('XXZ_LOG_LEVEL', 'INFO')
    GAP_TOL = float(os.getenv('XXZ_GAP_TOL', '1e-8'))
    POLE_TOL = float(os.getenv('XXZ_POLE_TOL', '1e-12'))
    GENERIC_TOL = float(os.getenv('XXZ_GENERIC_TOL', '1e-8'))
    MATCH_TOL = float(os.getenv('XXZ_MATCH_TOL', '1e-6'))
    MASSLESS_CUT = float(os.getenv('XXZ_MASSLESS_CUT', '12.0'))

    @classmethod
    def override(cls, tol: Optional[float] = None, threads: Optional[int] = None):
        """Apply command-line overrides for the current process"""
        if tol is not None:
            cls.TOL = float(tol)
        if threads is not None:
            cls.THREADS = max(1, int(threads))


def parse_complex(value: Any, name: str) -> complex:
    """Read a complex number written as [re, im] (a bare real is accepted too)"""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"'{name}' must be a number or a [re, im] pair, got {value!r}")


_BOUNDARY_KEYS = ('varsigma_p', 'kappa_p', 'tau_p', 'varsigma_m', 'kappa_m', 'tau_m')


@dataclass
class RunConfig:
    """Validated content of a JSON run configuration"""
    N: int
    eta: complex
    xi: Optional[List[complex]]
    xi_scale: float
    boundary_values: Dict[str, complex]
    tune_tau_p: bool
    eps_signs: List[int]
    sector: int
    regime: str
    word_eps: List[int]
    word_eps_prime: List[int]
    lambda_samples: List[complex]
    quadrature: Dict[str, Any]
    finite_sizes: List[int]
    out: Optional[str]
    raw: Dict[str, Any] = field(default_factory=dict)

    def chain(self):
        from lattice_operators import ChainConfig
        if self.xi is not None:
            return ChainConfig(self.N, self.eta, self.xi)
        return ChainConfig.generic(self.N, self.eta, scale=self.xi_scale)

    def eps(self):
        from spectrum import EpsilonChoice
        return EpsilonChoice(*self.eps_signs)

    def boundary(self):
        from lattice_operators import BoundaryParams
        from spectrum import tune_tau_plus
        boundary = BoundaryParams(**self.boundary_values)
        if self.tune_tau_p:
            boundary = tune_tau_plus(boundary, self.eps(), self.N, self.sector, self.eta)
        return boundary

    def word(self):
        from local_ops import OperatorWord
        return OperatorWord(self.word_eps, self.word_eps_prime)


def _require(data: Dict, key: str, where: str):
    if key not in data:
        raise ConfigError(f"missing key '{key}' in {where}")
    return data[key]


def _expect(value: Any, kind, name: str):
    if not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool):
        expected = kind.__name__ if isinstance(kind, type) else '/'.join(k.__name__ for k in kind)
        raise ConfigError(f"'{name}' must be of type {expected}, got {value!r}")
    return value


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a decoded JSON document against the run-config schema"""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")

    chain = _expect(_require(data, 'chain', 'configuration'), dict, 'chain')
    N = _require(chain, 'N', 'chain')
    if not isinstance(N, int) or isinstance(N, bool) or not 1 <= N <= 12:
        raise ConfigError(f"chain.N must be an integer in 1..12, got {N!r}")
    eta = parse_complex(_require(chain, 'eta', 'chain'), 'chain.eta')

    xi = None
    if 'xi' in chain:
        if not isinstance(chain['xi'], list) or len(chain['xi']) != N:
            raise ConfigError(f"chain.xi must list exactly N={N} values")
        xi = [parse_complex(v, f'chain.xi[{i}]') for i, v in enumerate(chain['xi'])]
    xi_scale = float(_expect(chain.get('xi_scale', 1.0), (int, float), 'chain.xi_scale'))
    if xi_scale <= 0:
        raise ConfigError(f"chain.xi_scale must be positive, got {xi_scale}")

    boundary = _expect(_require(data, 'boundary', 'configuration'), dict, 'boundary')
    values = {k: parse_complex(_require(boundary, k, 'boundary'), f'boundary.{k}')
              for k in _BOUNDARY_KEYS}
    tune = _expect(boundary.get('tune_tau_p', False), bool, 'boundary.tune_tau_p')

    eps_signs = data.get('eps', [1, 1, 1, 1])
    if (not isinstance(eps_signs, list) or len(eps_signs) != 4
            or any(s not in (1, -1) for s in eps_signs)):
        raise ConfigError("eps must be a list of four signs (+1/-1)")
    if eps_signs[0] * eps_signs[1] * eps_signs[2] * eps_signs[3] != 1:
        raise ConfigError("the product of the four eps signs must be +1")

    sector = data.get('sector', N // 2)
    if not isinstance(sector, int) or not 0 <= sector <= N:
        raise ConfigError(f"sector must be an integer in 0..N, got {sector!r}")

    regime = data.get('regime', 'A')
    if regime not in ('A', 'B', 'C', 'D'):
        raise ConfigError(f"regime must be one of A, B, C, D, got {regime!r}")

    word = _expect(data.get('word', {'eps': [], 'eps_prime': []}), dict, 'word')
    w_eps = _expect(word.get('eps', []), list, 'word.eps')
    w_eps_prime = _expect(word.get('eps_prime', []), list, 'word.eps_prime')
    if (len(w_eps) != len(w_eps_prime)
            or any(e not in (1, 2) for e in list(w_eps) + list(w_eps_prime))):
        raise ConfigError("word.eps and word.eps_prime must be equal-length lists over {1, 2}")
    if len(w_eps) > N:
        raise ConfigError("word cannot act on more sites than the chain has")

    raw_samples = _expect(data.get('lambda_samples', [[0.21, 0.13], [0.37, -0.08], [-0.15, 0.27],
                                                    [0.52, 0.31], [0.09, -0.22]]), list, 'lambda_samples')
    if not raw_samples:
        raise ConfigError("lambda_samples must not be empty")
    samples = [parse_complex(v, f'lambda_samples[{i}]') for i, v in enumerate(raw_samples)]

    sizes = _expect(data.get('finite_sizes', []), list, 'finite_sizes')
    if any(not isinstance(n, int) or not 2 <= n <= 12 for n in sizes):
        raise ConfigError("finite_sizes entries must be integers in 2..12")

    quadrature = _expect(data.get('quadrature', {}), dict, 'quadrature')
    out = data.get('out')
    if out is not None:
        _expect(out, str, 'out')

    return RunConfig(
        N=N, eta=eta, xi=xi, xi_scale=xi_scale,
        boundary_values=values, tune_tau_p=tune,
        eps_signs=list(eps_signs), sector=sector, regime=regime,
        word_eps=list(w_eps), word_eps_prime=list(w_eps_prime),
        lambda_samples=samples,
        quadrature=dict(quadrature),
        finite_sizes=list(sizes),
        out=out,
        raw=data,
    )


def load_run_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration"""
    if not os.path.exists(path):
        raise ConfigError(f"configuration file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"configuration is not valid JSON: {e}")
    return parse_run_config(data)
