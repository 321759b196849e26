import functools
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config import Config, RunConfig, parse_complex
from errors import ConstraintViolated, NumericalFailure, VerificationFailure, XXZError
from lattice_operators import (ChainConfig, hamiltonian, homogeneous_transfer_hamiltonian,
                               traceless)
from matrix_elements import bethe_tau, dense_matel, matel_finite
from oracle import (ORACLE_MAX_N, build_spectrum_table, completeness_audit, match_branch,
                    seed_roots_from_oracle)
from spectrum import BetheSolution, bethe_solve, bethe_solve_all, check_constraint, tq_residual_hom
from thermo import (XI_PATTERN, correlator_homogeneous, correlator_thermo, density_profile,
                    finite_chain_expectation, finite_size_series, regime_spec, soft_compare)

logger = logging.getLogger(__name__)


def command(fn: Callable[..., Dict[str, Any]]) -> Callable[..., Dict[str, Any]]:
    """Turn toolkit errors into error status dictionaries"""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> Dict[str, Any]:
        try:
            return fn(*args, **kwargs)
        except XXZError as e:
            logger.error(f"{fn.__name__}: {type(e).__name__}: {e.message}")
            return e.to_dict()
        except (ValueError, ArithmeticError) as e:
            # numpy.linalg.LinAlgError is a ValueError; config problems arrive as ConfigError
            logger.error(f"{fn.__name__}: {type(e).__name__}: {e}")
            failure = NumericalFailure(str(e), {'exception': type(e).__name__})
            return failure.to_dict()
    return wrapper


def _solve_sector(cfg: RunConfig, chain: ChainConfig, boundary, eps, table=None,
                  seed_roots: Optional[Sequence[complex]] = None) -> List[Dict[str, Any]]:
    """Bethe solutions of the configured sector with their oracle branch when available"""
    M = cfg.sector
    if seed_roots is not None:
        found = [(None, bethe_solve(chain, boundary, eps, M, seed_roots=list(seed_roots)))]
    elif table is not None:
        found = [(k, bethe_solve(chain, boundary, eps, M, seed_roots=list(q.roots)))
                 for k, q in seed_roots_from_oracle(chain, boundary, eps, M, table)]
    else:
        found = [(None, s) for s in bethe_solve_all(chain, boundary, eps, M)]

    out = []
    for branch, solution in found:
        entry: Dict[str, Any] = {'solution': solution, 'branch': branch, 'match_deviation': None}
        if table is not None:
            matched, deviation = match_branch(table, bethe_tau(chain, boundary, eps, solution))
            entry['branch'], entry['match_deviation'] = matched, deviation
        out.append(entry)
    return out


def _check(name: str, residual: float, threshold: float, **extra) -> Dict[str, Any]:
    return {'name': name, 'residual': float(residual), 'threshold': threshold,
            'passed': bool(residual < threshold), **extra}


@command
def cmd_verify(cfg: RunConfig) -> Dict[str, Any]:
    """Run the invariant checks on the configured chain; fail when any of them fails"""
    chain, boundary, eps = cfg.chain(), cfg.boundary(), cfg.eps()
    N, M, eta = chain.N, cfg.sector, chain.eta
    checks = []

    report = check_constraint(boundary, eps, N, M, eta, tol=Config.TOL)
    checks.append(_check('constraint', report.residual, Config.TOL))
    checks.append(_check('tq_constraint', report.tq_residual, Config.TOL))

    table = None
    try:
        table = build_spectrum_table(chain, boundary, cfg.lambda_samples)
        checks.append(_check('commuting_family', table.diagnostics['commutator'], 1e-10))
    except VerificationFailure as e:
        checks.append(_check('commuting_family', e.diagnostics.get('commutator', np.inf), 1e-10))

    if N <= 6:
        H = hamiltonian(ChainConfig.homogeneous(N, eta), boundary)
        Ht, increment = homogeneous_transfer_hamiltonian(N, eta, boundary)
        deviation = np.linalg.norm(traceless(Ht) - traceless(H)) / np.linalg.norm(traceless(H))
        checks.append(_check('hamiltonian_from_transfer', deviation, 1e-6, extrapolation_increment=increment))

    if report.holds and report.tq_holds and table is not None:
        solutions = _solve_sector(cfg, chain, boundary, eps, table)
        checks.append({'name': 'bethe_solutions_found', 'passed': bool(solutions),
                       'count': len(solutions)})
        for entry in solutions:
            solution: BetheSolution = entry['solution']
            checks.append(_check(f"bethe_residual[{entry['branch']}]", solution.residual_inf, Config.TOL))
            tq = tq_residual_hom(chain, boundary, eps, solution.q, table.tau(entry['branch']),
                                 cfg.lambda_samples)
            checks.append(_check(f"tq_residual[{entry['branch']}]", tq, 1e-8))

        audit = completeness_audit(chain, boundary, eps, M, table)
        checks.append({'name': 'completeness', 'passed': True, 'advisory': True, **audit.to_dict()})

        word = cfg.word()
        if solutions and word.m > 0 and word.conserving:
            solution = solutions[0]['solution']
            formula = matel_finite(chain, boundary, eps, solution, word)
            oracle = dense_matel(chain, boundary, eps, solution, word, table)
            deviation = abs(formula - oracle) / max(abs(oracle), 1e-300)
            checks.append(_check('matrix_element', deviation, 1e-8, formula=formula, oracle=oracle))

    failed = [c['name'] for c in checks if not c['passed']]
    result = {'status': 'success' if not failed else 'error', 'command': 'verify',
              'checks': checks, 'failed': failed, 'exit_code': 0 if not failed else 2}
    if failed:
        result['message'] = f"{len(failed)} invariant check(s) failed: {', '.join(failed)}"
    return result


@command
def cmd_bethe(cfg: RunConfig, seed_roots: Optional[Sequence[complex]] = None) -> Dict[str, Any]:
    chain, boundary, eps = cfg.chain(), cfg.boundary(), cfg.eps()
    report = check_constraint(boundary, eps, chain.N, cfg.sector, chain.eta)
    if not report.tq_holds:
        raise ConstraintViolated(f"constraint fails for sector M={cfg.sector}", report.to_dict())
    table = build_spectrum_table(chain, boundary, cfg.lambda_samples) if chain.N <= ORACLE_MAX_N else None
    solutions = _solve_sector(cfg, chain, boundary, eps, table, seed_roots)
    rows = [{'branch': e['branch'], 'match_deviation': e['match_deviation'], **e['solution'].to_dict()}
            for e in solutions]
    return {'status': 'success', 'command': 'bethe', 'sector': cfg.sector,
            'solutions': rows, 'rows': rows, 'constraint': report.to_dict()}


@command
def cmd_matel(cfg: RunConfig, seed_roots: Optional[Sequence[complex]] = None) -> Dict[str, Any]:
    chain, boundary, eps, word = cfg.chain(), cfg.boundary(), cfg.eps(), cfg.word()
    table = build_spectrum_table(chain, boundary, cfg.lambda_samples)
    solutions = _solve_sector(cfg, chain, boundary, eps, table, seed_roots)
    if not solutions:
        raise VerificationFailure(f"no Bethe solution found in sector M={cfg.sector}")
    rows = []
    for entry in solutions:
        solution = entry['solution']
        formula = matel_finite(chain, boundary, eps, solution, word)
        oracle = dense_matel(chain, boundary, eps, solution, word, table) if word.m else 1.0 + 0j
        rows.append({'branch': entry['branch'], 'formula': formula, 'oracle': oracle,
                     'relative_deviation': abs(formula - oracle) / max(abs(oracle), 1e-300),
                     'bethe_residual': solution.residual_inf})
    return {'status': 'success', 'command': 'matel', 'word': word.to_dict(), 'results': rows, 'rows': rows}


@command
def cmd_thermo(cfg: RunConfig) -> Dict[str, Any]:
    boundary, eps, word, eta = cfg.boundary(), cfg.eps(), cfg.word(), cfg.eta
    regime = regime_spec(cfg.regime, boundary, eps, eta)
    quadrature = dict(cfg.quadrature)
    profile = density_profile(eta)
    result: Dict[str, Any] = {'status': 'success', 'command': 'thermo', 'word': word.to_dict(),
                              'regime': regime.label, 'density': profile.to_dict()}

    finite_xi = None
    if quadrature.pop('homogeneous', False):
        scales = quadrature.pop('scales', (0.08, 0.04, 0.02, 0.01))
        value, increment = correlator_homogeneous(eta, boundary, eps, regime, word, scales, quadrature)
        result.update({'value': value, 'extrapolation_increment': increment})
    else:
        xi_values = quadrature.pop('xi', None)
        xi = ([parse_complex(v, 'quadrature.xi') for v in xi_values] if xi_values is not None
              else [0.1 * XI_PATTERN[k] for k in range(word.m)])
        thermo = correlator_thermo(eta, boundary, eps, regime, word, xi, quadrature)
        result.update({'value': thermo.value, 'xi': xi, 'quadrature': thermo.to_dict()})
        finite_xi = xi

    finite = [finite_chain_expectation(eta, boundary, eps, word, n, finite_xi) for n in cfg.finite_sizes]
    rows = [chain_value.to_dict() for chain_value in finite]
    if finite:
        series = finite_size_series({v.N: v.value for v in finite})
        result['finite_size'] = series.to_dict()
        result['finite_size_check'] = soft_compare(result['value'], series)
    result['rows'] = rows or [{'regime': regime.label, 'value': result['value']}]
    return result


@command
def cmd_spectrum(cfg: RunConfig) -> Dict[str, Any]:
    chain, boundary = cfg.chain(), cfg.boundary()
    table = build_spectrum_table(chain, boundary, cfg.lambda_samples)
    rows = []
    for k in range(table.branches):
        row: Dict[str, Any] = {'branch': k}
        for i, lam in enumerate(table.lambda_samples):
            row[f"tau_{i}"] = table.eigenvalues[k, i]
        rows.append(row)
    return {'status': 'success', 'command': 'spectrum', 'table': table.to_dict(), 'rows': rows}


COMMANDS = {
    'verify': cmd_verify,
    'bethe': cmd_bethe,
    'matel': cmd_matel,
    'thermo': cmd_thermo,
    'spectrum': cmd_spectrum,
}
