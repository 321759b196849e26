"""
Dense complex linear algebra, root-finding and quadrature primitives.

Everything here is pure value-in/value-out; arrays handed back are fresh.
"""

import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import Config
from errors import (ConvergenceFailure, NoConvergence, NonConvergentSequence,
                    NonSquare, SingularJacobian)

logger = logging.getLogger(__name__)


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with (i_A i_B, j_A j_B) -> A[i_A, j_A] B[i_B, j_B]"""
    return np.kron(np.asarray(A), np.asarray(B))


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def eig_dense(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a general complex square matrix.

    Returns ``(w, V, U)`` with ``A @ V[:, k] = w[k] V[:, k]`` and
    ``U[k] @ A = w[k] U[k]``. Right vectors have unit norm and the left rows are
    scaled so that ``U[k] @ V[:, k] = 1``.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquare(f"eig_dense needs a square matrix, got shape {A.shape}")
    try:
        w, vl, vr = scipy.linalg.eig(A, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"eigen-decomposition failed: {e}")

    vr = vr / np.linalg.norm(vr, axis=0)
    U = vl.conj().T
    pairing = np.einsum('ki,ik->k', U, vr)
    if np.any(np.abs(pairing) < 1e-14):
        raise ConvergenceFailure("left/right eigenvector pairing vanished (defective matrix)")
    U = U / pairing[:, None]

    scale = max(np.linalg.norm(A), 1e-300)
    residual = np.linalg.norm(A @ vr - vr * w, axis=0).max() / scale
    if residual > 1e-12 * max(1.0, A.shape[0] / 64):
        logger.warning(f"eig_dense backward error {residual:.2e} above target")
    return w, vr, U


def reconstruct(w: np.ndarray, V: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Rebuild sum_k w_k v_k u_k / (u_k . v_k)"""
    pairing = np.einsum('ki,ik->k', U, V)
    return (V * (w / pairing)) @ U


def newton_multidim(residual: Callable[[np.ndarray], np.ndarray],
                    jacobian: Callable[[np.ndarray], np.ndarray],
                    x0, tol: float = None, max_iter: int = None) -> np.ndarray:
    """
    Damped Newton iteration on a complex analytic system.

    The full step is halved until the residual norm decreases (at most 30
    halvings). Raises NoConvergence carrying the best iterate.
    """
    tol = Config.TOL if tol is None else tol
    max_iter = Config.NEWTON_MAX_ITER if max_iter is None else max_iter
    x = np.atleast_1d(np.asarray(x0, dtype=complex)).copy()
    f = np.atleast_1d(residual(x))
    best, best_norm = x.copy(), np.max(np.abs(f))

    for iteration in range(max_iter):
        norm = np.max(np.abs(f))
        if norm < tol:
            logger.debug(f"newton converged in {iteration} steps, |F|={norm:.2e}")
            return x
        J = np.atleast_2d(jacobian(x))
        try:
            if np.linalg.cond(J) > 1e14:
                raise SingularJacobian(f"jacobian condition number above 1e14 at step {iteration}",
                                       {'iterate': x.tolist()})
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as e:
            raise SingularJacobian(f"jacobian solve failed: {e}", {'iterate': x.tolist()})

        t = 1.0
        for _ in range(30):
            trial = x + t * step
            with np.errstate(all='ignore'):
                f_trial = np.atleast_1d(residual(trial))
            trial_norm = np.max(np.abs(f_trial))
            if np.isfinite(trial_norm) and trial_norm < norm:
                break
            t *= 0.5
        x, f = trial, f_trial
        if trial_norm < best_norm:
            best, best_norm = x.copy(), trial_norm

    if best_norm < tol:
        return best
    raise NoConvergence(f"newton did not reach tol={tol:.1e} in {max_iter} steps "
                        f"(best |F|={best_norm:.2e})", best=best,
                        diagnostics={'residual_inf': float(best_norm)})


def finite_difference_jacobian(residual: Callable, x, step: float = 1e-7) -> np.ndarray:
    """Central-difference jacobian of an analytic function of complex arguments"""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = step
        cols.append((np.atleast_1d(residual(x + e)) - np.atleast_1d(residual(x - e))) / (2 * step))
    return np.array(cols).T


def gauss_legendre(a: complex, b: complex, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point rule on the straight segment [a, b]"""
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (complex(b) - complex(a))
    mid = 0.5 * (complex(b) + complex(a))
    return mid + half * t, half * w


def quad_segment(f: Callable[[np.ndarray], np.ndarray], a: complex, b: complex,
                 n: int = None) -> complex:
    """Gauss-Legendre estimate of the integral of f along [a, b]; f takes node arrays"""
    n = Config.QUAD_NODES if n is None else n
    nodes, weights = gauss_legendre(a, b, n)
    return complex(np.sum(weights * np.asarray(f(nodes))))


def panel_rule(a: complex, b: complex, panels: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with equal panels"""
    edges = np.linspace(0.0, 1.0, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(a + lo * (b - a), a + hi * (b - a), n)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def richardson(steps: Sequence[float], values: Sequence, order: int = 1) -> Tuple[complex, float]:
    """
    Neville extrapolation of values(h) to h = 0.

    ``order`` is the power of h in the leading error term (1 for one-sided
    sequences, 2 for symmetric differences). Returns the extrapolated value
    and the size of the last tableau increment as error estimate.
    """
    if len(steps) < 2 or len(steps) != len(values):
        raise NonConvergentSequence("richardson needs at least two (step, value) pairs")
    h = np.asarray(steps, dtype=float) ** order
    table: List = [np.asarray(v, dtype=complex) for v in values]
    last_increment = np.inf
    for level in range(1, len(h)):
        new = []
        for i in range(len(table) - 1):
            new.append((h[i] * table[i + 1] - h[i + level] * table[i]) / (h[i] - h[i + level]))
        last_increment = float(np.max(np.abs(new[-1] - table[-1])))
        table = new
    return table[0], last_increment


def principal_mod_2ipi(z: complex) -> complex:
    """Representative of z mod 2iπ with imaginary part in (−π, π]"""
    im = (z.imag + np.pi) % (2 * np.pi) - np.pi
    if np.isclose(im, -np.pi):
        im = np.pi
    return complex(z.real, im)


def distance_mod_ipi(z: complex) -> float:
    """Distance of z to iπZ"""
    k = np.round(z.imag / np.pi)
    return abs(complex(z.real, z.imag - k * np.pi))
