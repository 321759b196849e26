"""
Tests for the dense linear algebra, Newton and quadrature helpers
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import NoConvergence, NonConvergentSequence, NonSquare
from numerics import (distance_mod_ipi, eig_dense, finite_difference_jacobian, kron, kron_all,
                      newton_multidim, panel_rule, principal_mod_2ipi, quad_segment, reconstruct,
                      richardson)


def test_kron_index_convention():
    A = np.array([[1, 2], [3, 4]], dtype=complex)
    B = np.array([[0, 1j], [1, 0]], dtype=complex)
    K = kron(A, B)
    for iA in range(2):
        for iB in range(2):
            for jA in range(2):
                for jB in range(2):
                    assert K[2 * iA + iB, 2 * jA + jB] == A[iA, jA] * B[iB, jB]
    assert_allclose(kron_all([A, B, np.eye(2)]), np.kron(np.kron(A, B), np.eye(2)))


def test_eig_dense_left_right_pairing(rng):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    w, V, U = eig_dense(A)
    assert_allclose(A @ V, V * w, atol=1e-11)
    assert_allclose(U @ A, w[:, None] * U, atol=1e-10)
    assert_allclose(U @ V, np.eye(6), atol=1e-10)
    assert_allclose(np.linalg.norm(V, axis=0), np.ones(6), rtol=1e-12)
    assert_allclose(reconstruct(w, V, U), A, atol=1e-10)


def test_eig_dense_rejects_non_square():
    with pytest.raises(NonSquare):
        eig_dense(np.zeros((2, 3)))


def test_newton_multidim_complex_system():
    target = np.array([1 + 1j, -0.5 + 2j])

    def residual(x):
        return np.array([x[0] ** 2 - target[0], x[0] * x[1] - target[1]])

    def jacobian(x):
        return np.array([[2 * x[0], 0], [x[1], x[0]]])

    x = newton_multidim(residual, jacobian, [1.0, 1.0], tol=1e-13)
    assert_allclose(residual(x), 0, atol=1e-13)
    assert_allclose(jacobian(x), finite_difference_jacobian(residual, x), atol=1e-6)


def test_newton_multidim_reports_best_iterate():
    with pytest.raises(NoConvergence) as info:
        newton_multidim(lambda x: x ** 2 + 1, lambda x: np.diag(2 * x), [10.0], tol=1e-14, max_iter=2)
    assert info.value.best is not None
    assert info.value.exit_code == 4


def test_quad_segment_is_exact_for_polynomials():
    b = 1 + 1j
    assert_allclose(quad_segment(lambda z: z ** 5, 0, b, n=8), b ** 6 / 6, rtol=1e-13)


def test_panel_rule_on_complex_segment():
    a, b = -1 + 0.5j, 2 - 0.3j
    x, w = panel_rule(a, b, panels=4, n=12)
    assert len(x) == 48
    assert_allclose(np.sum(w * np.exp(x)), np.exp(b) - np.exp(a), rtol=1e-13)


def test_richardson_removes_polynomial_error():
    steps = [0.1, 0.05, 0.025]
    values = [2 + 3 * h + h ** 2 for h in steps]
    value, increment = richardson(steps, values)
    assert abs(value - 2) < 1e-12
    assert increment < 1.0

    even = [1 - 0.5 * h ** 2 + h ** 4 for h in steps]
    assert abs(richardson(steps, even, order=2)[0] - 1) < 1e-12


def test_richardson_needs_two_points():
    with pytest.raises(NonConvergentSequence):
        richardson([0.1], [1.0])


def test_mod_helpers():
    assert_allclose(principal_mod_2ipi(0.3 + 7j), 0.3 + (7 - 2 * np.pi) * 1j)
    assert principal_mod_2ipi(1j * np.pi).imag == pytest.approx(np.pi)
    assert distance_mod_ipi(0.2 + 1j * np.pi) == pytest.approx(0.2)
    assert distance_mod_ipi(3j * np.pi + 1e-3j) == pytest.approx(1e-3)
