"""Dense baseline, deflated iteration, ratios, orthogonalization, certificates."""

import numpy as np
import pytest

from slepian_kit.eigensolve import (
    ConvergenceError,
    DegenerateInputError,
    concentration_ratio,
    full_hermitian_eig,
    orthogonalize,
    projection_error_certificate,
    top_eigenpair_deflated,
)


def random_hermitian(n, seed=0, values=None):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    if values is None:
        values = np.sort(rng.random(n))[::-1]
    A = (Q * values) @ Q.conj().T
    return 0.5 * (A + A.conj().T), np.asarray(values, dtype=float), Q


class TestFullHermitianEig:
    def test_identity(self):
        sp = full_hermitian_eig(np.eye(6))
        assert np.allclose(sp.values, 1.0)

    def test_diagonal_reordered(self):
        sp = full_hermitian_eig(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(sp.values, [3.0, 2.0, 1.0])
        assert abs(sp.vectors[0, 0]) == pytest.approx(1.0)
        assert abs(sp.vectors[2, 1]) == pytest.approx(1.0)

    def test_residuals_and_orthonormality(self):
        A, _, _ = random_hermitian(50, seed=1)
        sp = full_hermitian_eig(A)
        for i in range(50):
            r = np.linalg.norm(A @ sp.vectors[:, i] - sp.values[i] * sp.vectors[:, i])
            assert r <= 1e-10 * max(abs(sp.values[0]), 1e-300)
        G = sp.vectors.conj().T @ sp.vectors
        assert np.max(np.abs(G - np.eye(50))) <= 1e-10

    def test_nonfinite_rejected(self):
        A = np.eye(4)
        A[1, 2] = np.nan
        with pytest.raises(ValueError):
            full_hermitian_eig(A)


class TestTopEigenpairDeflated:
    def test_diag_no_deflation(self):
        A = np.diag([3.0, 2.0, 1.0])
        pair = top_eigenpair_deflated(lambda v: A @ v, 3, [], tol=1e-12)
        assert pair.value == pytest.approx(3.0, abs=1e-11)
        assert abs(pair.vector[0]) == pytest.approx(1.0, abs=1e-9)

    def test_diag_deflated(self):
        A = np.diag([3.0, 2.0, 1.0])
        e1 = np.array([1.0, 0, 0], dtype=complex)
        pair = top_eigenpair_deflated(lambda v: A @ v, 3, [e1], tol=1e-12)
        assert pair.value == pytest.approx(2.0, abs=1e-11)
        assert abs(pair.vector[1]) == pytest.approx(1.0, abs=1e-9)

    def test_deflation_against_exact_eigenvectors(self):
        values = np.array([1.0, 0.8, 0.5, 0.3, 0.1, 0.05, 0.01, 0.0])
        A, vals, Q = random_hermitian(8, seed=3, values=values)
        for q in range(3):
            excluded = [Q[:, i] for i in range(q)]
            pair = top_eigenpair_deflated(lambda v: A @ v, 8, excluded, tol=1e-12)
            assert pair.value == pytest.approx(vals[q], abs=1e-10)
            for b in excluded:
                assert abs(np.vdot(b, pair.vector)) <= 1e-10

    def test_warm_start_consistent(self):
        values = np.array([1.0, 0.5, 0.25, 0.12, 0.06, 0.0])
        A, vals, Q = random_hermitian(6, seed=4, values=values)
        cold = top_eigenpair_deflated(lambda v: A @ v, 6, [], tol=1e-11)
        warm = top_eigenpair_deflated(lambda v: A @ v, 6, [], tol=1e-11,
                                      warm_start=Q[:, 0] + 0.3 * Q[:, 2])
        assert cold.value == pytest.approx(warm.value, abs=1e-10)
        assert abs(np.vdot(cold.vector, warm.vector)) == pytest.approx(1.0, abs=1e-8)

    def test_largest_magnitude_selected(self):
        A = np.diag([-4.0, 3.0, 1.0])
        pair = top_eigenpair_deflated(lambda v: A @ v, 3, [], tol=1e-12)
        assert pair.value == pytest.approx(-4.0, abs=1e-10)

    def test_budget_error_carries_best(self):
        A, _, _ = random_hermitian(40, seed=5)
        with pytest.raises(ConvergenceError) as err:
            top_eigenpair_deflated(lambda v: A @ v, 40, [], tol=1e-16, max_applies=8,
                                   krylov_dim=4)
        assert err.value.vector is not None
        assert np.isfinite(err.value.residual)


class TestConcentrationRatio:
    def test_eigenvector_gives_eigenvalue(self):
        A, vals, Q = random_hermitian(12, seed=6)
        for i in (0, 3, 11):
            assert concentration_ratio(lambda v: A @ v, Q[:, i]) == pytest.approx(vals[i], abs=1e-12)

    def test_mixture_averages(self):
        A, vals, Q = random_hermitian(10, seed=7)
        v = (Q[:, 0] + Q[:, 1]) / np.sqrt(2)
        expected = (vals[0] + vals[1]) / 2
        assert concentration_ratio(lambda v_: A @ v_, v) == pytest.approx(expected, abs=1e-12)

    def test_bounded_by_top(self):
        A, vals, _ = random_hermitian(15, seed=8)
        rng = np.random.default_rng(0)
        for _ in range(10):
            v = rng.standard_normal(15) + 1j * rng.standard_normal(15)
            assert concentration_ratio(lambda v_: A @ v_, v) <= vals[0] + 1e-10

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            concentration_ratio(lambda v: v, np.zeros(4))


class TestOrthogonalize:
    def test_already_orthogonal(self):
        w = np.array([0.0, 0.0, 2.0], dtype=complex)
        basis = [np.array([1.0, 0, 0], dtype=complex), np.array([0, 1.0, 0], dtype=complex)]
        out = orthogonalize(w, basis)
        assert np.allclose(out, [0, 0, 1.0])

    def test_member_of_basis_rejected(self):
        b = np.array([1.0, 0, 0], dtype=complex)
        with pytest.raises(DegenerateInputError):
            orthogonalize(b.copy(), [b])

    def test_random_residual_orthogonality(self):
        rng = np.random.default_rng(9)
        basis, _ = np.linalg.qr(rng.standard_normal((50, 5)) + 1j * rng.standard_normal((50, 5)))
        w = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        out = orthogonalize(w, [basis[:, i] for i in range(5)])
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
        for i in range(5):
            assert abs(np.vdot(basis[:, i], out)) <= 1e-12


class TestProjectionCertificate:
    def test_exact_top_eigenvector(self):
        A, vals, Q = random_hermitian(8, seed=10)
        sp = full_hermitian_eig(A)
        cert = projection_error_certificate(sp, sp.vectors[:, 0], eta=1e-12, m=1)
        assert cert.applicable and cert.ok
        assert cert.measured <= 1e-20

    @pytest.mark.parametrize("theta", [0.1, 0.4, 1.0])
    def test_two_by_two_equality_case(self, theta):
        A = np.diag([1.0, 0.5])
        sp = full_hermitian_eig(A)
        w = np.array([np.cos(theta), np.sin(theta)])
        eta = 1.0 - float(w @ A @ w)
        cert = projection_error_certificate(sp, w, eta=eta, m=1)
        assert cert.applicable
        assert cert.measured == pytest.approx(np.sin(theta) ** 2, abs=1e-12)
        assert cert.bound == pytest.approx(np.sin(theta) ** 2, abs=1e-12)
        assert cert.measured <= cert.bound * (1 + 1e-10)

    def test_inapplicable_when_precondition_fails(self):
        A = np.diag([1.0, 0.0])
        sp = full_hermitian_eig(A)
        w = np.array([0.0, 1.0])  # Rayleigh 0, far from lambda_1 = 1
        cert = projection_error_certificate(sp, w, eta=1e-3, m=1)
        assert not cert.applicable

    def test_gap_bound_random(self):
        A, vals, Q = random_hermitian(30, seed=12,
                                      values=np.linspace(1.0, 0.0, 30))
        sp = full_hermitian_eig(A)
        rng = np.random.default_rng(1)
        for _ in range(20):
            w = sp.vectors[:, 0] + 0.05 * (rng.standard_normal(30) + 1j * rng.standard_normal(30))
            w = w / np.linalg.norm(w)
            eta = abs(np.real(np.vdot(w, A @ w)) - sp.values[0])
            for m in (1, 3, 10):
                cert = projection_error_certificate(sp, w, eta=eta, m=m)
                assert cert.applicable
                assert cert.measured <= cert.bound * (1 + 1e-10)
