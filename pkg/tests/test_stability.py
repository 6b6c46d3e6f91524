import numpy as np
import pytest
from conftest import random_hurwitz

from soncoord.errors import DegenerateMatrix, NoUniqueSolution
from soncoord.simulation import integrate_ode
from soncoord.stability import (Method, diag_strict_concavity_check, integrate_linear,
                                is_hurwitz_eigen, lambda_max_sym, lyapunov_certificate,
                                lyapunov_report, routh_hurwitz_2, routh_hurwitz_3,
                                spectral_abscissa)
from soncoord.system_model import LinearEvaluator, LinearLoopSystem

UNSTABLE = np.array([[-1.0, 3.0], [3.0, -1.0]])


class TestEigen:
    def test_minus_identity(self):
        r = is_hurwitz_eigen(-np.eye(3))
        assert r.is_hurwitz and r.spectral_abscissa == pytest.approx(-1.0)
        assert r.method is Method.EIGEN

    def test_rotation_is_not_hurwitz(self):
        r = is_hurwitz_eigen([[0.0, 1.0], [-1.0, 0.0]])
        assert not r.is_hurwitz and r.spectral_abscissa == pytest.approx(0.0, abs=1e-14)

    def test_symmetric_unstable(self):
        r = is_hurwitz_eigen(UNSTABLE)
        assert not r.is_hurwitz and r.spectral_abscissa == pytest.approx(2.0)

    def test_margin(self):
        assert is_hurwitz_eigen(-0.5 * np.eye(2), margin=0.4).is_hurwitz
        assert not is_hurwitz_eigen(-0.5 * np.eye(2), margin=0.6).is_hurwitz

    def test_report_serializes(self):
        d = is_hurwitz_eigen(UNSTABLE).to_dict()
        assert d["method"] == "Eigen" and len(d["eigenvalues"]) == 2

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            spectral_abscissa(np.zeros((2, 3)))


class TestRouthHurwitz:
    def test_2x2_examples(self):
        assert routh_hurwitz_2([[-1.0, 0.0], [0.0, -2.0]])
        assert not routh_hurwitz_2(UNSTABLE)

    def test_3x3_examples(self):
        assert routh_hurwitz_3(-np.eye(3))
        assert not routh_hurwitz_3(np.diag([-1.0, -1.0, 1.0]))

    def test_degenerate(self):
        with pytest.raises(DegenerateMatrix):
            routh_hurwitz_2([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(DegenerateMatrix):
            routh_hurwitz_3(np.diag([-1.0, -1.0, 0.0]))

    @pytest.mark.parametrize("n, fn", [(2, routh_hurwitz_2), (3, routh_hurwitz_3)])
    def test_agrees_with_eigen_oracle(self, rng, n, fn):
        checked = 0
        for _ in range(2000):
            M = rng.uniform(-2, 2, (n, n))
            a = spectral_abscissa(M)
            if abs(np.linalg.det(M)) < 1e-9 or abs(a) < 1e-9:
                continue
            assert fn(M) == (a < 0)
            checked += 1
        assert checked > 1900


def test_trace_identity_3x3(rng):
    for _ in range(200):
        M = rng.uniform(-2, 2, (3, 3))
        if abs(np.linalg.det(M)) < 1e-3:
            continue
        lhs = np.trace(M @ M) - np.trace(M) ** 2
        rhs = -2 * np.linalg.det(M) * np.trace(np.linalg.inv(M))
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs), abs(rhs))


class TestLyapunov:
    def test_minus_identity(self):
        np.testing.assert_allclose(lyapunov_certificate(-np.eye(3)), np.eye(3) / 2, atol=1e-14)

    def test_unstable_has_none(self):
        assert lyapunov_certificate(UNSTABLE) is None

    def test_random_negative_definite(self, rng):
        P = rng.normal(size=(5, 5))
        M = -P @ P.T
        X = lyapunov_certificate(M)
        assert X is not None
        np.testing.assert_allclose(X, X.T)
        assert np.min(np.linalg.eigvalsh(X)) > 0
        assert np.max(np.linalg.eigvalsh(M.T @ X + X @ M)) < 0

    def test_singular_operator(self):
        with pytest.raises(NoUniqueSolution):
            lyapunov_certificate([[0.0, 1.0], [-1.0, 0.0]])

    def test_iff_hurwitz(self, rng):
        for _ in range(200):
            M = rng.uniform(-2, 2, (4, 4))
            try:
                X = lyapunov_certificate(M)
            except NoUniqueSolution:
                continue
            assert (X is not None) == is_hurwitz_eigen(M).is_hurwitz

    def test_report(self):
        r = lyapunov_report(-np.eye(2))
        assert r.is_hurwitz and r.method is Method.LYAPUNOV and r.lyapunov_X is not None


class TestConcavity:
    def test_examples(self):
        assert diag_strict_concavity_check(-np.eye(3))
        assert not diag_strict_concavity_check(UNSTABLE)
        J = np.array([[-1.0, 2.0], [0.0, -1.0]])
        assert not diag_strict_concavity_check(J, [1.0, 1.0])
        assert diag_strict_concavity_check(J, [1.0, 4.0])

    def test_sufficiency(self, rng):
        for _ in range(500):
            J = rng.uniform(-2, 2, (3, 3)) - 1.5 * np.eye(3)
            w = rng.uniform(0.1, 5, 3)
            if diag_strict_concavity_check(J, w):
                assert is_hurwitz_eigen(w[:, None] * J).is_hurwitz

    def test_lambda_max_sym(self):
        assert lambda_max_sym(UNSTABLE) == pytest.approx(4.0)


class TestIntegrateLinear:
    def test_decoupled(self):
        s = LinearLoopSystem(-np.eye(2), np.zeros(2))
        tr = integrate_linear(s, [1.0, 1.0], 1.0, 1e-2)
        np.testing.assert_allclose(tr.final, np.exp(-1) * np.ones(2), rtol=1e-12)
        assert tr.times[-1] == pytest.approx(1.0)

    def test_equilibrium_is_constant(self):
        s = LinearLoopSystem([[-1.0, 0.5], [0.2, -2.0]], [1.0, 2.0])
        tr = integrate_linear(s, s.theta_star, 2.0, 0.1)
        np.testing.assert_allclose(tr.states, np.tile(s.theta_star, (len(tr), 1)), atol=1e-12)

    def test_error_decreases(self, rng):
        s = LinearLoopSystem(-np.eye(4) + 0.1 * rng.normal(size=(4, 4)), rng.normal(size=4))
        tr = integrate_linear(s, np.zeros(4), 10.0, 0.5)
        err = np.linalg.norm(tr.states - s.theta_star, axis=1)
        assert err[-1] < err[len(err) // 2] < err[0]

    def test_matches_rk4(self, rng):
        A = random_hurwitz(rng, 4, margin=0.3)
        s = LinearLoopSystem(A, rng.normal(size=4))
        th0 = rng.normal(size=4)
        ex = integrate_linear(s, th0, 2.0, 1e-3)
        rk = integrate_ode(LinearEvaluator(s), np.eye(4), th0, 2.0, 1e-3)
        assert np.max(np.abs(ex.states - rk.states)) <= 1e-6

    def test_validation(self):
        s = LinearLoopSystem(-np.eye(2), np.zeros(2))
        with pytest.raises(ValueError):
            integrate_linear(s, np.zeros(2), 1.0, 0.0)
        with pytest.raises(ValueError):
            integrate_linear(s, np.zeros(2), 0.01, 0.1)
