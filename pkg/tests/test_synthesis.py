import numpy as np
import pytest
from conftest import random_invertible

from soncoord.distributed import coordinate_2
from soncoord.errors import SingularSystem, SkippedDegenerate
from soncoord.stability import is_hurwitz_eigen, lambda_max_sym
from soncoord.synthesis import (SolverConfig, Status, SynthesisProblem, SynthesisSolution,
                                infeasibility_certificate, lambda_max_gradient,
                                subgradient_check, synthesize)
from soncoord.system_model import LinearLoopSystem, SparsityPattern, WeightVector

CYCLIC = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def chain_pattern(n):
    adj = np.eye(n, dtype=bool)
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = True
    return SparsityPattern(adj)


def problem(A, pattern=None, b=None, **kw):
    A = np.asarray(A, float)
    b = np.zeros(A.shape[0]) if b is None else b
    return SynthesisProblem(LinearLoopSystem(A, b), pattern, **kw)


class TestProblem:
    def test_default_delta(self):
        A = np.array([[-1.0, 3.0], [3.0, -1.0]])
        assert problem(A).delta == pytest.approx(1e-2 * 4.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            problem(-np.eye(2), SparsityPattern.full(3))
        with pytest.raises(ValueError):
            problem(-np.eye(2), delta=-1.0)
        with pytest.raises(ValueError):
            problem(-np.eye(2), weights=WeightVector([1.0, 1.0, 1.0]))

    def test_round_trip(self):
        p = problem([[-1.0, 3.0], [3.0, -1.0]], SparsityPattern.diagonal(2),
                    weights=WeightVector([1.0, 20.0]))
        q = SynthesisProblem.from_dict(p.to_dict())
        assert q.pattern == p.pattern and q.delta == p.delta
        np.testing.assert_array_equal(q.weights.w, [1.0, 20.0])

    def test_pattern_shorthands(self):
        d = {"system": {"A": [[-1.0, 0.0], [0.0, -1.0]], "b": [0.0, 0.0]}, "pattern": "diagonal"}
        assert SynthesisProblem.from_dict(d).pattern.is_diagonal
        d["pattern"] = "full"
        assert SynthesisProblem.from_dict(d).pattern == SparsityPattern.full(2)


class TestFullPattern:
    def test_recovers_inverse(self, rng):
        for _ in range(20):
            A = random_invertible(rng, 4, cond_max=1e3)
            s = synthesize(problem(A))
            Ainv = np.linalg.inv(A)
            assert s.status is Status.FEASIBLE
            assert s.objective <= 1e-6 * np.linalg.norm(Ainv, "fro")
            assert s.cond_CA <= 1.01
            np.testing.assert_allclose(s.C @ A, -np.eye(4), atol=1e-8)

    def test_singular(self):
        with pytest.raises(SingularSystem):
            synthesize(problem([[1.0, 2.0], [2.0, 4.0]]))


class TestConstrainedPattern:
    def test_pattern_respected_and_feasible(self, rng):
        pat = chain_pattern(4)
        for _ in range(10):
            A = rng.uniform(-2, 2, (4, 4)) - np.eye(4)
            b = rng.normal(size=4)
            p = problem(A, pat, b=b)
            s = synthesize(p)
            assert pat.contains(s.C)
            if s.status is Status.FEASIBLE:
                assert s.lambda_max_sym <= -p.delta / 2
                assert lambda_max_sym(s.C @ A) == pytest.approx(s.lambda_max_sym)
                assert is_hurwitz_eigen(s.C @ A).is_hurwitz
                th = p.system.theta_star
                scale = 1 + np.max(np.abs(s.C @ A)) * np.max(np.abs(th))
                assert np.max(np.abs(s.C @ A @ th + s.C @ b)) <= 1e-9 * scale

    def test_history_monotone(self, rng):
        A = rng.uniform(-2, 2, (4, 4)) - np.eye(4)
        s = synthesize(problem(A, chain_pattern(4)))
        vals = [h for h in s.history if h is not None]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_matches_sdp_oracle(self, rng):
        cp = pytest.importorskip("cvxpy")
        pat = chain_pattern(4)

        def oracle(A, delta):
            C = cp.Variable((4, 4))
            cons = [(C @ A) + (C @ A).T << -delta * np.eye(4)]
            cons += [C[i, j] == 0 for i, j in zip(*np.nonzero(~pat.allowed))]
            pr = cp.Problem(cp.Minimize(cp.norm(C + np.linalg.inv(A), "fro")), cons)
            pr.solve()
            return pr.value

        for _ in range(5):
            A = rng.uniform(-2, 2, (4, 4)) - np.eye(4)
            p = problem(A, pat)
            s = synthesize(p)
            assert s.status is Status.FEASIBLE
            # the returned C satisfies the margin delta/2 but targets delta
            assert s.objective >= oracle(A, p.delta / 2) * (1 - 1e-3) - 1e-6
            assert s.objective <= oracle(A, p.delta) * (1 + 1e-3) + 1e-6

    def test_row_weights_shift_residual(self, rng):
        A = np.array([[-1.0, 2.0, 0.0], [1.5, -1.0, 1.0], [0.0, 2.0, -1.0]])
        pat = SparsityPattern.diagonal(3)
        base = synthesize(problem(A, pat))
        heavy = synthesize(problem(A, pat, weights=WeightVector([1.0, 1.0, 20.0])))
        T = -np.linalg.inv(A)
        if base.status is Status.FEASIBLE and heavy.status is Status.FEASIBLE:
            assert abs(heavy.C[2, 2] - T[2, 2]) <= abs(base.C[2, 2] - T[2, 2]) + 1e-9


class TestInfeasibility:
    def test_cyclic_diagonal(self):
        s = synthesize(problem(CYCLIC, SparsityPattern.diagonal(3)))
        assert s.status is Status.INFEASIBLE and s.certificate

    def test_null_diagonal_inverse(self):
        # diagonal of A is negative, but A^-1 has a null diagonal
        A = np.linalg.inv(np.ones((3, 3)) - np.eye(3))
        assert np.all(np.diag(A) < 0)
        s = synthesize(problem(A, SparsityPattern.diagonal(3)))
        assert s.status is Status.INFEASIBLE and "null diagonal" in s.certificate

    def test_symmetric_unstable_diagonal(self):
        # a diagonal C can make CA Hurwitz but never make its symmetric part definite
        A = np.array([[-1.0, 3.0], [3.0, -1.0]])
        assert is_hurwitz_eigen(coordinate_2(A).C @ A).is_hurwitz
        s = synthesize(problem(A, SparsityPattern.diagonal(2)))
        assert s.status is Status.INFEASIBLE
        assert s.to_dict()["status"] == "Infeasible"

    def test_structural_zero(self):
        A = np.array([[0.0, 1.0], [0.0, -1.0]])
        assert infeasibility_certificate(A, SparsityPattern.diagonal(2)) is not None

    def test_no_certificate_for_full(self, rng):
        assert infeasibility_certificate(random_invertible(rng, 3), SparsityPattern.full(3)) is None

    def test_budget_exhaustion(self):
        # lower-triangular-only coupling with tiny budget cannot reach the margin
        A = np.array([[-1.0, 3.0, 0.0], [3.0, -1.0, 0.5], [0.0, 0.5, -1.0]])
        pat = chain_pattern(3)
        s = synthesize(problem(A, pat), SolverConfig(outer_rounds=1, inner_steps=1))
        assert s.status in (Status.FEASIBLE, Status.MAX_ITERATIONS)
        assert pat.contains(s.C)


class TestSubgradient:
    def test_identity(self):
        _, G = lambda_max_gradient(np.eye(2) + np.diag([0.5, 0.0]), np.eye(2))
        # leading eigenvector e1: d/dC11 of lambda_max(CA + (CA)^T) = 2 v1 (A v)_1 = 2
        assert G[0, 0] == pytest.approx(2.0)
        assert subgradient_check(np.diag([1.5, 1.0]), np.eye(2)) <= 1e-6

    def test_random(self, rng):
        for _ in range(20):
            C, A = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
            assert subgradient_check(C, A) <= 1e-4

    def test_pattern_holes(self, rng):
        pat = chain_pattern(4)
        C, A = pat.project(rng.normal(size=(4, 4))), rng.normal(size=(4, 4))
        _, G = lambda_max_gradient(C, A, pat)
        assert np.all(G[~pat.allowed] == 0)
        assert subgradient_check(C, A, pat) <= 1e-4

    def test_degenerate(self):
        with pytest.raises(SkippedDegenerate):
            subgradient_check(np.eye(2), np.eye(2))


def test_solution_serializes():
    s = synthesize(problem([[-2.0, 1.0], [0.5, -1.0]]))
    d = s.to_dict()
    assert set(d) >= {"C", "objective", "lambda_max_sym", "iterations", "status", "cond_CA"}
    assert isinstance(s, SynthesisSolution)
