"""Sparsity-constrained coordination synthesis.

Solves

    minimize    || W_row (C + A^-1) ||_F
    subject to  CA + (CA)^T <= -delta I,   C[i, j] = 0 where not allowed

with a projected first-order penalty method. The penalty is
``mu * sum_k max(0, lambda_k(CA + (CA)^T) + delta)^2``, i.e. the squared
distance of ``CA + (CA)^T + delta I`` to the negative semidefinite cone. It is
convex and continuously differentiable in ``C``; when only the leading
eigenvalue violates the margin it reduces to ``mu * max(0, lambda_max + delta)^2``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import SingularSystem, SkippedDegenerate
from .system_model import LinearLoopSystem, SparsityPattern, WeightVector, is_invertible

__all__ = [
    "Status",
    "SolverConfig",
    "SynthesisProblem",
    "SynthesisSolution",
    "synthesize",
    "infeasibility_certificate",
    "lambda_max_gradient",
    "subgradient_check",
]

log = logging.getLogger(__name__)


class Status(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SolverConfig:
    outer_rounds: int = 20
    inner_steps: int = 2000
    mu0: float = 1.0
    mu_growth: float = 10.0
    restarts: int = 0
    seed: int = 0
    perturbation: float = 0.3
    armijo: float = 1e-4

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class SynthesisProblem:
    """System, allowed pattern, definiteness margin and optional row weights.

    ``delta`` defaults to ``1e-2 * ||A||_2``.
    """

    system: LinearLoopSystem
    pattern: SparsityPattern | None = None
    delta: float | None = None
    weights: WeightVector | None = None

    def __post_init__(self):
        n = self.system.dim
        if self.pattern is None:
            object.__setattr__(self, "pattern", SparsityPattern.full(n))
        if self.pattern.dim != n:
            raise ValueError("pattern dimension does not match the system")
        if self.delta is None:
            object.__setattr__(self, "delta", 1e-2 * float(np.linalg.norm(self.system.A, 2)))
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.weights is not None and len(self.weights) != n:
            raise ValueError("weights must have one entry per loop")

    def to_dict(self) -> dict:
        d = {"system": self.system.to_dict(), "pattern": self.pattern.to_dict(),
             "delta": self.delta}
        if self.weights is not None:
            d["weights"] = self.weights.w.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthesisProblem":
        system = LinearLoopSystem.from_dict(d["system"])
        pat = d.get("pattern", "full")
        n = system.dim
        if pat == "full" or pat is None:
            pattern = SparsityPattern.full(n)
        elif pat == "diagonal":
            pattern = SparsityPattern.diagonal(n)
        else:
            pattern = SparsityPattern.from_dict(pat)
        w = d.get("weights")
        return cls(system, pattern, d.get("delta"), None if w is None else WeightVector(w))


@dataclass
class SynthesisSolution:
    C: np.ndarray
    objective: float
    lambda_max_sym: float
    iterations: int
    status: Status
    weighted_objective: float = float("nan")
    cond_CA: float = float("nan")
    certificate: str | None = None
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "C": self.C.tolist(),
            "objective": self.objective,
            "weighted_objective": self.weighted_objective,
            "lambda_max_sym": self.lambda_max_sym,
            "iterations": self.iterations,
            "status": self.status.value,
            "cond_CA": self.cond_CA,
            "certificate": self.certificate,
            "history": list(self.history),
        }


def infeasibility_certificate(A, pattern: SparsityPattern) -> str | None:
    """Closed-form proof that no allowed ``C`` makes ``CA + (CA)^T`` negative definite.

    Checks, in order:

    * a loop whose allowed row of ``C`` cannot reach ``(CA)_ii`` (diagonal of
      the symmetric part is structurally zero);
    * diagonal pattern, ``A^-1`` with null diagonal: ``tr((CA)^-1) = 0`` for
      every diagonal ``C``, while a negative definite symmetric part forces
      ``tr((CA)^-1) < 0``;
    * diagonal pattern, a 2x2 principal submatrix with
      ``A_ii A_jj det(A_[ij]) <= 0``, which cannot be made negative definite
      by any diagonal scaling.

    Returns a short reason, or None when no certificate applies.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    allowed = pattern.allowed
    for i in range(n):
        if not np.any(allowed[i] & (A[:, i] != 0)):
            return f"(CA)[{i},{i}] is structurally zero"
    if not pattern.is_diagonal:
        return None
    B = np.linalg.inv(A)
    if np.all(np.abs(np.diag(B)) <= 1e-9 * np.max(np.abs(B))):
        return "diagonal pattern and A^-1 has a null diagonal"
    for i, j in itertools.combinations(range(n), 2):
        det = A[i, i] * A[j, j] - A[i, j] * A[j, i]
        if A[i, i] * A[j, j] * det <= 0:
            return f"diagonal pattern and 2x2 block ({i},{j}) is not diagonally stabilizable"
    return None


def _sym_eig(C, A):
    M = C @ A
    return np.linalg.eigh(M + M.T)


def lambda_max_gradient(C, A, pattern: SparsityPattern | None = None):
    """Leading eigenvalue of ``CA + (CA)^T`` and its gradient in ``C``.

    With ``v`` the unit leading eigenvector, ``d lambda / d C = 2 v (A v)^T``.
    """
    C = np.asarray(C, dtype=float)
    A = np.asarray(A, dtype=float)
    lam, V = _sym_eig(C, A)
    v = V[:, -1]
    G = 2.0 * np.outer(v, A @ v)
    if pattern is not None:
        G = pattern.project(G)
    return float(lam[-1]), G


def subgradient_check(C, A, pattern: SparsityPattern | None = None,
                      step: float = 1e-6, gap_tol: float = 1e-8) -> float:
    """Compare the analytic gradient of ``lambda_max(CA + (CA)^T)`` with central differences.

    Returns ``max |analytic - fd| / max |analytic|`` over allowed entries;
    disallowed entries are compared against zero.
    """
    C = np.asarray(C, dtype=float)
    A = np.asarray(A, dtype=float)
    n = C.shape[0]
    lam, _ = _sym_eig(C, A)
    if n > 1 and lam[-1] - lam[-2] <= gap_tol:
        raise SkippedDegenerate("leading eigenvalue is not simple")
    _, G = lambda_max_gradient(C, A, pattern)
    mask = np.ones((n, n), bool) if pattern is None else pattern.allowed
    fd = np.zeros((n, n))
    for i, j in zip(*np.nonzero(mask)):
        E = np.zeros((n, n))
        E[i, j] = step
        fd[i, j] = (_sym_eig(C + E, A)[0][-1] - _sym_eig(C - E, A)[0][-1]) / (2 * step)
    scale = max(np.max(np.abs(G)), np.finfo(float).tiny)
    return float(np.max(np.abs(G - fd)) / scale)


class _Penalized:
    """Value and masked gradient of the penalized objective."""

    def __init__(self, A, T, mask, rw2, delta):
        self.A, self.T, self.mask, self.rw2, self.delta = A, T, mask, rw2, delta

    def __call__(self, C, mu):
        R = C - self.T
        obj = float(np.sum(self.rw2[:, None] * R * R))
        lam, V = _sym_eig(C, self.A)
        viol = np.maximum(lam + self.delta, 0.0)
        pen = float(viol @ viol)
        # d/dC sum h(lambda_k + delta) = sum 2 viol_k * 2 v_k (A v_k)^T
        GS = (V * (2.0 * viol)) @ V.T
        grad = 2.0 * self.rw2[:, None] * R + mu * 2.0 * GS @ self.A.T
        grad[~self.mask] = 0.0
        return obj + mu * pen, grad, obj, float(lam[-1])


def _record(best, C, obj, lam, delta, fn):
    """Keep the best certified iterate.

    The feasible set is a cone, so an iterate with ``lambda_max < 0`` that
    misses the margin is scaled onto ``lambda_max = -0.6 delta``.
    """
    if lam <= -delta / 2:
        cand = (obj, C.copy(), lam)
    elif lam < 0:
        t = 0.6 * delta / -lam
        Ct = t * C
        R = Ct - fn.T
        cand = (float(np.sum(fn.rw2[:, None] * R * R)), Ct, t * lam)
    else:
        return best
    if best is None or cand[0] < best[0]:
        return cand
    return best


def _solve_once(problem: SynthesisProblem, config: SolverConfig, C0):
    A = problem.system.A
    n = A.shape[0]
    T = -np.linalg.inv(A)
    mask = problem.pattern.allowed
    rw = np.ones(n) if problem.weights is None else problem.weights.w
    delta = problem.delta
    fn = _Penalized(A, T, mask, rw * rw, delta)

    C = np.where(mask, C0, 0.0)
    best = None  # (weighted obj, C, lam)
    history = []
    iters = 0
    mu = config.mu0
    prev_viol = np.inf
    for rnd in range(config.outer_rounds):
        f, g, obj, lam = fn(C, mu)
        alpha = 1.0 / max(1.0, 2.0 * float(np.max(rw)) ** 2 + 4.0 * mu * np.linalg.norm(A, 2) ** 2)
        prev_C, prev_g = None, None
        converged = False
        for _ in range(config.inner_steps):
            gn2 = float(np.sum(g * g))
            if gn2 <= 1e-28 * (1.0 + f):
                converged = True
                break
            if prev_C is not None:
                s = C - prev_C
                y = g - prev_g
                sy = float(np.sum(s * y))
                if sy > 0:
                    alpha = float(np.sum(s * s)) / sy
            # Armijo backtracking on the masked gradient direction
            while True:
                Cn = C - alpha * g
                fn_, gn_, objn, lamn = fn(Cn, mu)
                if fn_ <= f - config.armijo * alpha * gn2 or alpha < 1e-300:
                    break
                alpha *= 0.5
            iters += 1
            prev_C, prev_g = C, g
            decrease = f - fn_
            C, f, g, obj, lam = Cn, fn_, gn_, objn, lamn
            best = _record(best, C, obj, lam, delta, fn)
            if decrease <= 1e-15 * (1.0 + abs(f)):
                converged = True
                break
        best = _record(best, C, obj, lam, delta, fn)
        history.append(None if best is None else float(np.sqrt(best[0])))
        viol = max(lam + delta, 0.0)
        log.debug("round %d mu=%.3g obj=%.6g lam=%.6g viol=%.3g", rnd, mu, obj, lam, viol)
        if converged and viol <= 1e-4 * delta:
            break
        if best is not None and lam > -delta / 2 and viol > 0.5 * prev_viol:
            # penalty path stalled short of the margin: continue from the
            # best certified point instead
            C = best[1].copy()
        prev_viol = viol
        mu *= config.mu_growth
    return best, C, lam, iters, history


def _finish(problem, C, lam, iters, status, history, certificate=None):
    A = problem.system.A
    Ainv = np.linalg.inv(A)
    rw = np.ones(A.shape[0]) if problem.weights is None else problem.weights.w
    R = C + Ainv
    return SynthesisSolution(
        C=C,
        objective=float(np.linalg.norm(R, "fro")),
        lambda_max_sym=float(lam),
        iterations=int(iters),
        status=status,
        weighted_objective=float(np.linalg.norm(rw[:, None] * R, "fro")),
        cond_CA=float(np.linalg.cond(C @ A)),
        certificate=certificate,
        history=history,
    )


def synthesize(problem: SynthesisProblem, config: SolverConfig | None = None
               ) -> SynthesisSolution:
    """Find the allowed ``C`` closest to ``-A^-1`` with ``CA + (CA)^T <= -delta I``.

    Returns the best iterate with ``lambda_max(CA + (CA)^T) <= -delta/2``
    (status ``Feasible``). When a closed-form certificate proves that no
    allowed ``C`` exists the status is ``Infeasible``; otherwise an
    unsuccessful run ends with ``MaxIterations`` and the last iterate.
    With ``config.restarts > 0`` unsuccessful runs are repeated from randomly
    perturbed starts, restart ``r`` seeded by ``(config.seed, r)``.

    Raises
    ------
    SingularSystem
        If A is singular.
    """
    config = config or SolverConfig()
    A = problem.system.A
    if not is_invertible(A):
        raise SingularSystem("A is singular; -A^-1 is undefined")
    n = A.shape[0]
    mask = problem.pattern.allowed
    T = -np.linalg.inv(A)

    cert = infeasibility_certificate(A, problem.pattern)
    if cert is not None:
        C = np.where(mask, T, 0.0)
        lam = float(_sym_eig(C, A)[0][-1])
        return _finish(problem, C, lam, 0, Status.INFEASIBLE, [], cert)

    total = 0
    C0 = np.where(mask, T, 0.0)
    for r in range(config.restarts + 1):
        if r > 0:
            rng = np.random.default_rng([config.seed, r])
            scale = config.perturbation * np.linalg.norm(T, "fro") / np.sqrt(n)
            C0 = np.where(mask, T + scale * rng.standard_normal((n, n)), 0.0)
        best, C, lam, iters, history = _solve_once(problem, config, C0)
        total += iters
        if best is not None:
            return _finish(problem, best[1], best[2], total, Status.FEASIBLE, history)
    return _finish(problem, C, lam, total, Status.MAX_ITERATIONS, history)


def with_restarts(config: SolverConfig, restarts: int) -> SolverConfig:
    return replace(config, restarts=restarts)
