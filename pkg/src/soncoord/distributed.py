"""Closed-form coordination matrices.

Diagonal (fully distributed) coordinators need no exchange of measurements
between loops. The gradient coordinator ``C = -A^T W`` only needs exchange
between neighbors.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (DegenerateMatrix, EpsilonNotFound, HypothesisViolated,
                     NotCoordinatable, ScheduleExhausted, SingularSystem,
                     SingularWarning, StandAloneUnstable)
from .stability import DEGENERACY_RTOL, is_hurwitz_eigen, lambda_max_sym, routh_hurwitz_3
from .system_model import WeightVector, is_invertible

__all__ = [
    "DiagonalCoordinator",
    "coordinate_2",
    "coordinate_3",
    "default_epsilon_schedule",
    "fisher_fuller",
    "gradient_coordinator",
]


@dataclass(frozen=True)
class DiagonalCoordinator:
    """Per-loop feedback gains ``c``; the coordination matrix is ``diag(c)``."""

    c: np.ndarray
    epsilon: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)) or np.any(c == 0):
            raise ValueError("gains must be finite and nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def C(self) -> np.ndarray:
        return np.diag(self.c)

    def to_dict(self) -> dict:
        d = {"c": self.c.tolist()}
        if self.epsilon is not None:
            d["epsilon"] = self.epsilon
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d

    @classmethod
    def from_dict(cls, d) -> "DiagonalCoordinator":
        return cls(d["c"], d.get("epsilon"), d.get("gamma"))


def _matrix(A, n=None):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if n is not None and A.shape[0] != n:
        raise ValueError(f"A must be {n}x{n}")
    return A


def coordinate_2(A) -> DiagonalCoordinator:
    """Diagonal stabilizer for two loops.

    ``diag(c) A`` is Hurwitz iff ``c1 A11 + c2 A22 < 0`` and
    ``c1 c2 det(A) > 0``; the returned ``c = (1, sign(det A) |A11| / (2 |A22|))``
    satisfies both whenever both diagonal entries are negative.
    """
    A = _matrix(A, 2)
    if not (A[0, 0] < 0 and A[1, 1] < 0):
        raise StandAloneUnstable("both diagonal entries of A must be strictly negative")
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) <= DEGENERACY_RTOL * np.max(np.abs(A)) ** 2:
        raise SingularSystem("A is singular")
    c2 = np.sign(det) * abs(A[0, 0]) / (2.0 * abs(A[1, 1]))
    return DiagonalCoordinator(np.array([1.0, c2]))


def default_epsilon_schedule() -> np.ndarray:
    """1, 1/2, 1/4, ..., 2^-30."""
    return 2.0 ** -np.arange(31)


def _routh3_ok(M) -> bool:
    try:
        return routh_hurwitz_3(M, tol=0.0)
    except DegenerateMatrix:
        return False


def coordinate_3(A, epsilon_search: Iterable[float] | None = None,
                 lookahead: int = 3) -> DiagonalCoordinator:
    """Diagonal stabilizer for three loops, ``C(eps) = diag(1, eps c2, eps c3)``.

    Loop indices are permuted internally so that ``A11 < 0`` and
    ``(A^-1)_22 != 0``; the gains are returned in the caller's ordering.
    The first ``eps`` of the decreasing schedule for which ``C(eps) A`` passes
    the 3x3 Routh-Hurwitz test, and keeps passing for ``lookahead`` further
    halvings, is used.

    Raises
    ------
    NotCoordinatable
        ``A^-1`` has a null diagonal, so no diagonal ``C`` can work.
    StandAloneUnstable
        No ordering places a negative entry of A first with ``(A^-1)_22 != 0``.
    EpsilonNotFound
        The schedule is exhausted.
    """
    A = _matrix(A, 3)
    if not is_invertible(A):
        raise SingularSystem("A is singular")
    B = np.linalg.inv(A)
    bscale = np.max(np.abs(B))
    nonzero = np.abs(np.diag(B)) > DEGENERACY_RTOL * bscale
    if not np.any(nonzero):
        raise NotCoordinatable("A^-1 has a null diagonal")

    perm = None
    for p in itertools.permutations(range(3)):
        if A[p[0], p[0]] < 0 and nonzero[p[1]]:
            perm = list(p)
            break
    if perm is None:
        raise StandAloneUnstable("no ordering with A11 < 0 and (A^-1)_22 != 0")

    Ap = A[np.ix_(perm, perm)]
    Bp = B[np.ix_(perm, perm)]
    sdet = np.sign(np.linalg.det(Ap))
    c2 = -Bp[1, 1]
    if nonzero[perm[2]]:
        c3 = -2.0 * np.sign(sdet * c2) * abs(Bp[2, 2])
    else:
        c3 = -np.sign(sdet * c2)

    schedule = default_epsilon_schedule() if epsilon_search is None else epsilon_search
    for eps in schedule:
        eps = float(eps)
        if not eps > 0:
            raise ValueError("epsilon schedule must be positive")
        trial = [eps / 2 ** j for j in range(lookahead + 1)]
        if all(_routh3_ok(np.diag([1.0, e * c2, e * c3]) @ Ap) for e in trial):
            cp = np.array([1.0, eps * c2, eps * c3])
            c = np.empty(3)
            c[perm] = cp
            return DiagonalCoordinator(c, epsilon=eps)
    raise EpsilonNotFound("no epsilon in the schedule stabilizes C(eps) A")


def _leading_minors(A):
    n = A.shape[0]
    return np.array([np.linalg.det(A[:k, :k]) for k in range(1, n + 1)])


def fisher_fuller(A, gamma: float = 1e-2, shrink: float = 10.0, retries: int = 6,
                  require_sym: bool = False) -> DiagonalCoordinator:
    """Diagonal stabilizer when all leading principal minors of A are nonzero.

    Signs follow ``(-1)^i c_1 ... c_i det(A[:i, :i]) > 0``, so the leading
    principal minors of ``CA`` alternate in sign starting negative.
    Magnitudes are ``|c_i| = gamma^(i-1)``; ``gamma`` shrinks by ``shrink``
    until ``CA`` is Hurwitz (or, with ``require_sym``, until
    ``CA + (CA)^T`` is negative definite), for at most ``retries`` retries.

    Raises
    ------
    HypothesisViolated
        A leading principal submatrix is singular.
    ScheduleExhausted
        No ``gamma`` within the retry budget produced a certified ``C``.
    """
    A = _matrix(A)
    n = A.shape[0]
    d = _leading_minors(A)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    for k in range(n):
        if abs(d[k]) <= DEGENERACY_RTOL * scale ** (k + 1):
            raise HypothesisViolated(f"leading principal minor of order {k + 1} is singular")
    # sign(c_1...c_i) = (-1)^i sign(d_i)  =>  sign(c_i) = -sign(d_i) sign(d_{i-1})
    sd = np.sign(np.concatenate([[1.0], d]))
    signs = -sd[1:] * sd[:-1]

    g = float(gamma)
    for _ in range(retries + 1):
        c = signs * g ** np.arange(n)
        CA = c[:, None] * A
        ok = lambda_max_sym(CA) < 0 if require_sym else is_hurwitz_eigen(CA).is_hurwitz
        if ok:
            return DiagonalCoordinator(c, gamma=g)
        g /= shrink
    raise ScheduleExhausted("magnitude schedule exhausted")


def gradient_coordinator(A, w: WeightVector | np.ndarray | None = None) -> np.ndarray:
    """``C = -A^T diag(w)``, which makes ``CA = -A^T W A`` symmetric.

    ``C[i, j]`` is nonzero only where loop ``j``'s indicator depends on
    ``theta_i``, so each loop needs measurements from its neighbors only.
    Emits :class:`SingularWarning` if A is singular (``CA`` is then only
    negative semidefinite).
    """
    A = _matrix(A)
    if w is None:
        w = np.ones(A.shape[0])
    w = w.w if isinstance(w, WeightVector) else WeightVector(w).w
    if w.shape[0] != A.shape[0]:
        raise ValueError("weights must have one entry per loop")
    if not is_invertible(A):
        warnings.warn("A is singular; -A^T W A is not negative definite",
                      SingularWarning, stacklevel=2)
    return -A.T * w[None, :]
