"""Core data model for systems of interacting control loops.

A system of ``I`` loops is described by the update field ``F(theta)``; in the
linear case ``F(theta) = A theta + b`` with equilibrium ``theta* = -A^{-1} b``.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SingularSystem

__all__ = [
    "INVERTIBILITY_RTOL",
    "LinearLoopSystem",
    "KpiEvaluator",
    "LinearEvaluator",
    "FunctionEvaluator",
    "SparsityPattern",
    "WeightVector",
    "neighbor_sets",
    "pattern_from_adjacency",
    "is_invertible",
]

# smallest/largest singular value ratio below which A is treated as singular
INVERTIBILITY_RTOL = 1e-10


def _frozen(a, ndim, name, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def is_invertible(A, rtol=INVERTIBILITY_RTOL):
    """Singular-value test: ``sigma_min >= rtol * sigma_max``."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return False
    s = np.linalg.svd(A, compute_uv=False)
    return bool(s[0] > 0 and s[-1] >= rtol * s[0])


@dataclass(frozen=True)
class LinearLoopSystem:
    """Linearized multi-loop model ``F(theta) = A theta + b``.

    Parameters
    ----------
    A : (I, I) array_like
        Response of the update vector to parameter deviations.
    b : (I,) array_like
        Offset.
    names : sequence of str, optional
        One label per loop.
    """

    A: np.ndarray
    b: np.ndarray
    names: tuple | None = None

    def __post_init__(self):
        A = _frozen(self.A, 2, "A")
        b = _frozen(self.b, 1, "b")
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != A.shape[0]:
                raise ValueError("names must have one entry per loop")
            object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def invertible(self) -> bool:
        return is_invertible(self.A)

    @property
    def theta_star(self) -> np.ndarray:
        """Equilibrium ``-A^{-1} b``; raises SingularSystem if A is singular."""
        if not self.invertible:
            raise SingularSystem("A is singular; equilibrium is not unique")
        return -np.linalg.solve(self.A, self.b)

    def field(self, theta) -> np.ndarray:
        return self.A @ np.asarray(theta, dtype=float) + self.b

    def to_dict(self) -> dict:
        d = {"A": self.A.tolist(), "b": self.b.tolist()}
        if self.names is not None:
            d["names"] = list(self.names)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LinearLoopSystem":
        A = d["A"]
        b = d.get("b")
        if b is None:
            b = [0.0] * len(A)
        return cls(A, b, d.get("names"))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> "LinearLoopSystem":
        return cls.from_dict(json.loads(s))


class KpiEvaluator(ABC):
    """Evaluation contract for a loop update field ``F``.

    Subclasses implement :meth:`mean`, the noiseless field. :meth:`evaluate`
    optionally adds i.i.d. Gaussian noise drawn from a supplied generator.
    """

    dim: int
    targets: np.ndarray | None = None

    @abstractmethod
    def mean(self, theta) -> np.ndarray:
        ...

    def evaluate(self, theta, rng: np.random.Generator | None = None,
                 noise_std: float = 0.0) -> np.ndarray:
        F = np.asarray(self.mean(theta), dtype=float)
        if rng is not None and noise_std > 0:
            F = F + rng.normal(0.0, noise_std, size=F.shape)
        return F

    def __call__(self, theta) -> np.ndarray:
        return self.evaluate(theta)

    @property
    def theta_star(self) -> np.ndarray | None:
        return None


class LinearEvaluator(KpiEvaluator):
    """``F(theta) = A theta + b``, in zero-finding form with targets ``-b``."""

    def __init__(self, system: LinearLoopSystem):
        self.system = system
        self.dim = system.dim
        self.targets = -system.b

    def mean(self, theta):
        return self.system.field(theta)

    @property
    def theta_star(self):
        return self.system.theta_star


class FunctionEvaluator(KpiEvaluator):
    """Wrap a plain callable ``theta -> F(theta)``."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], dim: int,
                 targets=None, theta_star=None):
        self.func = func
        self.dim = int(dim)
        self.targets = None if targets is None else np.asarray(targets, float)
        self._theta_star = None if theta_star is None else np.asarray(theta_star, float)

    def mean(self, theta):
        return np.asarray(self.func(np.asarray(theta, dtype=float)), dtype=float)

    @property
    def theta_star(self):
        return self._theta_star


@dataclass(frozen=True)
class SparsityPattern:
    """Boolean mask of coordination entries allowed to be nonzero.

    The diagonal is always allowed.
    """

    allowed: np.ndarray

    def __post_init__(self):
        m = np.array(self.allowed, dtype=bool, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"pattern must be square, got shape {m.shape}")
        np.fill_diagonal(m, True)
        m.setflags(write=False)
        object.__setattr__(self, "allowed", m)

    @property
    def dim(self) -> int:
        return self.allowed.shape[0]

    @classmethod
    def full(cls, n: int) -> "SparsityPattern":
        return cls(np.ones((n, n), dtype=bool))

    @classmethod
    def diagonal(cls, n: int) -> "SparsityPattern":
        return cls(np.eye(n, dtype=bool))

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.allowed & ~np.eye(self.dim, dtype=bool))

    def project(self, C) -> np.ndarray:
        """Zero out disallowed entries."""
        return np.where(self.allowed, np.asarray(C, dtype=float), 0.0)

    def __eq__(self, other):
        if not isinstance(other, SparsityPattern):
            return NotImplemented
        return self.allowed.shape == other.allowed.shape and bool(
            np.array_equal(self.allowed, other.allowed))

    def __hash__(self):
        return hash((self.allowed.shape, self.allowed.tobytes()))

    def contains(self, C, atol=0.0) -> bool:
        C = np.asarray(C)
        return bool(np.all(np.abs(C[~self.allowed]) <= atol))

    def to_dict(self) -> dict:
        return {"allowed": self.allowed.astype(int).tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SparsityPattern":
        return cls(np.asarray(d["allowed"]) != 0)


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive per-loop priorities."""

    w: np.ndarray = field()

    def __post_init__(self):
        w = _frozen(self.w, 1, "w")
        if w.size == 0 or not np.all(np.isfinite(w)) or np.min(w) <= 0:
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "w", w)

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls(np.ones(n))

    @property
    def W(self) -> np.ndarray:
        return np.diag(self.w)

    def __len__(self):
        return self.w.shape[0]


def neighbor_sets(system: LinearLoopSystem | np.ndarray, zero_tol: float = 1e-12
                  ) -> list[set[int]]:
    """Neighbor sets ``I_i = {j : |A[j, i]| > zero_tol}``.

    Loop ``j`` is a neighbor of loop ``i`` when its indicator responds to
    ``theta_i``. Indices are zero-based.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    A = system.A if isinstance(system, LinearLoopSystem) else np.asarray(system, float)
    mask = np.abs(A) > zero_tol
    return [set(np.flatnonzero(mask[:, i]).tolist()) for i in range(A.shape[0])]


def pattern_from_adjacency(adjacency: Sequence[Sequence[bool]] | np.ndarray
                           ) -> SparsityPattern:
    """Map a symmetric loop adjacency (who can exchange measurements) to a pattern."""
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {adj.shape}")
    adj = adj.astype(bool)
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    return SparsityPattern(adj | np.eye(adj.shape[0], dtype=bool))
