"""Estimating ``(A, b)`` from noisy field evaluations, and an operating-condition store."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import NotFound, RankDeficient
from .system_model import KpiEvaluator

__all__ = [
    "SampleSet",
    "finite_difference_estimate",
    "least_squares_estimate",
    "ConditionEntry",
    "ConditionDatabase",
]

RANK_RTOL = 1e-10


@dataclass
class SampleSet:
    """Rows of observed ``(theta, y = F(theta) + noise)``."""

    theta: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if self.theta.shape != self.y.shape:
            raise ValueError(f"theta {self.theta.shape} and y {self.y.shape} differ in shape")

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def __len__(self):
        return self.theta.shape[0]

    @classmethod
    def collect(cls, evaluator: KpiEvaluator, thetas, rng=None, noise_std=0.0):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        ys = np.array([evaluator.evaluate(t, rng, noise_std) for t in thetas])
        return cls(thetas, ys)

    def to_csv(self, path):
        n = self.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"theta_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)])
            for t, y in zip(self.theta, self.y):
                w.writerow([repr(float(v)) for v in np.concatenate([t, y])])

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        n = sum(h.startswith("theta_") for h in header)
        if len(header) != 2 * n:
            raise ValueError("CSV header must be theta_1..theta_I,y_1..y_I")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, :n], data[:, n:])


def finite_difference_estimate(evaluator: KpiEvaluator, theta0, delta=None, repeats: int = 1,
                               rng: np.random.Generator | None = None,
                               noise_std: float = 0.0, boxes=None):
    """Central-difference estimate of the Jacobian and offset at ``theta0``.

    Column ``i`` of ``A_hat`` is ``(F(theta0 + e_i d_i) - F(theta0 - e_i d_i)) / (2 d_i)``
    averaged over ``repeats`` noisy evaluations; ``b_hat`` is the mean of
    ``F(theta0) - A_hat theta0``. Without ``delta`` the steps default to a
    tenth of each box width (``boxes`` is an (I, 2) array).

    Returns
    -------
    A_hat : (I, I) ndarray
    b_hat : (I,) ndarray
    """
    theta0 = np.asarray(theta0, dtype=float)
    n = theta0.shape[0]
    if delta is None:
        if boxes is None:
            raise ValueError("either delta or boxes is required")
        bx = np.asarray(boxes, dtype=float)
        delta = 0.1 * (bx[:, 1] - bx[:, 0])
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (n,))
    if np.any(delta <= 0):
        raise ValueError("finite-difference steps must be positive")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    A = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = delta[i]
        acc = np.zeros(n)
        for _ in range(repeats):
            acc += (evaluator.evaluate(theta0 + e, rng, noise_std)
                    - evaluator.evaluate(theta0 - e, rng, noise_std))
        A[:, i] = acc / (2.0 * delta[i] * repeats)
    F0 = np.mean([evaluator.evaluate(theta0, rng, noise_std) for _ in range(repeats)], axis=0)
    b = F0 - A @ theta0
    return A, b


def least_squares_estimate(samples: SampleSet):
    """Affine regression ``y ~ A theta + b`` by Householder QR.

    Returns
    -------
    A_hat, b_hat, residual_rms

    Raises
    ------
    RankDeficient
        If ``[theta, 1]`` does not have full column rank; the exception
        carries a null-space direction.
    """
    X = np.column_stack([samples.theta, np.ones(len(samples))])
    sv, Vt = np.linalg.svd(X, full_matrices=False)[1:]
    if X.shape[0] < X.shape[1] or sv[-1] <= RANK_RTOL * sv[0]:
        direction = Vt[-1] if X.shape[0] >= X.shape[1] else None
        raise RankDeficient("design matrix [theta, 1] is rank deficient", direction)
    Q, R = np.linalg.qr(X)
    coef = scipy.linalg.solve_triangular(R, Q.T @ samples.y)
    A = coef[:-1].T
    b = coef[-1]
    resid = samples.y - X @ coef
    return A, b, float(np.sqrt(np.mean(resid ** 2)))


@dataclass(frozen=True)
class ConditionEntry:
    A: np.ndarray
    b: np.ndarray
    n: int
    rms: float

    def to_dict(self) -> dict:
        return {"A": np.asarray(self.A).tolist(), "b": np.asarray(self.b).tolist(),
                "n": int(self.n), "rms": float(self.rms)}

    @classmethod
    def from_dict(cls, d) -> "ConditionEntry":
        return cls(np.asarray(d["A"], float), np.asarray(d["b"], float), int(d["n"]),
                   float(d["rms"]))


class ConditionDatabase:
    """``(A, b)`` estimates keyed by operating condition (e.g. ``"H14"``).

    Persisted as one JSON document ``{key: {"A", "b", "n", "rms"}}``.
    """

    def __init__(self, dim: int | None = None):
        self.dim = dim
        self._entries: dict[str, ConditionEntry] = {}

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def keys(self):
        return sorted(self._entries)

    def put(self, key: str, A, b, n: int = 0, rms: float = 0.0) -> ConditionEntry:
        if not key:
            raise ValueError("key must be nonempty")
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
            raise ValueError("A must be square and b must match")
        if self.dim is None:
            self.dim = A.shape[0]
        elif A.shape[0] != self.dim:
            raise ValueError(f"entry dimension {A.shape[0]} != database dimension {self.dim}")
        entry = ConditionEntry(A, b, int(n), float(rms))
        self._entries[key] = entry
        return entry

    def get(self, key: str) -> ConditionEntry:
        try:
            return self._entries[key]
        except KeyError:
            raise NotFound(key) from None

    def to_json(self) -> str:
        return json.dumps({k: self._entries[k].to_dict() for k in self.keys()},
                          sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ConditionDatabase":
        db = cls()
        for k, d in json.loads(text).items():
            e = ConditionEntry.from_dict(d)
            db.put(k, e.A, e.b, e.n, e.rms)
        return db

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ConditionDatabase":
        return cls.from_json(Path(path).read_text())
