"""ODE integration and projected stochastic-approximation simulation of loops.

The coordinated stochastic approximation iterates

    theta_i[k+1] = proj_{S_i}( theta_i[k] + eps_k * sum_j C[i, j] (F_j(theta[k]) + N_k^j) )

with i.i.d. zero-mean Gaussian measurement noise ``N_k``.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DivergenceDetected
from .system_model import KpiEvaluator, LinearEvaluator

__all__ = [
    "Trajectory",
    "Constant",
    "Harmonic",
    "UpdateMode",
    "SaConfig",
    "simulate_sa",
    "integrate_ode",
    "run_ensemble",
    "ensemble_summary",
    "noise_martingale_check",
    "DIVERGENCE_THRESHOLD",
]

log = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e12


@dataclass
class Trajectory:
    """Time-stamped sequence of parameter vectors."""

    times: np.ndarray
    states: np.ndarray
    theta_star: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states must have equal length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.shape[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_error(self) -> float | None:
        if self.theta_star is None:
            return None
        return float(np.max(np.abs(self.states[-1] - self.theta_star)))

    def to_csv(self, path=None) -> str:
        """Write ``t,theta_1,...,theta_I``; returns the CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"theta_{i + 1}" for i in range(self.states.shape[1])])
        for t, s in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in s])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:])


@dataclass(frozen=True)
class Constant:
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("step size must be positive")

    def __call__(self, k):
        return np.full(np.shape(k), self.eps) if np.ndim(k) else self.eps


@dataclass(frozen=True)
class Harmonic:
    """``eps_k = a / (k + b)``: sum diverges, sum of squares converges."""

    a: float = 1.0
    b: float = 10.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("harmonic schedule needs a > 0 and b > 0")

    def __call__(self, k):
        return self.a / (np.asarray(k, dtype=float) + self.b)


class UpdateMode(str, Enum):
    SYNCHRONOUS = "synchronous"
    ROUND_ROBIN = "round_robin"
    RANDOM_SINGLE = "random_single"


@dataclass(frozen=True)
class SaConfig:
    """Settings for :func:`simulate_sa`.

    ``boxes`` is an (I, 2) array of ``[a_i, b_i]`` intervals; when omitted it
    defaults to ``theta* +/- 10 * ||theta0 - theta*||_inf``.
    """

    steps: int
    step_schedule: Constant | Harmonic = field(default_factory=Harmonic)
    boxes: np.ndarray | None = None
    noise_std: float = 0.0
    mode: UpdateMode = UpdateMode.SYNCHRONOUS
    seed: int = 0
    record_every: int = 1
    time_per_iteration: float = 1.0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        object.__setattr__(self, "mode", UpdateMode(self.mode))
        if self.boxes is not None:
            bx = np.array(self.boxes, dtype=float)
            if bx.ndim != 2 or bx.shape[1] != 2:
                raise ValueError("boxes must have shape (I, 2)")
            if np.any(bx[:, 0] >= bx[:, 1]):
                raise ValueError("each box needs a_i < b_i")
            bx.setflags(write=False)
            object.__setattr__(self, "boxes", bx)


def _default_boxes(theta0, theta_star):
    r = 10.0 * float(np.max(np.abs(theta0 - theta_star)))
    if r == 0.0:
        r = 1.0
    return np.column_stack([theta_star - r, theta_star + r])


def simulate_sa(evaluator: KpiEvaluator, C, config: SaConfig, theta0) -> Trajectory:
    """Run the projected (coordinated) stochastic-approximation recursion.

    Parameters
    ----------
    evaluator : KpiEvaluator
        Noiseless update field; measurement noise is added here.
    C : (I, I) array_like or None
        Coordination matrix; ``None`` means uncoordinated (identity).
    config : SaConfig
    theta0 : (I,) array_like
        Initial parameters, projected onto the boxes before the first step.

    Returns
    -------
    Trajectory
        States after every ``record_every`` iterations, plus the last one.
    """
    theta = np.array(theta0, dtype=float)
    n = theta.shape[0]
    C = np.eye(n) if C is None else np.asarray(C, dtype=float)
    if C.shape != (n, n) or evaluator.dim != n:
        raise ValueError("dimension mismatch between evaluator, C and theta0")
    theta_star = evaluator.theta_star
    if config.boxes is not None:
        boxes = np.asarray(config.boxes)
        if boxes.shape[0] != n:
            raise ValueError("boxes must have one interval per loop")
    elif theta_star is not None:
        boxes = _default_boxes(theta, theta_star)
    else:
        raise ValueError("boxes are required when theta* is unknown")
    lo, hi = boxes[:, 0].copy(), boxes[:, 1].copy()
    theta = np.clip(theta, lo, hi)

    K = int(config.steps)
    rng = np.random.default_rng(config.seed)
    if config.noise_std > 0:
        mixed = rng.normal(0.0, config.noise_std, size=(K, n)) @ C.T
    else:
        mixed = np.zeros((K, n))
    if config.mode is UpdateMode.RANDOM_SINGLE:
        who = rng.integers(0, n, size=K)
    elif config.mode is UpdateMode.ROUND_ROBIN:
        who = np.arange(K) % n
    else:
        who = None
    eps = np.asarray(config.step_schedule(np.arange(K)), dtype=float)

    every = config.record_every
    rec_idx = list(range(0, K + 1, every))
    if rec_idx[-1] != K:
        rec_idx.append(K)
    states = np.empty((len(rec_idx), n))
    states[0] = theta
    r = 1

    if isinstance(evaluator, LinearEvaluator):
        M = C @ evaluator.system.A
        v = C @ evaluator.system.b
        field_fn = lambda th: M @ th + v  # noqa: E731
    else:
        field_fn = lambda th: C @ evaluator.mean(th)  # noqa: E731

    for k in range(K):
        g = field_fn(theta) + mixed[k]
        if who is None:
            theta = theta + eps[k] * g
            np.clip(theta, lo, hi, out=theta)
        else:
            i = who[k]
            theta = theta.copy()
            theta[i] = min(max(theta[i] + eps[k] * g[i], lo[i]), hi[i])
        if r < len(rec_idx) and k + 1 == rec_idx[r]:
            states[r] = theta
            r += 1

    times = np.asarray(rec_idx, dtype=float) * config.time_per_iteration
    return Trajectory(times, states, theta_star)


def integrate_ode(evaluator: KpiEvaluator, C, theta0, t_end: float, dt: float,
                  threshold: float = DIVERGENCE_THRESHOLD) -> Trajectory:
    """Classical RK4 integration of ``theta' = C F(theta)`` sampled every ``dt``.

    Raises
    ------
    DivergenceDetected
        When ``||theta||`` exceeds ``threshold``; the partial trajectory is
        attached to the exception.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    theta = np.array(theta0, dtype=float)
    n = theta.shape[0]
    C = np.eye(n) if C is None else np.asarray(C, dtype=float)
    if isinstance(evaluator, LinearEvaluator):
        M = C @ evaluator.system.A
        v = C @ evaluator.system.b
        f = lambda th: M @ th + v  # noqa: E731
    else:
        f = lambda th: C @ evaluator.mean(th)  # noqa: E731

    steps = int(round(t_end / dt))
    states = np.empty((steps + 1, n))
    states[0] = theta
    for k in range(steps):
        k1 = f(theta)
        k2 = f(theta + 0.5 * dt * k1)
        k3 = f(theta + 0.5 * dt * k2)
        k4 = f(theta + dt * k3)
        theta = theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = theta
        if not np.all(np.isfinite(theta)) or np.linalg.norm(theta) > threshold:
            traj = Trajectory(np.arange(k + 2) * dt, states[: k + 2],
                              evaluator.theta_star)
            raise DivergenceDetected(
                f"state norm exceeded {threshold:g} at t={(k + 1) * dt:g}", traj)
    return Trajectory(np.arange(steps + 1) * dt, states, evaluator.theta_star)


def _run_seed(args):
    evaluator, C, config, theta0 = args
    return simulate_sa(evaluator, C, config, theta0)


def run_ensemble(evaluator: KpiEvaluator, C, config: SaConfig, theta0,
                 seeds: Sequence[int], n_jobs: int = 1) -> list[Trajectory]:
    """One simulation per seed; results are returned in seed order."""
    jobs = [(evaluator, C, replace(config, seed=int(s)), theta0) for s in seeds]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(_run_seed, jobs))
    return [_run_seed(j) for j in jobs]


def ensemble_summary(trajectories: Sequence[Trajectory], seeds: Sequence[int]) -> dict:
    errs = [t.final_error for t in trajectories]
    out = {"seeds": [int(s) for s in seeds], "final_error": errs}
    if all(e is not None for e in errs):
        out["mean_final_error"] = float(np.mean(errs))
        out["max_final_error"] = float(np.max(errs))
    return out


def noise_martingale_check(samples, lags: int = 10, C=None,
                           sigma: float | None = None) -> float:
    """Normalized statistic for the martingale-difference property of noise.

    For each loop the mixed noise ``C N`` is tested for a nonzero mean and for
    serial correlation at lags ``1..lags``. Each quantity is divided by its
    standard error (``sigma / sqrt(K)`` for the mean, ``1 / sqrt(K)`` for
    autocorrelations), so under i.i.d. zero-mean noise every entry is roughly
    standard normal. Returns the largest absolute value.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if X.shape[0] == 1 and X.shape[1] > 1:
        X = X.T
    K = X.shape[0]
    if K < 10_000:
        raise ValueError("at least 1e4 samples are required")
    if C is not None:
        X = X @ np.asarray(C, dtype=float).T
    worst = 0.0
    for col in X.T:
        mean = col.mean()
        s = col.std() if sigma is None else sigma
        if s == 0.0:
            if mean != 0.0:
                return float("inf")
            continue
        worst = max(worst, abs(mean) / (s / np.sqrt(K)))
        d = col - mean
        denom = float(d @ d)
        if denom == 0.0:
            continue
        for lag in range(1, lags + 1):
            rho = float(d[:-lag] @ d[lag:]) / denom
            worst = max(worst, abs(rho) * np.sqrt(K))
    return float(worst)

