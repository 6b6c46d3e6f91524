"""Processor-sharing queue with logistic admission control.

Users arrive as a Poisson process of rate ``lam`` and download exponential
files of mean ``mean_size``. With ``x`` resources the cell serves at ``x R``,
split equally among active users. A user finding ``n`` users is admitted with
probability ``phi(n - beta)``, ``phi(u) = 1 / (1 + e^u)``.

Two loops act on the cell: resource allocation (``theta_1 = x``, driven by
the smoothed outage) and admission control (``theta_2 = beta``, driven by
``-T``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DomainError, TruncationTooSmall
from .stability import DEGENERACY_RTOL

__all__ = [
    "PsQueueModel",
    "OperatingPoint",
    "phi",
    "load",
    "stationary_distribution",
    "stationary_from_load",
    "blocking_probability",
    "mean_transfer_time",
    "outage",
    "birth_death_rates",
    "jacobian_at",
    "instability_condition",
    "RegionScan",
    "stability_region_scan",
    "simulate_events",
    "DEFAULT_MODEL",
]

TAIL_TARGET = 1e-12
TAIL_LIMIT = 1e-10
MIN_STATES = 200


def phi(u):
    """Admission probability ``1 / (1 + e^u)``."""
    return expit(-np.asarray(u, dtype=float))


def _log_phi(u):
    return -np.logaddexp(0.0, u)


@dataclass(frozen=True)
class PsQueueModel:
    lam: float
    mean_size: float
    R: float
    R_min: float
    x_max: float = 1.0
    n_max: int | None = None
    psi_steepness: float = 10.0

    def __post_init__(self):
        for name in ("lam", "mean_size", "R", "R_min", "x_max", "psi_steepness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d) -> "PsQueueModel":
        return cls(**d)


# lambda = 0.5 users/s, E[sigma] = 10 Mbit, R = 15 Mbit/s, R_min = 2 Mbit/s, x_max = 1
DEFAULT_MODEL = PsQueueModel(lam=0.5, mean_size=10.0, R=15.0, R_min=2.0, x_max=1.0)


@dataclass(frozen=True)
class OperatingPoint:
    x: float
    beta: float

    def __post_init__(self):
        if not self.x > 0:
            raise DomainError("resources x must be positive")


def load(model: PsQueueModel, x: float) -> float:
    """``rho(x) = lam E[sigma] / (x R)``."""
    if not x > 0:
        raise DomainError("resources x must be positive")
    return model.lam * model.mean_size / (x * model.R)


def _log_weights(rho, beta, N):
    n = np.arange(N + 1)
    lp = _log_phi(n[:-1] - beta)
    return n * np.log(rho) + np.concatenate([[0.0], np.cumsum(lp)])


def _tail_bound(logw, rho, beta):
    """Upper bound on the unnormalized mass beyond the last state, relative to the total."""
    N = logw.shape[0] - 1
    r = rho * phi(N - beta)
    if r >= 1:
        return np.inf
    top = logw.max()
    total = np.exp(logw - top).sum()
    return float(np.exp(logw[-1] - top) * r / (1 - r) / total)


def stationary_from_load(rho: float, beta: float, n_max: int | None = None) -> np.ndarray:
    """Normalized ``pi(n) ~ rho^n prod_{k<n} phi(k - beta)`` on ``0..N``.

    Without an explicit ``n_max`` the support is the smallest power-of-two
    multiple of 200 whose geometric tail envelope is below 1e-12.

    Raises
    ------
    TruncationTooSmall
        The tail envelope beyond ``n_max`` exceeds 1e-10.
    """
    if not rho > 0:
        raise DomainError("load must be positive")
    if n_max is not None:
        logw = _log_weights(rho, beta, int(n_max))
        if _tail_bound(logw, rho, beta) > TAIL_LIMIT:
            raise TruncationTooSmall(f"n_max={n_max} leaves tail mass above {TAIL_LIMIT}")
    else:
        N = MIN_STATES
        while True:
            logw = _log_weights(rho, beta, N)
            if _tail_bound(logw, rho, beta) <= TAIL_TARGET:
                break
            N *= 2
            if N > 1 << 22:
                raise TruncationTooSmall("stationary tail does not vanish")
    w = np.exp(logw - logw.max())
    return w / w.sum()


def blocking_probability(rho: float, beta: float, n_max: int | None = None) -> float:
    """Fraction of arrivals rejected: ``sum_n pi(n) (1 - phi(n - beta))``."""
    pi = stationary_from_load(rho, beta, n_max)
    return float(pi @ phi(beta - np.arange(pi.shape[0])))


def stationary_distribution(model: PsQueueModel, point: OperatingPoint) -> np.ndarray:
    """Stationary law of the chain at ``point``; see :func:`stationary_from_load`."""
    return stationary_from_load(load(model, point.x), point.beta, model.n_max)


def mean_transfer_time(model: PsQueueModel, point: OperatingPoint) -> float:
    """Little's law with all arrivals: ``T = sum_n n pi(n) / lam``."""
    pi = stationary_distribution(model, point)
    return float(np.arange(pi.shape[0]) @ pi / model.lam)


def outage(model: PsQueueModel, point: OperatingPoint, smoothed: bool = True,
           steepness: float | None = None) -> float:
    """Probability that per-user throughput ``x R / n`` falls below ``R_min``.

    The hard version sums ``pi(n)`` over ``n > x R / R_min``; the smoothed one
    replaces the indicator by ``psi(u) = 1 / (1 + e^{-s u})``.
    """
    pi = stationary_distribution(model, point)
    u = np.arange(pi.shape[0]) - point.x * model.R / model.R_min
    if smoothed:
        s = model.psi_steepness if steepness is None else steepness
        return float(pi @ expit(s * u))
    return float(pi[u > 0].sum())


def birth_death_rates(model: PsQueueModel, point: OperatingPoint, n):
    """Generator of the chain: arrivals ``lam phi(n - beta)``, departures ``x R / E[sigma]`` for ``n >= 1``.

    Processor sharing splits the capacity, so the aggregate departure rate
    does not depend on ``n``.
    """
    n = np.asarray(n)
    up = model.lam * phi(n - point.beta)
    down = np.where(n >= 1, point.x * model.R / model.mean_size, 0.0)
    return up, down


def _kpis(model, x, beta):
    if not x > 0:
        raise DomainError("finite-difference step crosses x <= 0")
    p = OperatingPoint(x, beta)
    return np.array([outage(model, p, smoothed=True), -mean_transfer_time(model, p)])


def jacobian_at(model: PsQueueModel, point: OperatingPoint, fd_step=(1e-3, 1e-3)
                ) -> np.ndarray:
    """Central-difference Jacobian of ``(O_smooth, -T)`` with respect to ``(x, beta)``."""
    hx, hb = fd_step
    if point.x - hx <= 0:
        raise DomainError("finite-difference step crosses x <= 0")
    x, b = point.x, point.beta
    J = np.empty((2, 2))
    J[:, 0] = (_kpis(model, x + hx, b) - _kpis(model, x - hx, b)) / (2 * hx)
    J[:, 1] = (_kpis(model, x, b + hb) - _kpis(model, x, b - hb)) / (2 * hb)
    return J


def instability_condition(J) -> bool:
    """``-dO/dx dT/dbeta + dO/dbeta dT/dx < 0`` written with the partials of ``(O, -T)``."""
    dO_dx, dO_db = J[0, 0], J[0, 1]
    dT_dx, dT_db = -J[1, 0], -J[1, 1]
    return bool(-dO_dx * dT_db + dO_db * dT_dx < 0)


@dataclass
class RegionScan:
    x: np.ndarray
    beta: np.ndarray
    unstable: np.ndarray
    det: np.ndarray
    jacobians: np.ndarray
    degenerate: np.ndarray

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "beta", "unstable"])
        for i, x in enumerate(self.x):
            for j, b in enumerate(self.beta):
                w.writerow([repr(float(x)), repr(float(b)), int(self.unstable[i, j])])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def stability_region_scan(model: PsQueueModel, x_grid, beta_grid, fd_step=(1e-3, 1e-3)
                          ) -> RegionScan:
    """Mark each ``(x, beta)`` unstable when the determinant condition holds.

    Points with ``|det J| <= 1e-9 max|J|^2`` (e.g. a saturated cell whose
    outage row vanishes) are flagged ``degenerate`` and left unmarked, since
    the sign there is round-off.
    """
    xs = np.asarray(x_grid, dtype=float)
    bs = np.asarray(beta_grid, dtype=float)
    unstable = np.zeros((xs.size, bs.size), dtype=bool)
    degenerate = np.zeros((xs.size, bs.size), dtype=bool)
    dets = np.zeros((xs.size, bs.size))
    jac = np.zeros((xs.size, bs.size, 2, 2))
    for i, x in enumerate(xs):
        for j, b in enumerate(bs):
            J = jacobian_at(model, OperatingPoint(x, b), fd_step)
            jac[i, j] = J
            dets[i, j] = np.linalg.det(J)
            degenerate[i, j] = abs(dets[i, j]) <= DEGENERACY_RTOL * np.max(np.abs(J)) ** 2
            unstable[i, j] = instability_condition(J) and not degenerate[i, j]
    return RegionScan(xs, bs, unstable, dets, jac, degenerate)


def simulate_events(model: PsQueueModel, point: OperatingPoint, n_events: int,
                    rng: np.random.Generator, n_chains: int = 1000,
                    burn_in: int = 1000):
    """Event-driven simulation of the birth-death chain.

    ``n_chains`` independent chains start empty and run ``burn_in`` discarded
    events followed by ``n_events // n_chains`` recorded ones.

    Returns
    -------
    occupancy : ndarray
        Fraction of recorded time spent with ``n`` users.
    mean_users_over_lam : float
        Time-average number of users divided by ``lam`` (Little's law with
        all arrivals, as in :func:`mean_transfer_time`).
    """
    steps = max(1, n_events // n_chains)
    n = np.zeros(n_chains, dtype=np.int64)
    size = 64
    occ = np.zeros(size)
    for k in range(burn_in + steps):
        up, down = birth_death_rates(model, point, n)
        q = up + down
        if k >= burn_in:
            hold = rng.exponential(1.0, n_chains) / q
            top = int(n.max()) + 1
            if top > size:
                size = max(2 * size, top)
                occ = np.pad(occ, (0, size - occ.size))
            occ += np.bincount(n, weights=hold, minlength=size)
        n = n + np.where(rng.random(n_chains) * q < up, 1, -1)
    occ /= occ.sum()
    return occ, float(np.arange(occ.size) @ occ / model.lam)
