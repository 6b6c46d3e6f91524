"""Parallel-stability tests for a linear loop system ``theta' = M (theta - theta*)``."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DegenerateMatrix, EigenConvergenceError, NoUniqueSolution
from .simulation import Trajectory
from .system_model import LinearLoopSystem, WeightVector

__all__ = [
    "DEGENERACY_RTOL",
    "Method",
    "StabilityReport",
    "is_hurwitz_eigen",
    "spectral_abscissa",
    "routh_hurwitz_2",
    "routh_hurwitz_3",
    "lyapunov_certificate",
    "lyapunov_report",
    "diag_strict_concavity_check",
    "lambda_max_sym",
    "integrate_linear",
]

# relative tolerance for determinant / abscissa sign decisions
DEGENERACY_RTOL = 1e-9
MAX_LYAPUNOV_DIM = 200


class Method(str, Enum):
    EIGEN = "Eigen"
    ROUTH2 = "Routh2"
    ROUTH3 = "Routh3"
    LYAPUNOV = "Lyapunov"


@dataclass(frozen=True)
class StabilityReport:
    is_hurwitz: bool
    spectral_abscissa: float
    method: Method
    eigenvalues: np.ndarray | None = None
    lyapunov_X: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = {
            "is_hurwitz": bool(self.is_hurwitz),
            "spectral_abscissa": float(self.spectral_abscissa),
            "method": self.method.value,
            "lyapunov_certificate": self.lyapunov_X is not None,
        }
        if self.eigenvalues is not None:
            d["eigenvalues"] = [[float(z.real), float(z.imag)] for z in self.eigenvalues]
        if self.lyapunov_X is not None:
            d["lyapunov_X"] = self.lyapunov_X.tolist()
        return d


def _square(M, name="M"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def _eigvals(M):
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc


def spectral_abscissa(M) -> float:
    """Largest real part over the eigenvalues of ``M``."""
    return float(np.max(_eigvals(_square(M)).real))


def is_hurwitz_eigen(M, margin: float = 0.0) -> StabilityReport:
    """Hurwitz test from the full spectrum (LAPACK Hessenberg QR iteration).

    ``is_hurwitz`` holds iff the spectral abscissa is below ``-margin``.
    """
    M = _square(M)
    ev = _eigvals(M)
    a = float(np.max(ev.real))
    return StabilityReport(a < -margin, a, Method.EIGEN, eigenvalues=ev)


def routh_hurwitz_2(M, tol: float = DEGENERACY_RTOL) -> bool:
    """2x2 Hurwitz test: ``det(M) > 0`` and ``tr(M) < 0``."""
    M = _square(M)
    if M.shape != (2, 2):
        raise ValueError("routh_hurwitz_2 expects a 2x2 matrix")
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
    if abs(det) <= tol * scale ** 2:
        raise DegenerateMatrix(f"|det| = {abs(det):.3g} is within tolerance of zero")
    return bool(det > 0 and M[0, 0] + M[1, 1] < 0)


def routh_hurwitz_3(M, tol: float = DEGENERACY_RTOL) -> bool:
    """3x3 Hurwitz test: ``det < 0``, ``tr < 0`` and ``tr(M) tr(M^-1) > 1``."""
    M = _square(M)
    if M.shape != (3, 3):
        raise ValueError("routh_hurwitz_3 expects a 3x3 matrix")
    det = float(np.linalg.det(M))
    scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
    if abs(det) <= tol * scale ** 3 or det == 0.0:
        raise DegenerateMatrix(f"|det| = {abs(det):.3g} is within tolerance of zero")
    tr = float(np.trace(M))
    # tr(M^-1) = (sum of principal 2x2 minors) / det
    minors = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
              + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
              + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    return bool(det < 0 and tr < 0 and tr * (minors / det) > 1)


def lyapunov_certificate(M, Q=None) -> np.ndarray | None:
    """Solve ``M^T X + X M = -Q`` (``Q = I`` by default) by vectorization.

    Returns the symmetric solution ``X`` if it is positive definite, in which
    case ``V(theta) = (theta - theta*)^T X (theta - theta*)`` is a Lyapunov
    function; otherwise ``None``.

    Raises
    ------
    NoUniqueSolution
        If two eigenvalues of ``M`` sum to (numerically) zero.
    """
    M = _square(M)
    n = M.shape[0]
    if n > MAX_LYAPUNOV_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_LYAPUNOV_DIM} for the Kronecker solve")
    Q = np.eye(n) if Q is None else _square(Q, "Q")
    I = np.eye(n)
    # column-major vec: vec(M^T X) = (I kron M^T) vec X, vec(X M) = (M^T kron I) vec X
    L = np.kron(I, M.T) + np.kron(M.T, I)
    ev = _eigvals(M)
    gap = np.min(np.abs(ev[:, None] + ev[None, :]))
    scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
    if gap <= DEGENERACY_RTOL * scale:
        raise NoUniqueSolution("M has eigenvalues summing to zero")
    try:
        x = np.linalg.solve(L, -Q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NoUniqueSolution(str(exc)) from exc
    X = x.reshape(n, n, order="F")
    X = 0.5 * (X + X.T)
    if np.min(np.linalg.eigvalsh(X)) > 0:
        return X
    return None


def lyapunov_report(M) -> StabilityReport:
    M = _square(M)
    X = lyapunov_certificate(M)
    return StabilityReport(X is not None, spectral_abscissa(M), Method.LYAPUNOV,
                           lyapunov_X=X)


def lambda_max_sym(M) -> float:
    """Largest eigenvalue of ``M + M^T``."""
    M = _square(M)
    return float(np.linalg.eigvalsh(M + M.T)[-1])


def diag_strict_concavity_check(J, w: WeightVector | np.ndarray | None = None) -> bool:
    """Sufficient condition for a unique stable equilibrium.

    Forms ``Jw = diag(w) J`` and tests ``Jw + Jw^T`` negative definite.
    """
    J = _square(J, "J")
    if w is None:
        w = np.ones(J.shape[0])
    w = w.w if isinstance(w, WeightVector) else WeightVector(w).w
    Jw = w[:, None] * J
    return lambda_max_sym(Jw) < 0


def integrate_linear(system: LinearLoopSystem, theta0, t_end: float, dt: float
                     ) -> Trajectory:
    """Closed-form trajectory ``theta* + expm(t A) (theta0 - theta*)`` every ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    theta_star = system.theta_star
    steps = int(round(t_end / dt))
    E = scipy.linalg.expm(dt * system.A)
    states = np.empty((steps + 1, system.dim))
    dev = np.asarray(theta0, dtype=float) - theta_star
    states[0] = dev
    for k in range(steps):
        dev = E @ dev
        states[k + 1] = dev
    states += theta_star
    return Trajectory(np.arange(steps + 1) * dt, states, theta_star)
