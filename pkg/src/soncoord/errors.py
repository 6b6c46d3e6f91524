"""Exception hierarchy shared by all soncoord modules."""


class SonCoordError(Exception):
    """Base class for every error raised by soncoord."""


class DegenerateMatrix(SonCoordError):
    """A determinant or spectral sign decision is within tolerance of zero."""


class EigenConvergenceError(SonCoordError):
    """The dense eigensolver failed to converge."""


class NoUniqueSolution(SonCoordError):
    """The Lyapunov operator is singular (two eigenvalues sum to zero)."""


class StandAloneUnstable(SonCoordError):
    """A diagonal entry of A is not strictly negative."""


class NotCoordinatable(SonCoordError):
    """No diagonal coordination matrix can stabilize the system."""


class ScheduleExhausted(SonCoordError):
    """A magnitude or epsilon schedule ran out without a certified result."""


class EpsilonNotFound(ScheduleExhausted):
    pass


class HypothesisViolated(SonCoordError):
    """A leading principal submatrix is singular."""


class SingularSystem(SonCoordError):
    """A is singular, so theta* = -A^{-1} b is undefined."""


class SkippedDegenerate(SonCoordError):
    """The leading eigenvalue is not simple; derivative check skipped."""


class DivergenceDetected(SonCoordError):
    """ODE state norm exceeded the divergence threshold.

    The partial trajectory up to the blow-up is attached as ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class RankDeficient(SonCoordError):
    """Regression design matrix is rank deficient.

    ``direction`` holds a unit vector (over [theta, 1]) spanning the
    numerical null space.
    """

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class NotFound(SonCoordError, KeyError):
    pass


class DomainError(SonCoordError, ValueError):
    pass


class TruncationTooSmall(SonCoordError):
    """Stationary tail mass beyond ``n_max`` exceeds the allowed bound."""


class SingularWarning(UserWarning):
    """Emitted when a construction cannot certify definiteness."""
