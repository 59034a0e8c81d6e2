"""Exception types shared across the package."""


class GossipError(Exception):
    """Base class for all package-specific errors."""


class EmptyFilterError(GossipError):
    """Filter has no entries."""


class NotNormalizedError(GossipError):
    """Filter weights do not sum to one within tolerance."""


class DriftError(GossipError):
    """Filter mean is not the zero vector."""


class DegenerateCovarianceError(GossipError):
    """Filter covariance matrix is rank deficient."""


class DimensionMismatchError(GossipError):
    """Operands live on lattices of different dimension."""


class PeriodicityDetectedError(GossipError):
    """A nonzero frequency with |omega_hat| = 1 was found.

    Carries the offending frequency in ``xi``.
    """

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class CellBudgetExceededError(GossipError):
    """Requested run would allocate more lattice cells than the budget allows."""


class SnapshotMissingError(GossipError):
    """No field snapshot was retained for the requested round."""


class InvalidScheduleParametersError(GossipError):
    """Jacobi parameters outside the orthogonality range alpha, beta > -1."""


class DomainError(GossipError):
    """Argument outside the mathematical domain of a special function or oracle."""


class QuadratureUnresolvedError(GossipError):
    """Doubling the quadrature resolution moved some output beyond tolerance."""


class ResolutionTooLowError(GossipError):
    """Frequency grid too coarse for exact trigonometric quadrature."""


class NotAperiodicError(GossipError):
    """Operation requires an aperiodic filter.

    ``xi`` carries the offending frequency when periodicity was detected.
    """

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class NotSymmetricError(GossipError):
    """Operation requires a symmetric filter."""


class ConfigError(GossipError):
    """Malformed experiment configuration."""
