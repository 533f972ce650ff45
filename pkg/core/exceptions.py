"""Exception hierarchy shared by the library and the command line."""


class QcpError(Exception):
    """Base class for numerical and domain failures."""

    exit_code = 2


class InvalidStateError(QcpError):
    """Matrix is not Hermitian, not unit trace, or not positive semidefinite."""


class DimensionError(QcpError):
    """Dimension limit exceeded or inconsistent factor dimensions."""


class UnphysicalCorrelatorsError(QcpError):
    """Correlators do not define a positive semidefinite two-site state."""


class DegenerateOutcomeError(QcpError):
    """A Bell outcome with zero probability was requested."""


class UnsupportedStrategyError(QcpError):
    """Correlator strategy cannot handle the requested model."""


class QuadratureError(QcpError):
    """Momentum-space quadrature did not converge."""


class RootNotBracketedError(QcpError):
    """No sign change found for a bracketed root search."""


class FitError(QcpError):
    """Regression is under-determined or rank deficient."""


class SeriesTooShortError(QcpError):
    """Sequence has too few samples for the requested derivative order."""


class EmptyWindowError(QcpError):
    """Search window contains no grid points."""


class ConfigError(Exception):
    """Invalid run configuration or command-line usage."""

    exit_code = 1


class VerificationError(Exception):
    """One or more verification checks failed."""

    exit_code = 3
