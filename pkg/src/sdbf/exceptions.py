"""Exception hierarchy for sdbf.

All library errors derive from :class:`SdbfError` so callers can catch a
single base class.  Errors that signal bad user input additionally derive
from :class:`ValueError`.
"""


class SdbfError(Exception):
    """Base class for all sdbf errors."""


class InvalidParameterError(SdbfError, ValueError):
    """A distribution or sampler parameter violates its constraints."""


class DataError(SdbfError, ValueError):
    """Input data could not be ingested (wrong shape, non-finite, degenerate)."""


class DecompositionError(SdbfError):
    """A matrix factorization failed.

    Attributes
    ----------
    minor_index : int or None
        1-based index of the first non-positive-definite leading minor,
        when known.
    """

    def __init__(self, message, minor_index=None):
        super().__init__(message)
        self.minor_index = minor_index


class ChainDivergedError(SdbfError):
    """An MCMC chain reached a non-finite state.

    Attributes
    ----------
    iteration : int or None
        0-based iteration index at which the divergence was detected.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class EstimationError(SdbfError):
    """A Monte Carlo or density estimate could not be formed."""


class AssemblyError(SdbfError):
    """Bayes factor assembly failed (zero prior density or probability)."""


class OracleError(SdbfError):
    """A quadrature oracle did not converge."""
