"""Exception taxonomy shared by the library and the CLI.

Every error carries a machine-parseable ``category`` string; the CLI prints
``category: message`` as a single line and maps each category to a distinct
nonzero exit code.
"""


class BackflowError(Exception):
    """Base class for all library errors."""

    category = "error"
    exit_code = 1


class UsageError(BackflowError, ValueError):
    """Bad command-line arguments or config keys."""

    category = "usage-error"
    exit_code = 2


class DomainError(BackflowError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    category = "domain-error"
    exit_code = 3


class ConvergenceError(BackflowError, RuntimeError):
    """No evaluation regime reached the requested tolerance."""

    category = "convergence-error"
    exit_code = 4


class ResourceError(BackflowError, RuntimeError):
    """A requested computation exceeds a configured resource cap."""

    category = "resource-error"
    exit_code = 5


class DegenerateError(BackflowError, ValueError):
    """Structurally degenerate input (reducible chain, constant grid)."""

    category = "degenerate-error"
    exit_code = 6


class SpectrumError(BackflowError, ValueError):
    """Generator spectrum unsuitable for the spectral propagator."""

    category = "spectrum-error"
    exit_code = 7


class NumericalError(BackflowError, RuntimeError):
    """A numerical routine produced an out-of-contract result."""

    category = "numerical-error"
    exit_code = 8


class OutputError(BackflowError, OSError):
    """Filesystem failure while writing results."""

    category = "io-error"
    exit_code = 9
