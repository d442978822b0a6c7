"""
Exception types raised by the library.

Every error carries the process exit code the command line maps it to:
0 pass, 1 numerical failure, 2 configuration error.
"""


class SymStressError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigurationError(SymStressError):
    """Invalid run configuration (bad dimension, degree, material, ...)."""

    exit_code = 2


class ResourceLimitError(ConfigurationError):
    """A request exceeds a configured budget (cells, polynomial terms)."""


class ProblemFileError(ConfigurationError):
    """Malformed problem file; `location` is a JSON path such as `$.load[1]`."""

    def __init__(self, message, location="$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class DegenerateSimplexError(SymStressError):
    """Vertices are (numerically) affinely dependent."""


class UnisolvenceError(SymStressError):
    """The DOF matrix of an element is singular."""


class SingularSystemError(SymStressError):
    """Factorization of the saddle-point system failed."""


class EigenSolverError(SymStressError):
    """Generalized eigenvalue computation failed."""
