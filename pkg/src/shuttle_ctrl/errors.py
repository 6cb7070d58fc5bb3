"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so solver code should raise the
most specific class that applies.
"""


class ShuttleError(Exception):
    """Base class for all package errors."""


class ConfigError(ShuttleError):
    """Invalid problem data or configuration (exit code 2)."""


class DegenerateProblemError(ShuttleError):
    """The optimum is not attained inside the admissible class (exit code 3).

    Typical causes: the running cost or discount vanishes on a region where
    the control is free, or adjacent discount factors multiply to one.
    """


class NumericalError(ShuttleError):
    """A numerical invariant failed during evaluation (exit code 4)."""


class VerificationFailure(ShuttleError):
    """A verification suite reported FAIL (exit code 5)."""
