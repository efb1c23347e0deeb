"""Error taxonomy shared across the package.

The command line maps these onto exit codes: validation errors exit 2,
computational failures exit 3, I/O problems exit 4.
"""


class ValidationError(ValueError):
    """Bad user input or field/grid contract violation, detected before compute."""


class ComputationalError(RuntimeError):
    """A numerical procedure failed to produce a trustworthy result."""
