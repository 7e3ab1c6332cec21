"""Exception types shared across the package.

``ConfigError`` marks invalid user input (exit code 1 from the CLI);
``NumericalError`` marks a failure of the numerics themselves (exit code 2).
"""


class ConfigError(Exception):
    """Invalid configuration: bad value, unknown key, violated guard."""


class NumericalError(Exception):
    """Numerical failure: overflow, non-convergence, singular system."""
