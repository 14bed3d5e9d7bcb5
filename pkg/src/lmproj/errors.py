"""Exception hierarchy shared by every module.

Each error carries a machine-readable ``category`` and the process exit code
the command-line front end uses for it.
"""


class LmprojError(Exception):
    category = "error"
    exit_code = 1


class ConfigError(LmprojError, ValueError):
    """Invalid parameters or incompatible method/data/mode combination."""

    category = "config"
    exit_code = 2


class InputError(LmprojError, ValueError):
    """Malformed or inconsistent input data."""

    category = "input"
    exit_code = 3


class NumericalError(LmprojError, ArithmeticError):
    """A factorization or decomposition failed or produced non-finite values."""

    category = "numerical"
    exit_code = 4


class UndefinedMetricError(LmprojError, ValueError):
    """A ranking metric is undefined for the given labels (e.g. one class)."""

    category = "input"
    exit_code = 3
