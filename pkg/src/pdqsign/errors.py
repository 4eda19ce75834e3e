"""Exception hierarchy.

Every numerical failure raised by the library derives from
:class:`NumericalError`, which the CLI maps to exit code 3. Input and
configuration problems derive from :class:`InputError` (exit code 2).
"""


class PDQError(Exception):
    """Base class for all pdqsign errors."""


class InputError(PDQError, ValueError):
    """Invalid user input (shapes, parameter ranges, files)."""


class InvalidDimension(InputError):
    pass


class InvalidRho(InputError):
    pass


class ConfigError(InputError):
    pass


class NumericalError(PDQError, ArithmeticError):
    """A numerical routine could not produce a valid result.

    ``module`` names the library module that raised it so that CLI
    reports can say where a Monte Carlo replication broke down.
    """

    module = "pdqsign"


class NotPositiveDefinite(NumericalError):
    module = "elliptical"


class DegenerateScale(NumericalError):
    module = "pdq"

    def __init__(self, coordinate, message=None):
        self.coordinate = coordinate
        super().__init__(message or f"pairwise-difference quantile is zero in coordinate {coordinate}")


class NotConverged(NumericalError):
    module = "spatial"

    def __init__(self, message, last_iterate=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class DegenerateFit(NumericalError):
    module = "spatial"


class SingularG(NumericalError):
    module = "statistic"


class SingularOmega(NumericalError):
    module = "statistic"
