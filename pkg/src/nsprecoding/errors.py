"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Base class for rejected system configurations."""


class NonIntegerEffectiveDimension(ConfigError):
    """``c * M`` is not an integer."""


class OverloadedSystem(ConfigError):
    """More users than effective channel dimensions (``K > c * M``)."""


class BadRange(ConfigError):
    """A scalar parameter lies outside its admissible interval."""


class SingularPrecondition(ArithmeticError):
    """A pivot of a precondition matrix is numerically zero."""


class SingularGram(ArithmeticError):
    """The Gram matrix could not be Cholesky-factorized."""


class DegenerateZF(ValueError):
    """Ideal ZF is undefined because ``c * M <= K``."""
