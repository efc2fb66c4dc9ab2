"""Exception hierarchy shared by every module of the package."""


class CharfieldError(Exception):
    """Base class for all package errors."""


class SpecMismatch(CharfieldError):
    """Operands live on different carriers."""


class NotAUnit(CharfieldError):
    pass


class CharTwo(CharfieldError):
    """Halving (or a closed form that needs it) requested in characteristic 2."""


class InfiniteCarrier(CharfieldError):
    pass


class EmptySet(CharfieldError):
    pass


class NotASubgroup(CharfieldError):
    pass


class DivisionByZero(CharfieldError, ZeroDivisionError):
    pass


class PrecisionExhausted(CharfieldError):
    """More p-adic digits were requested than are known."""


class InsufficientPrecision(CharfieldError):
    pass


class NotASquare(CharfieldError):
    pass


class UnsupportedPrime(CharfieldError):
    pass


class ScaleError(CharfieldError):
    """A ball or density does not fit inside Z_p."""


class PreconditionViolated(CharfieldError):
    pass


class ZeroValue(CharfieldError):
    """A multiplicative difference hit a zero of the function."""


class BadConfig(CharfieldError):
    pass


class IoError(CharfieldError, OSError):
    """A report or figure could not be written."""
