"""Exception hierarchy shared by the library and the command line."""


class RevendError(Exception):
    """Base class for all errors raised by revend."""


class DomainError(RevendError, ValueError):
    """A point, curve or parameter lies outside the admissible domain."""


class ReparamError(RevendError):
    """Arc-length reparametrization could not be completed."""


class QuadratureError(RevendError, ArithmeticError):
    """An adaptive quadrature did not reach the requested tolerance."""


class ExprError(RevendError, ValueError):
    """Base class for expression parsing problems."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int, allowed):
        allowed = ", ".join(sorted(allowed))
        super().__init__(f"unknown identifier {name!r} at offset {offset}; allowed: {allowed}")
        self.name = name
        self.offset = offset


class CurveFileError(RevendError, ValueError):
    """Malformed curve specification file."""
