"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class LieHamError(Exception):
    """Base class for all errors raised by liehamilton."""


class ExprSyntaxError(LieHamError, ValueError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class UnknownVariable(LieHamError, ValueError):
    pass


class IllegalRadical(LieHamError, ValueError):
    pass


class NotRepresentable(LieHamError, ValueError):
    """The operation would leave the exact monomial expression class."""


class DomainViolation(LieHamError, ValueError):
    def __init__(self, message: str, time: float | None = None):
        self.time = time
        super().__init__(message)


class ChartMismatch(LieHamError, ValueError):
    pass


class LogarithmicTerm(LieHamError, ValueError):
    pass


class NotHamiltonian(LieHamError):
    pass


class DegenerateBivector(LieHamError):
    pass


class NotPoisson(LieHamError):
    def __init__(self, message: str, witness=None):
        self.witness = witness
        super().__init__(message)


class BadStructureConstants(LieHamError, ValueError):
    pass


class CapExceeded(LieHamError):
    def __init__(self, message: str, partial_basis: list, rounds: int):
        self.partial_basis = partial_basis
        self.rounds = rounds
        super().__init__(message)


class NotClosed(LieHamError):
    pass


class NotHamiltonianGenerator(LieHamError):
    def __init__(self, name: str, witness):
        self.name = name
        self.witness = witness
        super().__init__(f"generator {name!r} is not Hamiltonian for the given data")


class InternalInconsistency(LieHamError):
    pass


class InclusionViolated(LieHamError):
    def __init__(self, message: str, pair):
        self.pair = pair
        super().__init__(message)


class NotAConstant(LieHamError):
    pass


class NotStrongComomentum(LieHamError):
    def __init__(self, message: str, witness=None):
        self.witness = witness
        super().__init__(message)


class DimensionMismatch(LieHamError):
    pass


class DegenerateJacobian(LieHamError):
    pass


class NotACasimir(LieHamError):
    pass


class GridMismatch(LieHamError):
    pass


class UnknownSystem(LieHamError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class BadParams(LieHamError, ValueError):
    pass


class DefinitionError(LieHamError, ValueError):
    """A system-definition document failed validation."""


class CoefficientDomain(DomainViolation):
    """A time coefficient b(t) is undefined at the requested time."""
