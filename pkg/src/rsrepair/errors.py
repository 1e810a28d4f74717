"""Exception hierarchy shared by every module in the package."""


class RSRPError(Exception):
    """Base class for all errors raised by rsrepair."""


class InvalidInputError(RSRPError, ValueError):
    pass


class ParameterError(InvalidInputError):
    """Code or tower parameters violate a construction precondition."""


class ConstructionError(ParameterError):
    pass


class DivisionByZeroError(RSRPError, ZeroDivisionError):
    pass


class NotABasisError(RSRPError):
    pass


class SingularMatrixError(NotABasisError):
    pass


class InsufficientDataError(RSRPError):
    pass


class CorruptionError(RSRPError):
    pass


class ProtocolError(RSRPError):
    """A helper answered a repair query with a malformed symbol."""


class InternalInconsistencyError(RSRPError):
    pass


class RefusalError(RSRPError):
    """An exhaustive check was refused because it would be too large."""


class NotARepairSchemeError(RSRPError):
    """A dual family fails the full-rank condition at the failed coordinate."""

    def __init__(self, message: str, achieved_rank: int, required_rank: int):
        super().__init__(message)
        self.achieved_rank = achieved_rank
        self.required_rank = required_rank
