"""
Exception hierarchy shared by the solvers, loaders and the command line
"""


class EddError(Exception):
    """Base class for every error raised by this package"""


class InvalidNetworkError(EddError):
    """Network topology breaks a structural rule (self-loop, duplicate edge, bad weight)"""


class InvalidInstanceError(EddError):
    """Instance parameters are inconsistent with the network"""


class DisconnectedNetworkError(EddError):
    def __init__(self, message: str = "disconnected") -> None:
        super().__init__(message)


class NotAForestError(EddError):
    def __init__(self, message: str = "not a forest") -> None:
        super().__init__(message)


class InfeasibleInstanceError(EddError):
    def __init__(self, message: str = "infeasible") -> None:
        super().__init__(message)


class InstanceFormatError(EddError):
    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"{message} at line {line_number}"
        super().__init__(message)


class OracleLimitError(EddError):
    """Exhaustive oracle refused an instance that is too large to enumerate"""


class InvariantViolationError(EddError):
    """A solver produced a plan that fails validation"""
