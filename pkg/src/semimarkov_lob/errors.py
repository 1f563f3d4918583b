"""Exception hierarchy shared by all modules.

``DataError`` subclasses map to CLI exit code 1; ``OSError`` maps to 2.
"""


class DataError(ValueError):
    """Base class for data and validation failures."""


class ParseError(DataError):
    def __init__(self, message, row=None, stream=None):
        self.row = row
        self.stream = stream
        where = ""
        if stream is not None:
            where += f"{stream} "
        if row is not None:
            where += f"row {row}: "
        super().__init__(where + message)


class OrderViolationError(ParseError):
    pass


class AlignmentError(DataError):
    pass


class CrossedBookError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class MissingStateError(DataError):
    pass


class DegenerateBinningError(DataError):
    pass


class UndefinedRowError(DataError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state} has no outgoing transition")


class IrreducibilityError(DataError):
    pass


class SingularMatrixError(DataError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class DomainError(DataError):
    pass


class AccuracyError(DataError):
    pass


class ConfigurationError(DataError):
    pass
