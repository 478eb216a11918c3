"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce (1 runtime failure, 2 usage/parameter, 3 format/parse).
"""


class DataGridError(Exception):
    exit_code = 1


class ParameterError(DataGridError, ValueError):
    exit_code = 2


class DomainError(DataGridError, ValueError):
    exit_code = 2


class InsufficientSharesError(DataGridError):
    pass


class InconsistentSharesError(DataGridError):
    pass


class IncompletenessError(DataGridError):
    pass


class SchemeError(DataGridError, ValueError):
    exit_code = 2


class FormatError(DataGridError):
    exit_code = 3

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class TopologyError(DataGridError):
    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownReferenceError(DataGridError):
    """A node, cluster or object id that does not exist."""


class UnreachableError(DataGridError):
    pass


class InfeasibleError(DataGridError):
    pass


class InstanceTooLargeError(DataGridError):
    exit_code = 2


class PlacementError(DataGridError):
    pass


class AuthorizationError(DataGridError):
    pass


class UnavailableError(DataGridError):
    pass


class IntegrityError(DataGridError):
    pass


class ScriptError(DataGridError):
    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
