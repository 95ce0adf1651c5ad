from src.utils.constants import EXIT_DATA, EXIT_METHOD, EXIT_USAGE


class AnonymizationError(ValueError):
    """
    Base class for every error raised by the toolkit.

    Attributes:
        - `exit_code`   The CLI exit code this error maps to.
    """

    exit_code = EXIT_METHOD


class UsageError(AnonymizationError):
    exit_code = EXIT_USAGE


class SweepSpecError(UsageError):
    pass


class DataError(AnonymizationError):
    exit_code = EXIT_DATA


class SchemaMismatchError(DataError):
    pass


class CellParseError(DataError):
    pass


class ConstantColumnError(DataError):
    pass


class RoleAbsentError(DataError):
    pass


class ShapeMismatchError(DataError):
    pass


class OutputWriteError(DataError):
    pass


class MethodError(AnonymizationError):
    exit_code = EXIT_METHOD


class InfeasibleKError(MethodError):
    """
    The privacy parameter cannot be met on the given data.

    Attributes:
        - `max_feasible_k`  Largest k that would have been accepted (optional).
        - `sub_index`       Sub-microdata the failure happened in (optional).
    """

    def __init__(self, message, max_feasible_k=None, sub_index=None):
        super().__init__(message)
        self.max_feasible_k = max_feasible_k
        self.sub_index = sub_index


class ClassTooSmallError(InfeasibleKError):
    pass


class DegenerateModelError(MethodError):
    pass


class LabelOutOfRangeError(MethodError):
    pass
