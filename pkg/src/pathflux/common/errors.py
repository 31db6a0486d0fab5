from enum import IntEnum


class ExitCode(IntEnum):
    SUCCESS = 0
    FAILED = 1
    INPUT_ERROR = 2
    NUMERICAL_GUARD = 3


class PathfluxError(Exception):
    """Base of every error raised deliberately by pathflux."""

    exit_code: ExitCode = ExitCode.FAILED


class InputError(PathfluxError):
    """Bad model, data, configuration or arguments supplied by the caller."""

    exit_code = ExitCode.INPUT_ERROR


class ScmValidationError(InputError):
    def __init__(self, message: str, location: tuple[str | int, ...] = ()) -> None:
        self.location = location
        where = ".".join(str(part) for part in location)
        super().__init__(f"{where}: {message}" if where else message)


class DatasetValidationError(InputError):
    def __init__(self, message: str, row: int | None = None) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class ConfigError(InputError):
    pass


class UnsupportedModelError(InputError):
    """The model does not meet an operation's structural precondition (e.g. non-binary A)."""


class DomainError(InputError):
    """A contrast or functional is undefined for the supplied laws."""


class NotFoundError(InputError):
    """Requested SCM, dataset or spec does not exist."""


class NumericalGuardError(PathfluxError):
    exit_code = ExitCode.NUMERICAL_GUARD


class IdentificationError(NumericalGuardError):
    """Overlap violation: a cell the functional needs is undefined or too small."""

    def __init__(self, message: str, cell: dict[str, int] | None = None, fold: int | None = None) -> None:
        self.cell = cell
        self.fold = fold
        parts = [message]
        if cell:
            parts.append("at " + ", ".join(f"{k}={v}" for k, v in cell.items()))
        if fold is not None:
            parts.append(f"in fold {fold}")
        super().__init__(" ".join(parts))


class TruncationError(NumericalGuardError):
    """A gradient denominator fell below the truncation floor."""


class CapacityError(NumericalGuardError):
    """Enumeration grid exceeds the configured cell budget."""
