"""Exception hierarchy. Each class maps to a distinct CLI exit code."""


class MentalStateError(Exception):
    exit_code = 1


class ParameterError(MentalStateError, ValueError):
    exit_code = 2


class SchemaError(MentalStateError, ValueError):
    exit_code = 3

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"missing required column: {column!r}")


class DataError(MentalStateError, ValueError):
    exit_code = 4


class FormatError(MentalStateError):
    exit_code = 5


class VersionError(FormatError):
    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(
            f"model file format version {found} is not supported "
            f"(this build reads version {supported})"
        )


class TrainingDivergedError(MentalStateError, ArithmeticError):
    exit_code = 7

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")


IO_EXIT_CODE = 6
