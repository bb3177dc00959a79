"""Exception types shared across the pipeline.

Two families matter to callers: :class:`DataError` for bad inputs or
configuration (CLI exit code 2) and :class:`NumericError` for model or
numeric failures (CLI exit code 1).
"""

from __future__ import annotations


class DataError(Exception):
    """Invalid input file, configuration, or dataset state."""


class NumericError(Exception):
    """Numeric or model failure during computation."""


class MissingColumnError(DataError):
    def __init__(self, name: str):
        super().__init__(f"required column missing: {name!r}")
        self.name = name


class MalformedRowError(DataError):
    def __init__(self, line: int, detail: str = ""):
        msg = f"malformed row at line {line}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.line = line


class UnknownStageError(DataError):
    def __init__(self, value: str, line: int | None = None):
        loc = f" at line {line}" if line is not None else ""
        super().__init__(f"unrecognized stage label {value!r}{loc}")
        self.value = value
        self.line = line


class DuplicateClinicalError(DataError):
    def __init__(self, patient_id: str):
        super().__init__(f"conflicting clinical rows for patient {patient_id!r}")
        self.patient_id = patient_id


class EmptyCohortError(DataError):
    pass


class AllStagesRemovedError(DataError):
    pass


class ZeroClassSizeError(DataError):
    pass


class ClassTooSmallError(DataError):
    def __init__(self, label):
        super().__init__(f"class {label!r} has fewer than 2 samples; cannot split")
        self.label = label


class EmptyTestSetError(DataError):
    pass


class OneClassOnlyError(DataError):
    pass


class EmptyStageError(DataError):
    def __init__(self, stage):
        super().__init__(f"no training patients for stage {stage!r}")
        self.stage = stage


class ConfigError(DataError):
    pass


class ShapeMismatchError(NumericError):
    pass


class NonPositiveWeightError(NumericError):
    pass


class NonFiniteLossError(NumericError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch
