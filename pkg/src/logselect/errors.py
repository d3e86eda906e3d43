"""Exception types raised across the package.

Two families matter to callers: :class:`ValidationError` for malformed
input (CLI exit code 2) and :class:`DataConditionError` for well-formed
input that cannot support the requested operation (CLI exit code 3).
"""


class LogselectError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LogselectError):
    """Malformed input: bad files, bad schemas, bad arguments."""


class DataConditionError(LogselectError):
    """Input is well-formed but the data cannot support the operation."""


class MissingColumn(ValidationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"column {name!r} not found in CSV header")


class BadOrderKey(ValidationError):
    def __init__(self, row: int, value: str = ""):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: cannot parse order key {value!r}")


class EmptyField(ValidationError):
    def __init__(self, row: int, col: str):
        self.row = row
        self.col = col
        super().__init__(f"row {row}: column {col!r} is empty")


class NonTemporalOrderKey(DataConditionError):
    def __init__(self):
        super().__init__("log has integer order keys; durations are unavailable")


class EmptyKinds(ValidationError):
    def __init__(self):
        super().__init__("at least one feature kind is required")


class SingleClassLabels(DataConditionError):
    def __init__(self):
        super().__init__("labels contain a single class; need both outcomes present")


class LengthMismatch(ValidationError):
    def __init__(self, a: int, b: int):
        super().__init__(f"length mismatch: {a} vs {b}")


class EmptySelection(ValidationError):
    def __init__(self):
        super().__init__("selected feature set is empty")


class DegenerateSplit(DataConditionError):
    def __init__(self, n: int, fraction: float):
        super().__init__(f"split of {n} rows at fraction {fraction} leaves one side empty")


class MissingFeature(ValidationError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"model needs {expected} feature columns, rows provide {got}")


class NoConvergence(DataConditionError):
    def __init__(self, run: int):
        self.run = run
        super().__init__(f"coordinate descent exceeded its sweep cap in run {run}")
