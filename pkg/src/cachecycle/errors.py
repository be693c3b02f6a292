"""Exception types shared across the package."""


class CachecycleError(Exception):
    """Base class for every error this package raises on purpose."""


class MachineFileError(CachecycleError):
    """Problem in a machine description file."""


class MissingKey(MachineFileError):
    def __init__(self, key: str):
        super().__init__(f"missing required key '{key}'")
        self.key = key


class InvalidValue(MachineFileError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"invalid value for '{key}': {reason}")
        self.key = key
        self.reason = reason


class DuplicateLevel(MachineFileError):
    def __init__(self, key: str):
        super().__init__(f"duplicate cache-level key '{key}'")
        self.key = key


class InvalidKernel(CachecycleError):
    """Kernel description that the model cannot represent."""


class UnknownLevel(CachecycleError):
    def __init__(self, name: str):
        super().__init__(f"unknown memory-hierarchy level '{name}'")
        self.name = name


class ZeroCycles(CachecycleError):
    """Bandwidth requested for a prediction with zero total cycles."""


class MeasurementError(CachecycleError):
    """Problem in a measurement data set."""


class BadHeader(MeasurementError):
    def __init__(self, got: str, expected: str):
        super().__init__(f"bad CSV header {got!r}, expected {expected!r}")


class UnknownMachine(MeasurementError):
    def __init__(self, name: str):
        super().__init__(f"measurement references unknown machine '{name}'")
        self.name = name


class UnknownKernel(MeasurementError):
    def __init__(self, name: str):
        super().__init__(f"measurement references unknown kernel '{name}'")
        self.name = name


class NonPositiveCycles(MeasurementError):
    def __init__(self, value):
        super().__init__(f"cycles per cache-line update must be > 0, got {value}")


class DuplicateRow(MeasurementError):
    def __init__(self, key):
        super().__init__(f"duplicate measurement row {key}")
        self.key = key


class MissingPrediction(MeasurementError):
    def __init__(self, key):
        super().__init__(f"no prediction for measurement {key}")
        self.key = key


class MissingBaseline(MeasurementError):
    """Scaling report requested without a single-thread baseline row."""


class BenchError(CachecycleError):
    """Problem while running the microbenchmark harness."""


class Infeasible(BenchError):
    """Working-set sizing rule cannot be satisfied for this level."""


class AllocationFailure(BenchError):
    def __init__(self, nbytes: int):
        super().__init__(f"could not allocate {nbytes} bytes of benchmark arrays")


class TimerTooCoarse(BenchError):
    def __init__(self, resolution: float):
        super().__init__(f"monotonic timer resolution {resolution:g}s is too coarse")


class ChecksumMismatch(BenchError):
    def __init__(self, got: float, expected: float):
        super().__init__(
            f"benchmark checksum {got!r} does not match expected {expected!r}"
        )


class PinningUnsupported(UserWarning):
    """Thread pinning is not available; the run continues unpinned."""
