"""Cycle and bandwidth model for bandwidth-limited streaming loop kernels.

Predicts execution cycles per cache-line update at every memory-hierarchy
level from a machine description and a kernel's stream counts, converts
predictions and measurements to real/effective bandwidths, and ships a
portable microbenchmark harness plus a comparison/reporting CLI.
"""

from .datapath import (
    LevelRef,
    LinkTransfer,
    boundary_traffic,
    enumerate_transfers,
    level_refs,
    memory_ref,
    resolve_level,
    transfer_cycles,
)
from .kernels import (
    CacheLineSet,
    KernelDescriptor,
    builtin_kernels,
    l1_cycles,
    parse_kernel_spec,
)
from .machine import (
    CacheLevelDescriptor,
    DataPathPolicy,
    MachineDescriptor,
    MemoryDescriptor,
    PortModel,
    bundled_machine_names,
    load_bundled_machine,
    memory_cycles_per_cacheline,
    parse_machine,
    serialize_machine,
)
from .measurement import (
    ComparisonRow,
    MeasurementRecord,
    ScalingRow,
    compare,
    parse_measurements,
    scaling_report,
)
from .predictor import (
    CyclePrediction,
    predict,
    predict_table,
    predicted_bandwidths,
    round_cycles,
)

__version__ = "0.1.0"

__all__ = [
    "CacheLevelDescriptor",
    "CacheLineSet",
    "ComparisonRow",
    "CyclePrediction",
    "DataPathPolicy",
    "KernelDescriptor",
    "LevelRef",
    "LinkTransfer",
    "MachineDescriptor",
    "MeasurementRecord",
    "MemoryDescriptor",
    "PortModel",
    "ScalingRow",
    "boundary_traffic",
    "builtin_kernels",
    "bundled_machine_names",
    "compare",
    "enumerate_transfers",
    "l1_cycles",
    "level_refs",
    "load_bundled_machine",
    "memory_cycles_per_cacheline",
    "memory_ref",
    "parse_kernel_spec",
    "parse_machine",
    "parse_measurements",
    "predict",
    "predict_table",
    "predicted_bandwidths",
    "resolve_level",
    "round_cycles",
    "scaling_report",
    "serialize_machine",
    "transfer_cycles",
]
