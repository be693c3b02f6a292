"""Measured benchmark results and prediction-versus-measurement reports.

Measurements are stored in cycles per cache-line update, the same unit as
predictions, so comparisons are pure arithmetic: the efficiency of a run is
predicted cycles over measured cycles, and real/effective bandwidths follow
from the byte counts of the matching prediction and the machine's clock.

Rows whose efficiency exceeds 100% are flagged `exceeds-model`, never
clamped; they mark cases the model does not describe. Pure-load rows on an
exclusive-cache machine are flagged `exclusive-load-traffic`: their real
bandwidth counts victim-exchange traffic the application never observes,
which published application-level numbers typically leave out.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .datapath import LevelRef, resolve_level
from .errors import (
    BadHeader,
    DuplicateRow,
    MeasurementError,
    MissingBaseline,
    MissingPrediction,
    NonPositiveCycles,
    UnknownKernel,
    UnknownMachine,
)
from .kernels import KernelDescriptor, builtin_kernels
from .machine import MachineDescriptor
from .predictor import CyclePrediction

MEASUREMENT_HEADER = ("machine", "kernel", "level", "threads", "cycles_per_cl_update")

EXCEEDS_MODEL = "exceeds-model"
EXCLUSIVE_LOAD_TRAFFIC = "exclusive-load-traffic"


@dataclass(frozen=True)
class MeasurementRecord:
    machine: str
    kernel: str
    level: LevelRef
    threads: int
    cycles_per_cl_update: float
    source: str = "fixture"

    @property
    def key(self) -> tuple:
        return (self.machine, self.kernel, self.level.name, self.threads, self.source)


@dataclass(frozen=True)
class ComparisonRow:
    machine: str
    kernel: str
    level: LevelRef
    predicted_cycles: float
    measured_cycles: float
    efficiency_pct: float
    real_gbs: float
    effective_gbs: float
    real_bytes: int
    effective_bytes: int
    flags: tuple[str, ...]


@dataclass(frozen=True)
class ScalingRow:
    threads: int
    effective_gbs: float
    speedup: float


def _machine_map(
    machines: Mapping[str, MachineDescriptor] | MachineDescriptor,
) -> Mapping[str, MachineDescriptor]:
    if isinstance(machines, MachineDescriptor):
        return {machines.name: machines}
    return machines


def parse_measurements(
    text: str,
    machines: Mapping[str, MachineDescriptor] | MachineDescriptor,
    kernels: Iterable[KernelDescriptor] | None = None,
    source: str = "fixture",
) -> list[MeasurementRecord]:
    """Read a measurement CSV and validate every row.

    Expected header: machine,kernel,level,threads,cycles_per_cl_update.
    Machines and levels must refer to the supplied descriptors; kernels
    default to the builtins. Duplicate rows are rejected.
    """
    machine_map = _machine_map(machines)
    known_kernels = {k.name for k in (kernels if kernels is not None else builtin_kernels())}
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise BadHeader("", ",".join(MEASUREMENT_HEADER)) from None
    if tuple(h.strip() for h in header) != MEASUREMENT_HEADER:
        raise BadHeader(",".join(header), ",".join(MEASUREMENT_HEADER))

    records: list[MeasurementRecord] = []
    seen = set()
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(MEASUREMENT_HEADER):
            raise MeasurementError(f"row has {len(row)} fields, expected 5: {row!r}")
        machine_name, kernel_name, level_name, threads_text, cycles_text = (
            cell.strip() for cell in row
        )
        machine = machine_map.get(machine_name)
        if machine is None:
            raise UnknownMachine(machine_name)
        if kernel_name not in known_kernels:
            raise UnknownKernel(kernel_name)
        level = resolve_level(machine, level_name)
        try:
            threads = int(threads_text)
            cycles = float(cycles_text)
        except ValueError as exc:
            raise MeasurementError(f"bad numeric field in row {row!r}: {exc}") from None
        if threads < 1:
            raise MeasurementError(f"threads must be >= 1, got {threads}")
        if cycles <= 0:
            raise NonPositiveCycles(cycles)
        record = MeasurementRecord(
            machine=machine_name,
            kernel=kernel_name,
            level=level,
            threads=threads,
            cycles_per_cl_update=cycles,
            source=source,
        )
        if record.key in seen:
            raise DuplicateRow(record.key)
        seen.add(record.key)
        records.append(record)
    return records


def measurements_csv(records: Iterable[MeasurementRecord]) -> str:
    """Serialize records in the same format parse_measurements accepts."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MEASUREMENT_HEADER)
    for r in records:
        writer.writerow(
            [r.machine, r.kernel, r.level.name, r.threads, format(r.cycles_per_cl_update, ".6g")]
        )
    return out.getvalue()


_BUILTIN_ORDER = {k.name: i for i, k in enumerate(builtin_kernels())}


def _kernel_order(name: str) -> tuple:
    return (_BUILTIN_ORDER.get(name, len(_BUILTIN_ORDER)), name)


def compare(
    predictions: Iterable[CyclePrediction],
    records: Iterable[MeasurementRecord],
    machines: Mapping[str, MachineDescriptor] | MachineDescriptor,
) -> list[ComparisonRow]:
    """Join single-thread measurements with predictions.

    Rows with threads > 1 are skipped: the model predicts single-core runs
    only (scaling_report handles threaded records). Efficiency uses the
    unrounded predicted cycles; bandwidths use the measured cycles together
    with the prediction's byte counts.
    """
    machine_map = _machine_map(machines)
    index = {(p.machine, p.kernel, p.level.name): p for p in predictions}
    rows = []
    for record in records:
        if record.threads != 1:
            continue
        key = (record.machine, record.kernel, record.level.name)
        prediction = index.get(key)
        if prediction is None:
            raise MissingPrediction(key)
        clock = float(machine_map[record.machine].clock_ghz)
        measured = record.cycles_per_cl_update
        predicted = float(prediction.total_cycles)
        efficiency = 100.0 * predicted / measured
        flags = []
        if efficiency > 100.0:
            flags.append(EXCEEDS_MODEL)
        pure_load = prediction.transfer_breakdown and all(
            t.stream_role == "read" for t in prediction.transfer_breakdown
        )
        if pure_load and prediction.real_bytes > prediction.effective_bytes:
            flags.append(EXCLUSIVE_LOAD_TRAFFIC)
        rows.append(
            ComparisonRow(
                machine=record.machine,
                kernel=record.kernel,
                level=record.level,
                predicted_cycles=predicted,
                measured_cycles=measured,
                efficiency_pct=efficiency,
                real_gbs=prediction.real_bytes * clock / measured,
                effective_gbs=prediction.effective_bytes * clock / measured,
                real_bytes=prediction.real_bytes,
                effective_bytes=prediction.effective_bytes,
                flags=tuple(flags),
            )
        )
    rows.sort(key=lambda r: (r.machine, r.level.depth, _kernel_order(r.kernel)))
    return rows


def scaling_report(
    machine: MachineDescriptor,
    kernel: KernelDescriptor,
    records: Sequence[MeasurementRecord],
) -> list[ScalingRow]:
    """Bandwidth versus thread count for one (machine, kernel, level) group.

    Converts each row's cycles back to effective GB/s with the machine's
    nominal clock and reports the speedup relative to the 1-thread row.
    There is no prediction column: the analytic model is single-core.
    """
    if not records:
        raise MissingBaseline("no measurement rows supplied")
    group = {(r.machine, r.kernel, r.level.name) for r in records}
    if len(group) != 1:
        raise MeasurementError(f"records span multiple groups: {sorted(group)}")
    threads_seen = set()
    for r in records:
        if r.threads in threads_seen:
            raise DuplicateRow((r.machine, r.kernel, r.level.name, r.threads))
        threads_seen.add(r.threads)
    if 1 not in threads_seen:
        raise MissingBaseline(f"no 1-thread row in group {group.pop()}")

    effective_bytes = kernel.streams * machine.cache_line_bytes
    clock = float(machine.clock_ghz)

    def bandwidth(record: MeasurementRecord) -> float:
        return effective_bytes * clock / record.cycles_per_cl_update

    ordered = sorted(records, key=lambda r: r.threads)
    base = bandwidth(next(r for r in ordered if r.threads == 1))
    return [
        ScalingRow(threads=r.threads, effective_gbs=bandwidth(r), speedup=bandwidth(r) / base)
        for r in ordered
    ]


def _effective_cell(row: ComparisonRow) -> str:
    if row.effective_bytes == row.real_bytes:
        return "-"
    return f"{row.effective_gbs:.1f}"


def comparison_csv(rows: Iterable[ComparisonRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "machine",
            "kernel",
            "level",
            "predicted",
            "measured",
            "efficiency_pct",
            "real_gbs",
            "effective_gbs",
            "flags",
        ]
    )
    for row in rows:
        writer.writerow(
            [
                row.machine,
                row.kernel,
                row.level.name,
                format(row.predicted_cycles, ".6g"),
                format(row.measured_cycles, ".6g"),
                f"{row.efficiency_pct:.1f}",
                f"{row.real_gbs:.1f}",
                _effective_cell(row),
                ";".join(row.flags),
            ]
        )
    return out.getvalue()


def comparison_table(rows: Sequence[ComparisonRow]) -> str:
    """Aligned text report grouped by machine and level."""
    lines = []
    for machine in sorted({r.machine for r in rows}):
        lines.append(f"machine: {machine}")
        machine_rows = [r for r in rows if r.machine == machine]
        for depth in sorted({r.level.depth for r in machine_rows}):
            level_rows = [r for r in machine_rows if r.level.depth == depth]
            lines.append(f"  level {level_rows[0].level.name}")
            header = ["kernel", "pred", "measured", "eff%", "GB/s", "eff GB/s", "flags"]
            table = [header]
            for r in level_rows:
                table.append(
                    [
                        r.kernel,
                        format(r.predicted_cycles, ".6g"),
                        format(r.measured_cycles, ".6g"),
                        f"{r.efficiency_pct:.1f}",
                        f"{r.real_gbs:.1f}",
                        _effective_cell(r),
                        ";".join(r.flags),
                    ]
                )
            widths = [max(len(row[i]) for row in table) for i in range(len(header))]
            for row in table:
                cells = [row[0].ljust(widths[0])] + [
                    row[i].rjust(widths[i]) for i in range(1, len(row))
                ]
                lines.append("    " + "  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def scaling_table(
    machine: MachineDescriptor,
    kernel: KernelDescriptor,
    groups: Mapping[str, list[ScalingRow]],
) -> str:
    """Threads down, levels across; cells show GB/s with speedup."""
    level_names = list(groups)
    threads = sorted({row.threads for rows in groups.values() for row in rows})
    header = ["threads"] + level_names
    table = [header]
    for t in threads:
        cells = [str(t)]
        for name in level_names:
            row = next((r for r in groups[name] if r.threads == t), None)
            cells.append("-" if row is None else f"{row.effective_gbs:.1f} ({row.speedup:.2f}x)")
        table.append(cells)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = [f"machine: {machine.name}  kernel: {kernel.name}  (effective GB/s)"]
    for row in table:
        cells = [row[0].ljust(widths[0])] + [
            row[i].rjust(widths[i]) for i in range(1, len(row))
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
