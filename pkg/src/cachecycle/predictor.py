"""Composes L1 execution and transfer cycles into per-level predictions.

The total runtime of one cache-line set is the L1 execution time plus the
summed cycle cost of every cache-line transfer, with no overlap between
contributions. Predictions also carry two byte counts per cache-line set:

* effective bytes: what the application logically touches, one line per
  stream.
* real bytes: what actually crosses the boundary of the target level,
  including write-allocate fills, writebacks and victim exchanges.

Both convert to bandwidths via bytes * clock / cycles (decimal GB/s).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .datapath import (
    LevelRef,
    LinkTransfer,
    boundary_traffic,
    enumerate_transfers,
    level_refs,
    transfer_cycles,
)
from .errors import ZeroCycles
from .kernels import KernelDescriptor, l1_cycles
from .machine import MachineDescriptor


@dataclass(frozen=True)
class CyclePrediction:
    """Per-level runtime decomposition for one (machine, kernel) pair."""

    machine: str
    kernel: str
    level: LevelRef
    l1_cycles: Fraction
    transfer_breakdown: tuple[LinkTransfer, ...]
    total_cycles: Fraction
    effective_bytes: int
    real_bytes: int

    @property
    def transfer_cycles(self) -> Fraction:
        return self.total_cycles - self.l1_cycles


def predict(
    m: MachineDescriptor, kernel: KernelDescriptor, target: LevelRef
) -> CyclePrediction:
    """Predict cycles per cache-line set with data resident at `target`."""
    transfers = enumerate_transfers(m, kernel, target)
    execution = l1_cycles(kernel, m.port_model, m.cache_line_bytes)
    effective = kernel.streams * m.cache_line_bytes
    if target.depth == 1:
        real = effective
    else:
        real = boundary_traffic(transfers, target, m.cache_line_bytes)
    return CyclePrediction(
        machine=m.name,
        kernel=kernel.name,
        level=target,
        l1_cycles=execution,
        transfer_breakdown=transfers,
        total_cycles=execution + transfer_cycles(transfers),
        effective_bytes=effective,
        real_bytes=real,
    )


def predict_table(
    m: MachineDescriptor, kernels: Sequence[KernelDescriptor]
) -> list[list[CyclePrediction]]:
    """Cross product of kernels and all levels of `m`; one row per kernel."""
    return [[predict(m, k, level) for level in level_refs(m)] for k in kernels]


def predicted_bandwidths(
    p: CyclePrediction, clock_ghz: Fraction
) -> tuple[float, float]:
    """(real, effective) GB/s implied by a prediction at the given clock."""
    if p.total_cycles <= 0:
        raise ZeroCycles(f"{p.machine}/{p.kernel}/{p.level.name}")
    real = float(p.real_bytes * clock_ghz / p.total_cycles)
    effective = float(p.effective_bytes * clock_ghz / p.total_cycles)
    return real, effective


def round_cycles(value: Fraction) -> int:
    """Nearest integer, halves away from zero; used only when rendering."""
    if value < 0:
        return -round_cycles(-value)
    return int(value + Fraction(1, 2))


def _fmt_cycles(value: Fraction) -> str:
    return format(float(value), ".6g")


def prediction_csv(m: MachineDescriptor, predictions: Iterable[CyclePrediction]) -> str:
    """Serialize predictions, one row per (kernel, level)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "machine",
            "kernel",
            "level",
            "l1_cycles",
            "transfer_cycles",
            "total_cycles",
            "real_gbs",
            "effective_gbs",
        ]
    )
    for p in predictions:
        real, effective = predicted_bandwidths(p, m.clock_ghz)
        writer.writerow(
            [
                p.machine,
                p.kernel,
                p.level.name,
                _fmt_cycles(p.l1_cycles),
                _fmt_cycles(p.transfer_cycles),
                _fmt_cycles(p.total_cycles),
                f"{real:.1f}",
                f"{effective:.1f}",
            ]
        )
    return out.getvalue()


def breakdown_csv(m: MachineDescriptor, predictions: Iterable[CyclePrediction]) -> str:
    """Per-transfer rows: link, cache lines, cycles, stream role."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["machine", "kernel", "level", "link", "cache_lines", "cycles", "stream_role"]
    )
    for p in predictions:
        writer.writerow(
            [p.machine, p.kernel, p.level.name, "L1 execution", "", _fmt_cycles(p.l1_cycles), ""]
        )
        for t in p.transfer_breakdown:
            writer.writerow(
                [
                    p.machine,
                    p.kernel,
                    p.level.name,
                    f"{t.from_level.name}->{t.to_level.name}",
                    t.cache_lines,
                    _fmt_cycles(t.cycles),
                    t.stream_role,
                ]
            )
    return out.getvalue()


def _render_columns(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[i]) for i, cell in enumerate(row) if i > 0]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def cycle_table(m: MachineDescriptor, table: list[list[CyclePrediction]]) -> str:
    """Aligned text table: kernels down, levels across, rounded cycles."""
    title = f"machine: {m.name}  (cycles per cache-line update)\n"
    if not table:
        return title
    rows = [["kernel"] + [p.level.name for p in table[0]]]
    for row in table:
        rows.append([row[0].kernel] + [str(round_cycles(p.total_cycles)) for p in row])
    return title + _render_columns(rows)


def breakdown_table(predictions: Iterable[CyclePrediction]) -> str:
    """Readable per-transfer decomposition for each prediction."""
    chunks = []
    for p in predictions:
        lines = [
            f"{p.machine} / {p.kernel} @ {p.level.name}: "
            f"total {_fmt_cycles(p.total_cycles)} cycles"
        ]
        lines.append(f"  {'L1 execution':<14}{'':<13}{_fmt_cycles(p.l1_cycles):>8} cy")
        for t in p.transfer_breakdown:
            link = f"{t.from_level.name}->{t.to_level.name}"
            detail = f"{t.cache_lines} CL ({t.stream_role})"
            lines.append(f"  {link:<14}{detail:<13}{_fmt_cycles(t.cycles):>8} cy")
        chunks.append("\n".join(lines))
    return "\n".join(chunks) + "\n"
