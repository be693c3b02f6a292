"""Streaming loop kernels and their L1-resident execution time.

A kernel is reduced to its stream counts: how many arrays it reads and how
many it writes per loop iteration. The four builtins cover raw load, store
and copy operations plus the stream triad a = b + alpha * c; arbitrary
user-defined stream counts are accepted as well.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidKernel
from .machine import PortModel


@dataclass(frozen=True)
class KernelDescriptor:
    name: str
    read_streams: int
    write_streams: int
    element_bytes: int = 8

    def __post_init__(self):
        if self.read_streams < 0 or self.write_streams < 0:
            raise InvalidKernel(f"{self.name}: stream counts must be >= 0")
        if self.read_streams + self.write_streams < 1:
            raise InvalidKernel(f"{self.name}: at least one stream is required")
        if self.element_bytes <= 0:
            raise InvalidKernel(f"{self.name}: element_bytes must be positive")

    @property
    def streams(self) -> int:
        return self.read_streams + self.write_streams


@dataclass(frozen=True)
class CacheLineSet:
    """One cache line per stream: the unit all cycle counts are stated in."""

    iterations_per_set: int
    read_bytes: int
    write_bytes: int

    @classmethod
    def for_kernel(cls, kernel: KernelDescriptor, cache_line_bytes: int) -> "CacheLineSet":
        if cache_line_bytes % kernel.element_bytes != 0:
            raise InvalidKernel(
                f"{kernel.name}: element size {kernel.element_bytes} does not divide "
                f"the cache line size {cache_line_bytes}"
            )
        return cls(
            iterations_per_set=cache_line_bytes // kernel.element_bytes,
            read_bytes=kernel.read_streams * cache_line_bytes,
            write_bytes=kernel.write_streams * cache_line_bytes,
        )


def builtin_kernels() -> tuple[KernelDescriptor, ...]:
    """The four builtin kernels, in canonical order."""
    return (
        KernelDescriptor("load", 1, 0),
        KernelDescriptor("store", 0, 1),
        KernelDescriptor("copy", 1, 1),
        KernelDescriptor("triad", 2, 1),
    )


_KERNEL_SPEC_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*):R([0-9]+)W([0-9]+)$")


def parse_kernel_spec(spec: str) -> KernelDescriptor:
    """Resolve a kernel given on the command line.

    Either a builtin name (`load`, `store`, `copy`, `triad`) or an inline
    definition `name:R<reads>W<writes>`, e.g. `daxpy:R2W1`.
    """
    for kernel in builtin_kernels():
        if spec == kernel.name:
            return kernel
    match = _KERNEL_SPEC_RE.match(spec)
    if not match:
        raise InvalidKernel(
            f"unknown kernel {spec!r}; use a builtin name or name:R<reads>W<writes>"
        )
    return KernelDescriptor(match.group(1), int(match.group(2)), int(match.group(3)))


def l1_cycles(
    kernel: KernelDescriptor, port: PortModel, cache_line_bytes: int
) -> Fraction:
    """Cycles to execute one cache-line set with all data resident in L1.

    With concurrent load/store ports the slower side hides the faster one;
    otherwise loads and stores serialize and their cycle counts add up.
    """
    line_set = CacheLineSet.for_kernel(kernel, cache_line_bytes)
    read_cycles = Fraction(line_set.read_bytes, port.load_bytes_per_cycle)
    write_cycles = Fraction(line_set.write_bytes, port.store_bytes_per_cycle)
    if port.concurrent_load_store:
        return max(read_cycles, write_cycles)
    return read_cycles + write_cycles
