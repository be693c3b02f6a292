"""Cache-line transfers between hierarchy levels.

Given a machine, a kernel and the level where the kernel's data resides,
this module enumerates every cache-line movement one cache-line set causes
and prices it in CPU cycles. Two data-path policies exist:

* inclusive hierarchical: lines move boundary by boundary. A read miss
  moves one line across every boundary between the target level and L1; a
  write miss moves two (the write-allocate fill plus the later writeback).
* exclusive direct load: all caches hang off one shared bus and a miss
  loads straight into L1. The line displaced from L1 cascades one level
  down, displacing a victim at each intermediate level. Only dirty lines
  (write streams) are written back to memory; clean read victims are
  dropped at the outermost cache.

The minimum transfer size is one cache line, and contributions never
overlap, so costs are additive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Sequence

from .errors import UnknownLevel
from .kernels import KernelDescriptor
from .machine import DataPathPolicy, MachineDescriptor, memory_cycles_per_cacheline

MEMORY_NAME = "Memory"

StreamRole = Literal["read", "write"]


@dataclass(frozen=True, order=True)
class LevelRef:
    """A position in one machine's hierarchy; depth 1 is L1, memory is last.

    Ordering follows depth, so refs sort from closest-to-core outward.
    """

    depth: int
    name: str
    is_memory: bool = False


@dataclass(frozen=True)
class LinkTransfer:
    """One cache-line movement across one hierarchy boundary."""

    from_level: LevelRef
    to_level: LevelRef
    cache_lines: int
    cycles: Fraction
    stream_role: StreamRole


def level_refs(m: MachineDescriptor) -> tuple[LevelRef, ...]:
    """All levels of `m`, L1 outward, with memory appended."""
    refs = [
        LevelRef(depth=i, name=level.name) for i, level in enumerate(m.levels, start=1)
    ]
    refs.append(LevelRef(depth=len(m.levels) + 1, name=MEMORY_NAME, is_memory=True))
    return tuple(refs)


def memory_ref(m: MachineDescriptor) -> LevelRef:
    return level_refs(m)[-1]


def resolve_level(m: MachineDescriptor, name: str) -> LevelRef:
    """Look up a level by name, case-insensitively; MEM means memory."""
    wanted = name.strip().lower()
    refs = level_refs(m)
    if wanted in ("mem", "memory"):
        return refs[-1]
    for ref in refs[:-1]:
        if ref.name.lower() == wanted:
            return ref
    raise UnknownLevel(name)


def _check_level(m: MachineDescriptor, target: LevelRef) -> None:
    if target not in level_refs(m):
        raise UnknownLevel(target.name)


def _boundary_width(m: MachineDescriptor, deeper_depth: int) -> Fraction:
    """Bytes per CPU cycle across the boundary below `deeper_depth`.

    For a cache level this is its bus width toward the core; for memory it
    is the cache line size divided by the memory cycles per cache line, so
    that one line costs exactly that many cycles.
    """
    if deeper_depth <= len(m.levels):
        return Fraction(m.levels[deeper_depth - 1].link_bytes_per_cycle)
    return Fraction(m.cache_line_bytes) / memory_cycles_per_cacheline(m)


def _transfer(
    m: MachineDescriptor, src: LevelRef, dst: LevelRef, role: StreamRole
) -> LinkTransfer:
    deeper = max(src.depth, dst.depth)
    cycles = Fraction(m.cache_line_bytes) / _boundary_width(m, deeper)
    return LinkTransfer(
        from_level=src, to_level=dst, cache_lines=1, cycles=cycles, stream_role=role
    )


def enumerate_transfers(
    m: MachineDescriptor, kernel: KernelDescriptor, target: LevelRef
) -> tuple[LinkTransfer, ...]:
    """All transfers one cache-line set causes with data resident at `target`.

    Returns an empty tuple for an L1 target. Transfers are grouped per
    stream (reads first), each stream's chain starting at the deepest
    boundary.
    """
    _check_level(m, target)
    if target.depth == 1:
        return ()
    refs = level_refs(m)
    last_cache = len(m.levels)
    transfers: list[LinkTransfer] = []
    roles: list[StreamRole] = ["read"] * kernel.read_streams + (
        ["write"] * kernel.write_streams
    )
    for role in roles:
        if m.policy is DataPathPolicy.INCLUSIVE_HIERARCHICAL:
            for depth in range(target.depth, 1, -1):
                deeper, closer = refs[depth - 1], refs[depth - 2]
                transfers.append(_transfer(m, deeper, closer, role))
                if role == "write":
                    transfers.append(_transfer(m, closer, deeper, role))
        else:
            transfers.append(_transfer(m, target, refs[0], role))
            for depth in range(1, min(target.depth, last_cache)):
                transfers.append(_transfer(m, refs[depth - 1], refs[depth], role))
            if target.is_memory and role == "write":
                transfers.append(_transfer(m, refs[last_cache - 1], target, role))
    return tuple(transfers)


def transfer_cycles(transfers: Iterable[LinkTransfer]) -> Fraction:
    """Exact sum of the member cycle costs."""
    return sum((t.cycles for t in transfers), Fraction(0))


def boundary_traffic(
    transfers: Sequence[LinkTransfer], level: LevelRef, cache_line_bytes: int
) -> int:
    """Bytes crossing the boundary of `level`: every transfer touching it."""
    return sum(
        t.cache_lines * cache_line_bytes
        for t in transfers
        if t.from_level == level or t.to_level == level
    )
