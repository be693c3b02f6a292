"""Machine descriptors: the hardware parameterization the model consumes.

A machine is described by a small line-oriented text file (see
:func:`parse_machine`). Everything the model needs is reduced to bandwidth
properties: the L1 load/store port widths, the per-level bus widths toward
the core, and the memory bus. Clocks are kept as exact rationals so derived
quantities never drift between report columns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources

from .errors import DuplicateLevel, InvalidValue, MissingKey

_INT_RE = re.compile(r"^[0-9]+$")
_DECIMAL_RE = re.compile(r"^[0-9]+(\.[0-9]+)?$")


@dataclass(frozen=True)
class PortModel:
    """L1/core interface: bytes of loads and stores retired per cycle.

    `concurrent_load_store` is true when a load and a store can issue in the
    same cycle; false when they compete for the same issue slots.
    """

    load_bytes_per_cycle: int
    store_bytes_per_cycle: int
    concurrent_load_store: bool

    def __post_init__(self):
        if self.load_bytes_per_cycle <= 0:
            raise InvalidValue("port.load_bytes_per_cycle", "must be positive")
        if self.store_bytes_per_cycle <= 0:
            raise InvalidValue("port.store_bytes_per_cycle", "must be positive")


@dataclass(frozen=True)
class CacheLevelDescriptor:
    """One cache level; `link_bytes_per_cycle` is the bus width toward the
    next-closer-to-core level (None for L1, which is reached through the
    load/store ports instead of a bus)."""

    name: str
    capacity_bytes: int
    link_bytes_per_cycle: int | None = None


@dataclass(frozen=True)
class MemoryDescriptor:
    bytes_per_mem_clock: int
    mem_clock_ghz: Fraction

    @property
    def bandwidth_gbs(self) -> Fraction:
        return self.bytes_per_mem_clock * self.mem_clock_ghz


class DataPathPolicy(Enum):
    """How cache lines travel between hierarchy levels."""

    INCLUSIVE_HIERARCHICAL = "inclusive"
    EXCLUSIVE_DIRECT_LOAD = "exclusive_direct_load"


@dataclass(frozen=True)
class MachineDescriptor:
    """Full hardware parameterization of one CPU.

    `levels` is ordered from L1 outward. Only bandwidth-relevant properties
    are modeled; latency, associativity, TLBs and prefetchers are out of
    scope by design.
    """

    name: str
    clock_ghz: Fraction
    cache_line_bytes: int
    port_model: PortModel
    levels: tuple[CacheLevelDescriptor, ...]
    memory: MemoryDescriptor
    policy: DataPathPolicy

    def __post_init__(self):
        if not self.name:
            raise InvalidValue("name", "must be non-empty")
        if self.clock_ghz <= 0:
            raise InvalidValue("clock_ghz", "must be positive")
        if self.cache_line_bytes <= 0:
            raise InvalidValue("cache_line_bytes", "must be positive")
        if not self.levels:
            raise InvalidValue("level", "at least one cache level is required")
        seen = set()
        prev_capacity = 0
        for idx, level in enumerate(self.levels, start=1):
            if level.name.lower() in seen:
                raise InvalidValue(f"level.{idx}.name", "duplicate level name")
            seen.add(level.name.lower())
            if level.capacity_bytes <= prev_capacity:
                raise InvalidValue(
                    f"level.{idx}.capacity_kb",
                    "capacity must strictly increase with level depth",
                )
            prev_capacity = level.capacity_bytes
            if idx == 1:
                continue
            if level.link_bytes_per_cycle is None:
                raise MissingKey(f"level.{idx}.link_bytes_per_cycle")
            if level.link_bytes_per_cycle <= 0:
                raise InvalidValue(
                    f"level.{idx}.link_bytes_per_cycle", "must be positive"
                )
            if level.link_bytes_per_cycle > self.cache_line_bytes:
                raise InvalidValue(
                    f"level.{idx}.link_bytes_per_cycle",
                    "wider than one cache line (a transfer takes >= 1 cycle)",
                )
        if self.memory.bytes_per_mem_clock <= 0:
            raise InvalidValue("memory.bytes_per_clock", "must be positive")
        if self.memory.mem_clock_ghz <= 0:
            raise InvalidValue("memory.clock_ghz", "must be positive")


def memory_cycles_per_cacheline(m: MachineDescriptor) -> Fraction:
    """CPU cycles to move one cache line across the memory bus.

    cache_line_bytes * clock_ghz / (bytes_per_mem_clock * mem_clock_ghz),
    carried exactly as a rational.
    """
    return (m.cache_line_bytes * m.clock_ghz) / (
        m.memory.bytes_per_mem_clock * m.memory.mem_clock_ghz
    )


def _parse_int(key: str, text: str) -> int:
    if not _INT_RE.match(text):
        raise InvalidValue(key, f"expected a non-negative integer, got {text!r}")
    value = int(text)
    if value <= 0:
        raise InvalidValue(key, "must be positive")
    return value


def _parse_decimal(key: str, text: str) -> Fraction:
    if not _DECIMAL_RE.match(text):
        raise InvalidValue(key, f"expected a decimal number, got {text!r}")
    value = Fraction(text)
    if value <= 0:
        raise InvalidValue(key, "must be positive")
    return value


def _parse_bool(key: str, text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise InvalidValue(key, f"expected true or false, got {text!r}")


_SCALAR_KEYS = frozenset(
    {
        "name",
        "clock_ghz",
        "cache_line_bytes",
        "port.load_bytes_per_cycle",
        "port.store_bytes_per_cycle",
        "port.concurrent_load_store",
        "memory.bytes_per_clock",
        "memory.clock_ghz",
        "policy",
    }
)
_LEVEL_KEY_RE = re.compile(r"^level\.([0-9]+)\.(name|capacity_kb|link_bytes_per_cycle)$")


def parse_machine(text: str) -> MachineDescriptor:
    """Parse a machine file into a descriptor.

    The format is line oriented (UTF-8, `#` starts a comment)::

        name = shanghai
        clock_ghz = 2.4
        cache_line_bytes = 64
        port.load_bytes_per_cycle = 32
        port.store_bytes_per_cycle = 16
        port.concurrent_load_store = false
        level.1.name = L1
        level.1.capacity_kb = 64
        level.2.name = L2
        level.2.capacity_kb = 512
        level.2.link_bytes_per_cycle = 32
        memory.bytes_per_clock = 16
        memory.clock_ghz = 0.8
        policy = exclusive_direct_load

    Level indices must be contiguous starting at 1. `link_bytes_per_cycle` is
    required for every level except L1, whose bandwidth lives in the port
    model. Unknown keys are rejected.
    """
    scalars: dict[str, str] = {}
    levels: dict[int, dict[str, str]] = {}
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidValue(line, "expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        level_match = _LEVEL_KEY_RE.match(key)
        if level_match:
            idx = int(level_match.group(1))
            field = level_match.group(2)
            entry = levels.setdefault(idx, {})
            if field in entry:
                raise DuplicateLevel(key)
            entry[field] = value
            continue
        if key not in _SCALAR_KEYS:
            raise InvalidValue(key, "unknown key")
        if key in scalars:
            raise InvalidValue(key, "duplicate key")
        scalars[key] = value

    for required in _SCALAR_KEYS:
        if required not in scalars:
            raise MissingKey(required)
    if not levels:
        raise MissingKey("level.1.name")
    indices = sorted(levels)
    if indices != list(range(1, len(indices) + 1)):
        raise InvalidValue("level", "level indices must be contiguous from 1")

    parsed_levels = []
    for idx in indices:
        entry = levels[idx]
        if "name" not in entry:
            raise MissingKey(f"level.{idx}.name")
        if "capacity_kb" not in entry:
            raise MissingKey(f"level.{idx}.capacity_kb")
        link = None
        if "link_bytes_per_cycle" in entry:
            link = _parse_int(
                f"level.{idx}.link_bytes_per_cycle", entry["link_bytes_per_cycle"]
            )
        parsed_levels.append(
            CacheLevelDescriptor(
                name=entry["name"],
                capacity_bytes=_parse_int(f"level.{idx}.capacity_kb", entry["capacity_kb"])
                * 1024,
                link_bytes_per_cycle=link,
            )
        )

    policy_text = scalars["policy"]
    try:
        policy = DataPathPolicy(policy_text)
    except ValueError:
        raise InvalidValue("policy", f"unknown policy {policy_text!r}") from None

    return MachineDescriptor(
        name=scalars["name"],
        clock_ghz=_parse_decimal("clock_ghz", scalars["clock_ghz"]),
        cache_line_bytes=_parse_int("cache_line_bytes", scalars["cache_line_bytes"]),
        port_model=PortModel(
            load_bytes_per_cycle=_parse_int(
                "port.load_bytes_per_cycle", scalars["port.load_bytes_per_cycle"]
            ),
            store_bytes_per_cycle=_parse_int(
                "port.store_bytes_per_cycle", scalars["port.store_bytes_per_cycle"]
            ),
            concurrent_load_store=_parse_bool(
                "port.concurrent_load_store", scalars["port.concurrent_load_store"]
            ),
        ),
        levels=tuple(parsed_levels),
        memory=MemoryDescriptor(
            bytes_per_mem_clock=_parse_int(
                "memory.bytes_per_clock", scalars["memory.bytes_per_clock"]
            ),
            mem_clock_ghz=_parse_decimal("memory.clock_ghz", scalars["memory.clock_ghz"]),
        ),
        policy=policy,
    )


def format_decimal(value: Fraction) -> str:
    """Render a rational with a terminating decimal expansion exactly."""
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    rest, twos, fives = den, 0, 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        raise ValueError(f"{value} has no terminating decimal expansion")
    digits = max(twos, fives)
    scaled = num * 10**digits // den
    text = str(scaled).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}"


def serialize_machine(m: MachineDescriptor) -> str:
    """Canonical machine-file text; parse(serialize(m)) reproduces `m`."""
    lines = [
        f"name = {m.name}",
        f"clock_ghz = {format_decimal(m.clock_ghz)}",
        f"cache_line_bytes = {m.cache_line_bytes}",
        f"port.load_bytes_per_cycle = {m.port_model.load_bytes_per_cycle}",
        f"port.store_bytes_per_cycle = {m.port_model.store_bytes_per_cycle}",
        f"port.concurrent_load_store = {'true' if m.port_model.concurrent_load_store else 'false'}",
    ]
    for idx, level in enumerate(m.levels, start=1):
        lines.append(f"level.{idx}.name = {level.name}")
        lines.append(f"level.{idx}.capacity_kb = {level.capacity_bytes // 1024}")
        if level.link_bytes_per_cycle is not None:
            lines.append(
                f"level.{idx}.link_bytes_per_cycle = {level.link_bytes_per_cycle}"
            )
    lines.append(f"memory.bytes_per_clock = {m.memory.bytes_per_mem_clock}")
    lines.append(f"memory.clock_ghz = {format_decimal(m.memory.mem_clock_ghz)}")
    lines.append(f"policy = {m.policy.value}")
    return "\n".join(lines) + "\n"


def bundled_machine_names() -> tuple[str, ...]:
    """Names of the machine files shipped with the package."""
    data = resources.files(__package__) / "data" / "machines"
    return tuple(
        sorted(p.name[: -len(".mc")] for p in data.iterdir() if p.name.endswith(".mc"))
    )


def load_bundled_machine(name: str) -> MachineDescriptor:
    data = resources.files(__package__) / "data" / "machines" / f"{name}.mc"
    return parse_machine(data.read_text(encoding="utf-8"))
