from fractions import Fraction

import pytest
from hypothesis import given, settings

import model_strategies as ms
from cachecycle import (
    DataPathPolicy,
    LevelRef,
    boundary_traffic,
    enumerate_transfers,
    level_refs,
    memory_cycles_per_cacheline,
    resolve_level,
    transfer_cycles,
)
from cachecycle.errors import UnknownLevel


def chain(transfers):
    return [
        (t.from_level.name, t.to_level.name, t.stream_role, t.cycles) for t in transfers
    ]


def test_level_refs_order(machines):
    names = [ref.name for ref in level_refs(machines["shanghai"])]
    assert names == ["L1", "L2", "L3", "Memory"]
    assert [ref.name for ref in level_refs(machines["core2"])] == ["L1", "L2", "Memory"]


def test_resolve_level_synonyms(machines):
    m = machines["core2"]
    assert resolve_level(m, "l2").name == "L2"
    assert resolve_level(m, "MEM").is_memory
    assert resolve_level(m, "Memory").is_memory
    with pytest.raises(UnknownLevel):
        resolve_level(m, "L3")


def test_target_l1_is_empty(machines, kernels):
    for m in machines.values():
        for k in kernels.values():
            assert enumerate_transfers(m, k, level_refs(m)[0]) == ()


def test_unknown_level_rejected(machines, kernels):
    bogus = LevelRef(depth=9, name="L9")
    with pytest.raises(UnknownLevel):
        enumerate_transfers(machines["core2"], kernels["load"], bogus)


def test_inclusive_store_at_l2(machines, kernels):
    m = machines["core2"]
    transfers = enumerate_transfers(m, kernels["store"], resolve_level(m, "L2"))
    assert chain(transfers) == [
        ("L2", "L1", "write", Fraction(2)),
        ("L1", "L2", "write", Fraction(2)),
    ]
    assert transfer_cycles(transfers) == 4


def test_inclusive_copy_at_l2_sums_to_six(machines, kernels):
    m = machines["core2"]
    transfers = enumerate_transfers(m, kernels["copy"], resolve_level(m, "L2"))
    read_part = transfer_cycles([t for t in transfers if t.stream_role == "read"])
    write_part = transfer_cycles([t for t in transfers if t.stream_role == "write"])
    assert (read_part, write_part) == (2, 4)
    assert transfer_cycles(transfers) == 6


def test_inclusive_chains_start_at_deepest_boundary(machines, kernels):
    m = machines["nehalem"]
    transfers = enumerate_transfers(m, kernels["load"], resolve_level(m, "Memory"))
    assert chain(transfers) == [
        ("Memory", "L3", "read", memory_cycles_per_cacheline(m)),
        ("L3", "L2", "read", Fraction(2)),
        ("L2", "L1", "read", Fraction(2)),
    ]


def test_nehalem_triad_l3_transfer_cycles(machines, kernels):
    m = machines["nehalem"]
    transfers = enumerate_transfers(m, kernels["triad"], resolve_level(m, "L3"))
    assert transfer_cycles(transfers) == 16


def test_exclusive_exchange_at_l2(machines, kernels):
    m = machines["shanghai"]
    transfers = enumerate_transfers(m, kernels["load"], resolve_level(m, "L2"))
    assert chain(transfers) == [
        ("L2", "L1", "read", Fraction(2)),
        ("L1", "L2", "read", Fraction(2)),
    ]
    triad = enumerate_transfers(m, kernels["triad"], resolve_level(m, "L2"))
    assert transfer_cycles(triad) == 12


def test_exclusive_store_at_memory_full_walk(machines, kernels):
    m = machines["shanghai"]
    transfers = enumerate_transfers(m, kernels["store"], resolve_level(m, "Memory"))
    assert chain(transfers) == [
        ("Memory", "L1", "write", Fraction(12)),
        ("L1", "L2", "write", Fraction(2)),
        ("L2", "L3", "write", Fraction(2)),
        ("L3", "Memory", "write", Fraction(12)),
    ]
    assert transfer_cycles(transfers) == 28


def test_exclusive_clean_read_victims_are_dropped(machines, kernels):
    m = machines["shanghai"]
    transfers = enumerate_transfers(m, kernels["load"], resolve_level(m, "Memory"))
    assert chain(transfers) == [
        ("Memory", "L1", "read", Fraction(12)),
        ("L1", "L2", "read", Fraction(2)),
        ("L2", "L3", "read", Fraction(2)),
    ]
    assert transfer_cycles(transfers) == 16


def test_transfer_cycles_empty_is_zero():
    assert transfer_cycles([]) == 0


def test_boundary_traffic_values(machines, kernels):
    core2 = machines["core2"]
    l2 = resolve_level(core2, "L2")
    store = enumerate_transfers(core2, kernels["store"], l2)
    assert boundary_traffic(store, l2, core2.cache_line_bytes) == 128

    shanghai = machines["shanghai"]
    l3 = resolve_level(shanghai, "L3")
    triad = enumerate_transfers(shanghai, kernels["triad"], l3)
    assert boundary_traffic(triad, l3, shanghai.cache_line_bytes) == 384

    l1 = level_refs(core2)[0]
    empty = enumerate_transfers(core2, kernels["copy"], l1)
    assert boundary_traffic(empty, l1, core2.cache_line_bytes) == 0


def test_32_byte_boundary_costs_two_cycles(machines, kernels):
    m = machines["nehalem"]
    transfers = enumerate_transfers(m, kernels["load"], resolve_level(m, "L2"))
    assert [t.cycles for t in transfers] == [Fraction(2)]


@given(ms.machine_kernel_pairs())
@settings(max_examples=300)
def test_inclusive_write_allocate_conservation(pair):
    machine, kernel = pair
    if machine.policy is not DataPathPolicy.INCLUSIVE_HIERARCHICAL:
        return
    for target in level_refs(machine)[1:]:
        transfers = enumerate_transfers(machine, kernel, target)
        assert all(
            t.from_level.depth > t.to_level.depth
            for t in transfers
            if t.stream_role == "read"
        )
        for depth in range(2, target.depth + 1):
            fills = sum(
                t.cache_lines
                for t in transfers
                if t.stream_role == "write"
                and (t.from_level.depth, t.to_level.depth) == (depth, depth - 1)
            )
            evictions = sum(
                t.cache_lines
                for t in transfers
                if t.stream_role == "write"
                and (t.from_level.depth, t.to_level.depth) == (depth - 1, depth)
            )
            assert fills == evictions == kernel.write_streams


@given(ms.machine_kernel_pairs())
@settings(max_examples=300)
def test_exclusive_cascade_conservation(pair):
    machine, kernel = pair
    if machine.policy is not DataPathPolicy.EXCLUSIVE_DIRECT_LOAD:
        return
    streams = kernel.streams
    cache_count = len(machine.levels)
    for target in level_refs(machine)[1:]:
        transfers = enumerate_transfers(machine, kernel, target)
        into_l1 = sum(t.cache_lines for t in transfers if t.to_level.depth == 1)
        assert into_l1 == streams
        for depth in range(1, min(target.depth, cache_count)):
            victims = sum(
                t.cache_lines
                for t in transfers
                if t.from_level.depth == depth and t.to_level.depth == depth + 1
            )
            assert victims == streams
        writebacks = sum(
            t.cache_lines for t in transfers if t.to_level.is_memory
        )
        assert writebacks == (kernel.write_streams if target.is_memory else 0)
