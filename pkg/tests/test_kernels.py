from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

import model_strategies as ms
from cachecycle import (
    CacheLineSet,
    KernelDescriptor,
    builtin_kernels,
    l1_cycles,
    parse_kernel_spec,
)
from cachecycle.errors import InvalidKernel
from cachecycle.machine import PortModel

INTEL_PORTS = PortModel(16, 16, True)
AMD_PORTS = PortModel(32, 16, False)


def test_builtin_kernels_order_and_streams():
    names = [(k.name, k.read_streams, k.write_streams) for k in builtin_kernels()]
    assert names == [("load", 1, 0), ("store", 0, 1), ("copy", 1, 1), ("triad", 2, 1)]


@pytest.mark.parametrize(
    "kernel,ports,expected",
    [
        ("load", INTEL_PORTS, 4),
        ("store", INTEL_PORTS, 4),
        ("copy", INTEL_PORTS, 4),
        ("triad", INTEL_PORTS, 8),
        ("load", AMD_PORTS, 2),
        ("store", AMD_PORTS, 4),
        ("copy", AMD_PORTS, 6),
        ("triad", AMD_PORTS, 8),
    ],
)
def test_l1_cycles_reference_values(kernel, ports, expected):
    k = next(b for b in builtin_kernels() if b.name == kernel)
    assert l1_cycles(k, ports, 64) == Fraction(expected)


def test_cache_line_set_defaults():
    triad = builtin_kernels()[3]
    line_set = CacheLineSet.for_kernel(triad, 64)
    assert line_set.iterations_per_set == 8
    assert line_set.read_bytes == 128
    assert line_set.write_bytes == 64


def test_element_size_must_divide_cache_line():
    odd = KernelDescriptor("odd", 1, 0, element_bytes=7)
    with pytest.raises(InvalidKernel):
        CacheLineSet.for_kernel(odd, 64)
    with pytest.raises(InvalidKernel):
        l1_cycles(odd, INTEL_PORTS, 64)


def test_kernel_stream_validation():
    with pytest.raises(InvalidKernel):
        KernelDescriptor("none", 0, 0)
    with pytest.raises(InvalidKernel):
        KernelDescriptor("neg", -1, 2)


def test_parse_kernel_spec():
    assert parse_kernel_spec("triad") == builtin_kernels()[3]
    daxpy = parse_kernel_spec("daxpy:R2W1")
    assert (daxpy.name, daxpy.read_streams, daxpy.write_streams) == ("daxpy", 2, 1)
    with pytest.raises(InvalidKernel):
        parse_kernel_spec("daxpy")
    with pytest.raises(InvalidKernel):
        parse_kernel_spec("bad:R2")


@given(ms.kernels(), st.sampled_from([INTEL_PORTS, AMD_PORTS]))
@settings(max_examples=200)
def test_adding_a_stream_never_speeds_things_up(kernel, ports):
    base = l1_cycles(kernel, ports, 64)
    more_reads = KernelDescriptor("r", kernel.read_streams + 1, kernel.write_streams)
    more_writes = KernelDescriptor("w", kernel.read_streams, kernel.write_streams + 1)
    assert l1_cycles(more_reads, ports, 64) >= base
    assert l1_cycles(more_writes, ports, 64) >= base


@given(ms.kernels(), st.sampled_from([INTEL_PORTS, AMD_PORTS]))
@settings(max_examples=200)
def test_doubling_port_widths_halves_cycles(kernel, ports):
    doubled = PortModel(
        2 * ports.load_bytes_per_cycle,
        2 * ports.store_bytes_per_cycle,
        ports.concurrent_load_store,
    )
    assert l1_cycles(kernel, doubled, 64) * 2 == l1_cycles(kernel, ports, 64)
