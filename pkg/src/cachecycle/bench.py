"""Portable microbenchmark harness for the streaming kernels.

Kernels are JIT-compiled native loops (numba, GIL released) over per-thread
private float64 arrays. Timing uses the monotonic wall clock; cycles are
derived afterwards via the descriptor's nominal core clock. Every timed
sample runs long enough (>= 20 ms) to make timer granularity irrelevant,
and the best of N repetitions is reported, the usual convention for
bandwidth microbenchmarks.

Threaded runs pin each worker to its own core where the OS supports it
(set CACHECYCLE_PIN=off to disable), synchronize on a barrier before and
after every timed section, and aggregate bandwidth as total bytes over the
slowest thread's time. After timing, output arrays are checked against an
analytically known checksum so the compiler cannot elide the work.
"""

from __future__ import annotations

import math
import os
import threading
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .datapath import LevelRef, level_refs
from .errors import (
    AllocationFailure,
    ChecksumMismatch,
    Infeasible,
    PinningUnsupported,
    TimerTooCoarse,
    UnknownLevel,
)
from .kernels import KernelDescriptor
from .machine import MachineDescriptor

ALPHA = 1.5
MIN_SAMPLE_SECONDS = 0.020
PIN_ENV_VAR = "CACHECYCLE_PIN"


@dataclass
class BenchConfig:
    machine: MachineDescriptor
    kernel: KernelDescriptor
    target: LevelRef
    threads: int = 1
    repetitions: int = 10
    inner_iterations: int | None = None  # auto-calibrated when None
    working_set_bytes: int | None = None  # per-stream; size_for_level when None

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.repetitions < 3:
            raise ValueError("repetitions must be >= 3")


@dataclass
class BenchResult:
    machine: str
    kernel: str
    level: str
    threads: int
    working_set_bytes: int
    inner_iterations: int
    samples_gbs: tuple[float, ...]
    best_gbs: float
    cycles_per_cl_update: float
    pinned: bool
    barrier_overhead_s: float
    checksum_value: float
    checksum_expected: float
    samples_seconds: tuple[float, ...] = field(default_factory=tuple)


def size_for_level(
    m: MachineDescriptor, target: LevelRef, kernel: KernelDescriptor
) -> int:
    """Bytes per stream so the whole working set sits exactly at `target`.

    The total over all streams is half the target level's capacity (so it
    fits) and must be at least four times the next-closer level's capacity
    (so it does not fit there). A memory target uses four times the
    outermost cache. Raises Infeasible instead of silently adjusting.
    """
    if target not in level_refs(m):
        raise UnknownLevel(target.name)
    if target.is_memory:
        total = 4 * m.levels[-1].capacity_bytes
    else:
        capacity = m.levels[target.depth - 1].capacity_bytes
        total = capacity // 2
        if target.depth > 1:
            inner = m.levels[target.depth - 2].capacity_bytes
            if total < 4 * inner:
                raise Infeasible(
                    f"half of {target.name} ({total} B) is below 4x the next-closer "
                    f"level ({4 * inner} B); no working set separates the two"
                )
    per_stream = total // kernel.streams
    per_stream -= per_stream % m.cache_line_bytes
    return max(per_stream, m.cache_line_bytes)


@njit(nogil=True, fastmath=True, cache=True)
def _k_load(a, reps):
    acc = 0.0
    for _ in range(reps):
        s = 0.0
        for i in range(a.shape[0]):
            s += a[i]
        acc += s
    return acc


@njit(nogil=True, fastmath=True, cache=True)
def _k_store(a, value, reps):
    for _ in range(reps):
        for i in range(a.shape[0]):
            a[i] = value
    return 0.0


@njit(nogil=True, fastmath=True, cache=True)
def _k_copy(dst, src, reps):
    for _ in range(reps):
        for i in range(dst.shape[0]):
            dst[i] = src[i]
    return 0.0


@njit(nogil=True, fastmath=True, cache=True)
def _k_triad(a, b, c, alpha, reps):
    for _ in range(reps):
        for i in range(a.shape[0]):
            a[i] = b[i] + alpha * c[i]
    return 0.0


@njit(nogil=True, fastmath=True, cache=True)
def _k_generic(reads, writes, alpha, reps):
    # read streams are summed, write streams assigned; reduction returned
    # for pure-load shapes so the loop cannot be removed
    n = reads.shape[1] if reads.shape[0] > 0 else writes.shape[1]
    acc = 0.0
    for _ in range(reps):
        if writes.shape[0] == 0:
            s = 0.0
            for i in range(n):
                for k in range(reads.shape[0]):
                    s += reads[k, i]
            acc += s
        else:
            for i in range(n):
                value = alpha
                if reads.shape[0] > 0:
                    value = 0.0
                    for k in range(reads.shape[0]):
                        value += reads[k, i]
                for w in range(writes.shape[0]):
                    writes[w, i] = value
    return acc


class _Workload:
    """Arrays plus the jitted call for one thread's share of the work."""

    def __init__(self, kernel: KernelDescriptor, n: int):
        self.kernel = kernel
        self.n = n
        try:
            if kernel.name == "load":
                self.arrays = [np.ones(n)]
            elif kernel.name == "store":
                self.arrays = [np.zeros(n)]
            elif kernel.name == "copy":
                self.arrays = [np.zeros(n), np.ones(n)]
            elif kernel.name == "triad":
                self.arrays = [np.zeros(n), np.ones(n), np.full(n, 2.0)]
            else:
                self.reads = np.ones((kernel.read_streams, n))
                self.writes = np.zeros((kernel.write_streams, n))
                self.arrays = [self.reads, self.writes]
        except MemoryError as exc:
            raise AllocationFailure(kernel.streams * n * 8) from exc
        self.last_return = 0.0

    def run(self, reps: int) -> None:
        k = self.kernel
        if k.name == "load":
            self.last_return = _k_load(self.arrays[0], reps)
        elif k.name == "store":
            _k_store(self.arrays[0], ALPHA, reps)
        elif k.name == "copy":
            _k_copy(self.arrays[0], self.arrays[1], reps)
        elif k.name == "triad":
            _k_triad(self.arrays[0], self.arrays[1], self.arrays[2], ALPHA, reps)
        else:
            self.last_return = _k_generic(self.reads, self.writes, ALPHA, reps)

    def checksum(self, reps: int) -> tuple[float, float]:
        """(observed, expected) checksum after `reps` passes."""
        k = self.kernel
        n = self.n
        if k.name == "load":
            return self.last_return, float(reps) * n
        if k.name == "store":
            return float(np.sum(self.arrays[0])), ALPHA * n
        if k.name == "copy":
            return float(np.sum(self.arrays[0])), float(n)
        if k.name == "triad":
            return float(np.sum(self.arrays[0])), (1.0 + ALPHA * 2.0) * n
        if k.write_streams == 0:
            return self.last_return, float(reps) * n * k.read_streams
        expected_value = float(k.read_streams) if k.read_streams else ALPHA
        return float(np.sum(self.writes)), expected_value * n * k.write_streams


def _pin_current_thread(core: int) -> bool:
    if os.environ.get(PIN_ENV_VAR, "").lower() == "off":
        return False
    try:
        os.sched_setaffinity(0, {core})
        return True
    except (AttributeError, OSError) as exc:
        warnings.warn(PinningUnsupported(f"thread pinning unavailable: {exc}"))
        return False


def _available_cores(threads: int) -> list[int]:
    try:
        cores = sorted(os.sched_getaffinity(0))
    except AttributeError:
        cores = list(range(os.cpu_count() or 1))
    return [cores[i % len(cores)] for i in range(threads)]


def _calibrate(workload: _Workload) -> int:
    workload.run(1)  # JIT warm-up outside any timing
    reps = 1
    while True:
        start = time.perf_counter()
        workload.run(reps)
        elapsed = time.perf_counter() - start
        # confirm well above the floor: timed samples often run faster than
        # the calibration pass and must still land at >= MIN_SAMPLE_SECONDS
        if elapsed >= MIN_SAMPLE_SECONDS * 1.4:
            return reps
        if elapsed <= 0:
            reps *= 2
            continue
        reps = max(reps + 1, math.ceil(reps * MIN_SAMPLE_SECONDS * 1.6 / elapsed))


def run_bench(cfg: BenchConfig) -> BenchResult:
    """Run one benchmark configuration and return its best bandwidth."""
    resolution = time.get_clock_info("perf_counter").resolution
    if resolution > MIN_SAMPLE_SECONDS / 100:
        raise TimerTooCoarse(resolution)

    per_stream = cfg.working_set_bytes
    if per_stream is None:
        per_stream = size_for_level(cfg.machine, cfg.target, cfg.kernel)
    n = per_stream // (8 * cfg.threads)
    n -= n % (cfg.machine.cache_line_bytes // 8)
    n = max(n, cfg.machine.cache_line_bytes // 8)

    inner = cfg.inner_iterations
    if inner is None:
        inner = _calibrate(_Workload(cfg.kernel, n))

    threads = cfg.threads
    cores = _available_cores(threads)
    barrier = threading.Barrier(threads)
    elapsed = [[0.0] * cfg.repetitions for _ in range(threads)]
    barrier_probe = [0.0] * threads
    checksums = [None] * threads
    pinned_flags = [False] * threads
    failures: list[BaseException] = []

    def worker(idx: int) -> None:
        try:
            pinned_flags[idx] = _pin_current_thread(cores[idx])
            workload = _Workload(cfg.kernel, n)
            # untimed warm-up: touches every page, loads the JIT cache and
            # lets the core ramp up before the first timed sample
            workload.run(max(1, inner // 8))
            probe_rounds = 5
            barrier.wait()
            start = time.perf_counter()
            for _ in range(probe_rounds):
                barrier.wait()
            barrier_probe[idx] = (time.perf_counter() - start) / probe_rounds
            for rep in range(cfg.repetitions):
                barrier.wait()
                t0 = time.perf_counter()
                workload.run(inner)
                elapsed[idx][rep] = time.perf_counter() - t0
                barrier.wait()
            checksums[idx] = workload.checksum(inner)
        except BaseException as exc:  # propagate to the caller after join
            failures.append(exc)
            barrier.abort()

    workers = [threading.Thread(target=worker, args=(i,)) for i in range(threads)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    if failures:
        # secondary BrokenBarrierErrors are fallout from the aborting thread
        root = [f for f in failures if not isinstance(f, threading.BrokenBarrierError)]
        raise (root or failures)[0]

    bytes_per_pass = n * 8 * cfg.kernel.streams * threads
    sample_seconds = tuple(
        max(elapsed[t][rep] for t in range(threads)) for rep in range(cfg.repetitions)
    )
    samples = tuple(bytes_per_pass * inner / s / 1e9 for s in sample_seconds)
    best = max(samples)

    observed = sum(c[0] for c in checksums)
    expected = sum(c[1] for c in checksums)
    if not math.isclose(observed, expected, rel_tol=1e-9, abs_tol=1e-6):
        raise ChecksumMismatch(observed, expected)

    effective_bytes = cfg.kernel.streams * cfg.machine.cache_line_bytes
    cycles = effective_bytes * float(cfg.machine.clock_ghz) / best
    return BenchResult(
        machine=cfg.machine.name,
        kernel=cfg.kernel.name,
        level=cfg.target.name,
        threads=threads,
        working_set_bytes=per_stream,
        inner_iterations=inner,
        samples_gbs=samples,
        best_gbs=best,
        cycles_per_cl_update=cycles,
        pinned=all(pinned_flags),
        barrier_overhead_s=max(barrier_probe),
        checksum_value=observed,
        checksum_expected=expected,
        samples_seconds=sample_seconds,
    )
