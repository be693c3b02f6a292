"""Command-line front end: predict, bench, compare, report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from importlib import resources

from . import measurement as ms
from . import predictor as pr
from .datapath import level_refs, resolve_level
from .errors import CachecycleError, Infeasible
from .kernels import builtin_kernels, parse_kernel_spec
from .machine import MachineDescriptor, bundled_machine_names, parse_machine


def _bundled_text(kind: str, filename: str) -> str | None:
    entry = resources.files(__package__) / "data" / kind / filename
    if entry.is_file():
        return entry.read_text(encoding="utf-8")
    return None


def _load_machine(spec: str) -> MachineDescriptor:
    path = Path(spec)
    if path.is_file():
        return parse_machine(path.read_text(encoding="utf-8"))
    stem = path.name[: -len(".mc")] if path.name.endswith(".mc") else path.name
    text = _bundled_text("machines", f"{stem}.mc")
    if text is not None:
        return parse_machine(text)
    raise FileNotFoundError(
        f"machine file '{spec}' not found (bundled: {', '.join(bundled_machine_names())})"
    )


def _load_measurement_text(spec: str) -> str:
    path = Path(spec)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    text = _bundled_text("fixtures", path.name)
    if text is not None:
        return text
    raise FileNotFoundError(f"measurement file '{spec}' not found")


def _select_kernels(specs: list[str] | None):
    if not specs:
        return list(builtin_kernels())
    kernels = [parse_kernel_spec(s) for s in specs]
    order = {k.name: i for i, k in enumerate(builtin_kernels())}
    kernels.sort(key=lambda k: (order.get(k.name, len(order)),))
    return kernels


def _select_levels(m: MachineDescriptor, specs: list[str] | None):
    if not specs:
        return list(level_refs(m))
    chosen = [resolve_level(m, s) for s in specs]
    return sorted(set(chosen), key=lambda ref: ref.depth)


def _csv_list(text: str) -> list[str]:
    return [item for item in (piece.strip() for piece in text.split(",")) if item]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachecycle",
        description="Cycle and bandwidth model for streaming loop kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_levels: bool = True) -> None:
        p.add_argument(
            "-m",
            "--machine",
            required=True,
            help="machine file path or bundled name (core2, nehalem, shanghai)",
        )
        p.add_argument(
            "-k",
            "--kernels",
            type=_csv_list,
            default=None,
            help="comma-separated kernels: builtin names or name:R<reads>W<writes>",
        )
        if with_levels:
            p.add_argument(
                "-l",
                "--levels",
                type=_csv_list,
                default=None,
                help="comma-separated levels (default: all, L1 outward)",
            )

    p_predict = sub.add_parser("predict", help="predict cycles and bandwidths")
    add_common(p_predict)
    p_predict.add_argument("--format", choices=("table", "csv"), default="table")
    p_predict.add_argument(
        "--breakdown",
        action="store_true",
        help="list every cache-line transfer with its cycle cost",
    )

    p_bench = sub.add_parser("bench", help="run the microbenchmark harness")
    add_common(p_bench)
    p_bench.add_argument("--threads", type=int, default=1)
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.add_argument(
        "-o", "--out", default="-", help="measurement CSV destination (default stdout)"
    )

    p_compare = sub.add_parser(
        "compare", help="compare measured cycles against predictions"
    )
    add_common(p_compare, with_levels=False)
    p_compare.add_argument(
        "-i", "--input", required=True, help="measurement CSV (path or bundled fixture)"
    )
    p_compare.add_argument("--format", choices=("table", "csv"), default="table")

    p_report = sub.add_parser(
        "report", help="full prediction, decomposition, comparison and scaling bundle"
    )
    add_common(p_report, with_levels=False)
    p_report.add_argument(
        "-i", "--input", required=True, help="measurement CSV (path or bundled fixture)"
    )

    return parser


def _cmd_predict(args) -> str:
    m = _load_machine(args.machine)
    kernels = _select_kernels(args.kernels)
    levels = _select_levels(m, args.levels)
    table = [[pr.predict(m, k, level) for level in levels] for k in kernels]
    predictions = [p for row in table for p in row]
    if args.breakdown:
        if args.format == "csv":
            return pr.breakdown_csv(m, predictions)
        return pr.cycle_table(m, table) + "\n" + pr.breakdown_table(predictions)
    if args.format == "csv":
        return pr.prediction_csv(m, predictions)
    return pr.cycle_table(m, table)


def _cmd_bench(args) -> int:
    from . import bench  # deferred: pulls in the JIT toolchain

    m = _load_machine(args.machine)
    kernels = _select_kernels(args.kernels)
    levels = _select_levels(m, args.levels)
    records = []
    for kernel in kernels:
        for level in levels:
            try:
                cfg = bench.BenchConfig(
                    machine=m,
                    kernel=kernel,
                    target=level,
                    threads=args.threads,
                    repetitions=args.reps,
                )
                result = bench.run_bench(cfg)
            except Infeasible as exc:
                print(
                    f"warning: skipping {kernel.name}@{level.name}: {exc}",
                    file=sys.stderr,
                )
                continue
            print(
                f"{m.name} {kernel.name}@{level.name} threads={result.threads}: "
                f"best {result.best_gbs:.1f} GB/s, "
                f"{result.cycles_per_cl_update:.2f} cy/CL update"
                f"{'' if result.pinned else ' (unpinned)'}",
                file=sys.stderr,
            )
            records.append(
                ms.MeasurementRecord(
                    machine=result.machine,
                    kernel=result.kernel,
                    level=level,
                    threads=result.threads,
                    cycles_per_cl_update=result.cycles_per_cl_update,
                    source="harness",
                )
            )
    if not records:
        print("error: no benchmark produced a result", file=sys.stderr)
        return 1
    csv_text = ms.measurements_csv(records)
    if args.out == "-":
        sys.stdout.write(csv_text)
    else:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    return 0


def _comparison_rows(args):
    m = _load_machine(args.machine)
    kernels = _select_kernels(args.kernels)
    text = _load_measurement_text(args.input)
    records = ms.parse_measurements(text, m, kernels=kernels)
    predictions = [
        pr.predict(m, k, level) for k in kernels for level in level_refs(m)
    ]
    return m, kernels, records, ms.compare(predictions, records, m)


def _cmd_compare(args) -> str:
    _, _, _, rows = _comparison_rows(args)
    if args.format == "csv":
        return ms.comparison_csv(rows)
    return ms.comparison_table(rows)


def _cmd_report(args) -> str:
    m, kernels, records, rows = _comparison_rows(args)
    sections = []
    table = pr.predict_table(m, kernels)
    sections.append(pr.cycle_table(m, table))
    if len(m.levels) >= 2:
        l2 = level_refs(m)[1]
        l2_preds = [pr.predict(m, k, l2) for k in kernels]
        sections.append(
            f"decomposition at {l2.name}:\n" + pr.breakdown_table(l2_preds)
        )
    sections.append(ms.comparison_table(rows))
    kernel_map = {k.name: k for k in kernels}
    threaded: dict[tuple[str, str], list[ms.MeasurementRecord]] = {}
    for record in records:
        threaded.setdefault((record.kernel, record.level.name), []).append(record)
    scaling_sections: dict[str, dict[str, tuple[int, list[ms.ScalingRow]]]] = {}
    for (kernel_name, level_name), group in threaded.items():
        if len({r.threads for r in group}) < 2:
            continue
        scaled = ms.scaling_report(m, kernel_map[kernel_name], group)
        scaling_sections.setdefault(kernel_name, {})[level_name] = (
            group[0].level.depth,
            scaled,
        )
    for kernel_name, by_level in sorted(scaling_sections.items()):
        ordered = {
            name: scaled
            for name, (_, scaled) in sorted(by_level.items(), key=lambda kv: kv[1][0])
        }
        sections.append(ms.scaling_table(m, kernel_map[kernel_name], ordered))
    return "\n".join(sections)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "predict":
            output = _cmd_predict(args)
        elif args.command == "bench":
            return _cmd_bench(args)
        elif args.command == "compare":
            output = _cmd_compare(args)
        elif args.command == "report":
            output = _cmd_report(args)
        else:  # pragma: no cover - argparse enforces the choices
            return 1
    except CachecycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
