"""Command line interface: ``qesn {run,sweep,memory-capacity,estimate-cost,show-config}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import QESNError


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _add_common(p: argparse.ArgumentParser, task: bool = True) -> None:
    p.add_argument("--config", help="flat key=value experiment config file")
    p.add_argument("--profile", choices=sorted(harness.PROFILES), help="parameter preset (default: simulator)")
    if task:
        p.add_argument("--task", choices=[t for t in harness.TASKS if t != "memory-capacity"])
    p.add_argument("--epsilon", type=_float_list, help="reset rate(s), comma separated")
    p.add_argument("--qubits", type=_int_list, help="qubit count(s), comma separated")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--repeats", type=int, help="number of repeats (independent input sequences)")
    p.add_argument("--mode", choices=["exact", "shots"], help="measurement mode")
    p.add_argument("--copies", type=int, help="ensemble size N_c")
    p.add_argument("--shots", type=int, help="shots per circuit copy and step")
    p.add_argument("--task-dim", type=int, help="internal dimension n of tasks I/II")
    p.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=None, help="fit a readout bias")
    p.add_argument("--workers", type=int, help="parallel grid points")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default: csv)")


def _overrides(args, task: str | None = None) -> dict:
    return {
        "task": task or getattr(args, "task", None),
        "epsilon_grid": args.epsilon,
        "qubit_grid": args.qubits,
        "master_seed": args.seed,
        "num_repeats": args.repeats,
        "mode": args.mode,
        "ensemble_size": args.copies,
        "shots": args.shots,
        "task_dim": args.task_dim,
        "intercept": args.intercept,
        "workers": args.workers,
        "output_path": args.out,
        "output_format": args.format,
    }


def _config(args, task: str | None = None) -> harness.ExperimentConfig:
    return harness.resolve_config(args.profile, args.config, _overrides(args, task))


def _write(records, config: harness.ExperimentConfig) -> None:
    if config.output_path:
        path = harness.emit_results(records, config.output_path, config.output_format)
        print(f"wrote {len(records)} record(s) to {path}", file=sys.stderr)
    elif config.output_format == "json":
        sys.stdout.write(harness.results_to_json(records) + "\n")
    else:
        sys.stdout.write(harness.results_to_csv(records))
    print(harness.summarize(records), file=sys.stderr)


def cmd_run(args) -> int:
    config = _config(args)
    if len(harness.grid_points(config)) != 1:
        print("run takes a single epsilon and qubit count; use sweep for grids", file=sys.stderr)
        return 2
    _write([harness.run_task_experiment(config)], config)
    return 0


def cmd_sweep(args) -> int:
    config = _config(args)
    _write(harness.sweep(config), config)
    return 0


def cmd_memory(args) -> int:
    config = _config(args, task="memory-capacity")
    _write(harness.sweep(config), config)
    return 0


def cmd_cost(args) -> int:
    preset = harness.PROFILES[args.profile or "simulator"]
    pick = lambda value, key: preset[key] if value is None else value
    L = pick(args.length, "input_length")
    n_c = pick(args.copies, "ensemble_size")
    shots = pick(args.shots, "shots")
    runs, applications = harness.estimate_cost(L, n_c, shots)
    print(f"L={L} N_c={n_c} S={shots}")
    print(f"applications_per_circuit_shot={L * (L + 1) // 2}")
    print(f"circuit_runs={runs}")
    print(f"gate_applications={applications}")
    return 0


def cmd_show(args) -> int:
    sys.stdout.write(_config(args).to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qesn", description="Quantum echo-state network simulator and benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one task at a single (epsilon, qubits) point")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="task over the epsilon x qubits grid")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("memory-capacity", help="delay-reconstruction memory capacity over the grid")
    _add_common(p, task=False)
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("estimate-cost", help="circuit runs of the measure-and-replay protocol")
    p.add_argument("--profile", choices=sorted(harness.PROFILES))
    p.add_argument("-L", "--length", type=int, help="input length")
    p.add_argument("--copies", type=int, help="circuit copies N_c")
    p.add_argument("--shots", type=int, help="shots S")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("show-config", help="print the resolved configuration")
    _add_common(p)
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (QESNError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
