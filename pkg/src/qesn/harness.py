"""Experiment orchestration: configs, seeded sweeps, cost estimates and result files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import rng as rngs
from .circuits import load_pair
from .errors import ConfigurationError, DegenerateNormalizationError
from .memory import MemoryProtocolSpec, memory_curve
from .readout import NMSE_NORMALIZATIONS, SplitSpec, nmse, predict, train_readout
from .reservoir import MEASUREMENT_MODES, ReservoirConfig, evolve_ensemble
from .tasks import (
    RUDDER_MAPPINGS,
    AircraftTask,
    generate_input,
    integrate_aircraft,
    make_linear_map_task,
    run_linear_map,
)

log = logging.getLogger(__name__)

TASKS = ("task1-dense", "task2-sparse", "task3-aircraft", "memory-capacity")
LINEAR_TASK_KIND = {"task1-dense": "dense", "task2-sparse": "sparse95"}
CSV_HEADER = ("task", "seed", "qubits", "epsilon", "repeat", "metric_name", "metric_value")
RESULT_SCHEMA = 1

PROFILES = {
    "simulator": dict(
        input_length=60, ensemble_size=1024, shots=4000, discard=10, train_len=35, test_len=15,
        mc_discard=14, mc_train_end=45,
    ),
    "hardware": dict(
        input_length=30, ensemble_size=300, shots=4000, discard=4, train_len=19, test_len=7,
        mc_discard=14, mc_train_end=23,
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Every field is a key of the flat ``key = value`` config file."""

    task: str = "task1-dense"
    profile: str = "simulator"
    input_length: int = 60
    ensemble_size: int = 1024
    shots: int = 4000
    mode: str = "exact"
    discard: int = 10
    train_len: int = 35
    test_len: int = 15
    epsilon_grid: tuple[float, ...] = (0.5,)
    qubit_grid: tuple[int, ...] = (5,)
    num_repeats: int = 15
    master_seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"
    circuit_dir: str | None = None
    task_dim: int = 2000
    rudder_mapping: str = "paper-literal"
    intercept: bool = True
    nmse_normalization: str = "target"
    tau_max: int = 8
    mc_discard: int = 14
    mc_train_end: int = 45
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        object.__setattr__(self, "qubit_grid", tuple(int(q) for q in self.qubit_grid))
        if self.task not in TASKS:
            raise ConfigurationError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.profile not in PROFILES:
            raise ConfigurationError(f"profile must be one of {tuple(PROFILES)}, got {self.profile!r}")
        if self.mode not in MEASUREMENT_MODES:
            raise ConfigurationError(f"mode must be one of {MEASUREMENT_MODES}, got {self.mode!r}")
        if self.output_format not in ("csv", "json"):
            raise ConfigurationError(f"output_format must be csv or json, got {self.output_format!r}")
        if self.rudder_mapping not in RUDDER_MAPPINGS:
            raise ConfigurationError(f"rudder_mapping must be one of {RUDDER_MAPPINGS}")
        if self.nmse_normalization not in NMSE_NORMALIZATIONS:
            raise ConfigurationError(f"nmse_normalization must be one of {NMSE_NORMALIZATIONS}")
        if not self.epsilon_grid or not self.qubit_grid:
            raise ConfigurationError("epsilon_grid and qubit_grid must be non-empty")
        for eps in self.epsilon_grid:
            if not 0.0 <= eps <= 1.0:
                raise ConfigurationError(f"epsilon {eps} outside [0, 1]")
        for q in self.qubit_grid:
            if q < 1:
                raise ConfigurationError(f"qubit count {q} must be positive")
        for name in ("input_length", "ensemble_size", "shots", "num_repeats", "task_dim", "workers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.task == "memory-capacity":
            self.memory_spec()
        else:
            self.split().check(self.input_length)

    def split(self) -> SplitSpec:
        return SplitSpec(self.discard, self.train_len, self.test_len)

    def memory_spec(self) -> MemoryProtocolSpec:
        return MemoryProtocolSpec(self.input_length, self.mc_discard, self.mc_train_end, self.tau_max)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["epsilon_grid"] = list(self.epsilon_grid)
        d["qubit_grid"] = list(self.qubit_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def at(self, epsilon: float, num_qubits: int) -> "ExperimentConfig":
        return dataclasses.replace(self, epsilon_grid=(epsilon,), qubit_grid=(num_qubits,))

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, list):
                value = ",".join(repr(v) for v in value)
            elif value is None:
                value = ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def _field_types() -> dict:
    return {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def coerce_value(key: str, text: str):
    """Convert a config-file string to the type of field ``key``."""
    types = _field_types()
    if key not in types:
        raise ConfigurationError(f"unknown config key {key!r}")
    kind = types[key]
    text = text.strip()
    try:
        if kind == "tuple[float, ...]":
            return tuple(float(t) for t in text.split(",") if t.strip())
        if kind == "tuple[int, ...]":
            return tuple(int(t) for t in text.split(",") if t.strip())
        if kind == "int":
            return int(text)
        if kind == "bool":
            return _parse_bool(text)
        if kind == "str | None":
            return text or None
        return text
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key!r}: {exc}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines, ``#`` comments. Unknown or repeated keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = coerce_value(key, value)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{source}:{lineno}: {exc}") from None
    return values


def resolve_config(
    profile: str | None = None,
    config_path: str | Path | None = None,
    overrides: dict | None = None,
) -> ExperimentConfig:
    """Profile defaults, then config-file values, then explicit overrides."""
    file_values = {}
    if config_path is not None:
        path = Path(config_path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        file_values = parse_config_text(text, str(path))
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    profile = profile or overrides.get("profile") or file_values.get("profile") or "simulator"
    if profile not in PROFILES:
        raise ConfigurationError(f"profile must be one of {tuple(PROFILES)}, got {profile!r}")
    values = {"profile": profile, **PROFILES[profile]}
    values.update(file_values)
    values.update(overrides)
    values["profile"] = profile
    return ExperimentConfig.from_dict(values)


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    reservoir_seed: int
    input_sha256: str
    metric_value: float | None
    error: str | None = None
    predicted: list[float] = field(default_factory=list)
    target: list[float] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    intercept: float | None = None
    c_values: list[float] | None = None


@dataclass
class ResultRecord:
    config: dict
    task: str
    epsilon: float
    num_qubits: int
    metric_name: str
    repeats: list[RepeatResult]
    mean: float | None
    std: float | None
    circuits: dict
    duration_s: float = 0.0
    schema: int = RESULT_SCHEMA

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        d = dict(d)
        d["repeats"] = [RepeatResult(**r) for r in d["repeats"]]
        return cls(**d)

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.config)

    def metric_values(self) -> list[float | None]:
        return [r.metric_value for r in self.repeats]


def repeat_input_seed(master_seed: int, repeat: int) -> int:
    return rngs.derive_seed(master_seed, rngs.INPUT, repeat)


def repeat_reservoir_seed(master_seed: int, repeat: int) -> int:
    return rngs.derive_seed(master_seed, rngs.RESERVOIR, repeat)


def repeat_inputs(config: ExperimentConfig, repeat: int) -> np.ndarray:
    """Input sequence of one repeat; shared by every grid point and task."""
    return generate_input(config.input_length, rngs.stream(repeat_input_seed(config.master_seed, repeat)))


@lru_cache(maxsize=4)
def _linear_task(kind: str, n: int, master_seed: int):
    return make_linear_map_task(kind, n, rngs.stream(master_seed, rngs.TASK))


def task_target(config: ExperimentConfig, inputs: np.ndarray) -> np.ndarray:
    if config.task in LINEAR_TASK_KIND:
        task = _linear_task(LINEAR_TASK_KIND[config.task], config.task_dim, config.master_seed)
        return run_linear_map(task, inputs)
    if config.task == "task3-aircraft":
        return integrate_aircraft(AircraftTask(input_mapping=config.rudder_mapping), inputs)
    raise ConfigurationError(f"task {config.task!r} has no scalar target")


def _aggregate(values: list[float | None]) -> tuple[float | None, float | None]:
    ok = [v for v in values if v is not None]
    if not ok:
        return None, None
    mean = float(np.mean(ok))
    std = float(np.std(ok, ddof=1)) if len(ok) > 1 else None
    return mean, std


def _single_point(config: ExperimentConfig, epsilon, num_qubits) -> tuple[float, int]:
    if epsilon is None or num_qubits is None:
        if len(config.epsilon_grid) != 1 or len(config.qubit_grid) != 1:
            raise ConfigurationError("run_task_experiment needs a single-point grid or an explicit point")
        epsilon = config.epsilon_grid[0] if epsilon is None else epsilon
        num_qubits = config.qubit_grid[0] if num_qubits is None else num_qubits
    return float(epsilon), int(num_qubits)


def run_task_experiment(
    config: ExperimentConfig, epsilon: float | None = None, num_qubits: int | None = None
) -> ResultRecord:
    """All repeats of one task at one (epsilon, qubit count) grid point."""
    epsilon, num_qubits = _single_point(config, epsilon, num_qubits)
    point = config.at(epsilon, num_qubits)
    pair = load_pair(num_qubits, config.circuit_dir)
    started = time.perf_counter()
    repeats = []
    for j in range(config.num_repeats):
        u = repeat_inputs(config, j)
        rseed = repeat_reservoir_seed(config.master_seed, j)
        res = ReservoirConfig(
            num_qubits, epsilon, pair.u0, pair.u1,
            ensemble_size=config.ensemble_size, measurement_mode=config.mode,
            shots=config.shots, master_seed=rseed,
        )
        X = evolve_ensemble(u, res)
        common = dict(
            repeat=j,
            seed=repeat_input_seed(config.master_seed, j),
            reservoir_seed=rseed,
            input_sha256=hashlib.sha256(u.tobytes()).hexdigest(),
        )
        if config.task == "memory-capacity":
            curve = memory_curve(X, u, config.memory_spec(), intercept=config.intercept)
            repeats.append(RepeatResult(metric_value=curve.mc, c_values=curve.c_values.tolist(), **common))
            continue
        y = task_target(config, u)
        split = config.split()
        w = train_readout(X[split.train_slice], y[split.train_slice], intercept=config.intercept)
        pred = predict(X[split.test_slice], w)
        target = y[split.test_slice]
        try:
            value, error = nmse(pred, target, config.nmse_normalization), None
        except DegenerateNormalizationError as exc:
            value, error = None, str(exc)
            log.warning("repeat %d (seed %d): %s", j, common["seed"], exc)
        repeats.append(
            RepeatResult(
                metric_value=value, error=error, predicted=pred.tolist(), target=target.tolist(),
                weights=w.weights.tolist(), intercept=w.intercept, **common,
            )
        )
    mean, std = _aggregate([r.metric_value for r in repeats])
    record = ResultRecord(
        config=point.to_dict(),
        task=config.task,
        epsilon=epsilon,
        num_qubits=num_qubits,
        metric_name="mc" if config.task == "memory-capacity" else "nmse",
        repeats=repeats,
        mean=mean,
        std=std,
        circuits=pair.identifiers(),
        duration_s=time.perf_counter() - started,
    )
    log.info("%s eps=%g N=%d: mean %s=%s", config.task, epsilon, num_qubits, record.metric_name, mean)
    return record


def _run_point(args) -> ResultRecord:
    config, epsilon, num_qubits = args
    return run_task_experiment(config, epsilon, num_qubits)


def grid_points(config: ExperimentConfig) -> list[tuple[float, int]]:
    return [(eps, q) for eps in config.epsilon_grid for q in config.qubit_grid]


def sweep(config: ExperimentConfig) -> list[ResultRecord]:
    """Records for every (epsilon, qubits) pair, epsilon-major; inputs are paired across points."""
    points = grid_points(config)
    for q in sorted(set(config.qubit_grid)):
        load_pair(q, config.circuit_dir)
    jobs = [(config, eps, q) for eps, q in points]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(job) for job in jobs]


def replay(record: ResultRecord) -> ResultRecord:
    """Re-run the experiment embedded in ``record``."""
    return run_task_experiment(record.experiment_config(), record.epsilon, record.num_qubits)


def estimate_cost(L: int, n_copies: int, shots: int) -> tuple[int, int]:
    """Circuit runs and gate-sequence applications of the measure-and-replay protocol.

    Returns:
        ``(N_c * S * L, N_c * S * L (L + 1) / 2)`` as exact integers.
    """
    args = {"L": L, "n_copies": n_copies, "shots": shots}
    for name, value in args.items():
        if isinstance(value, bool) or int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
    L, n_copies, shots = (int(v) for v in args.values())
    runs = n_copies * shots * L
    return runs, n_copies * shots * (L * (L + 1) // 2)


def _fmt(value) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def csv_rows(records: list[ResultRecord]):
    for rec in records:
        for rep in rec.repeats:
            base = [rec.task, str(rep.seed), str(rec.num_qubits), _fmt(rec.epsilon), str(rep.repeat)]
            if rep.c_values is not None:
                for tau, c in enumerate(rep.c_values):
                    yield base + [f"c_tau_{tau}", _fmt(c)]
            yield base + [rec.metric_name, _fmt(rep.metric_value)]


def results_to_csv(records: list[ResultRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(csv_rows(records))
    return buf.getvalue()


def results_to_json(records: list[ResultRecord]) -> str:
    return json.dumps({"schema": RESULT_SCHEMA, "records": [r.to_dict() for r in records]}, indent=1)


def parse_results_json(text: str) -> list[ResultRecord]:
    data = json.loads(text)
    return [ResultRecord.from_dict(r) for r in data["records"]]


def emit_results(records: list[ResultRecord], path: str | Path, fmt: str = "csv") -> Path:
    """Write records as CSV (one row per metric value) or lossless JSON."""
    if fmt == "csv":
        text = results_to_csv(records)
    elif fmt == "json":
        text = results_to_json(records)
    else:
        raise ConfigurationError(f"format must be csv or json, got {fmt!r}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def load_results(path: str | Path) -> list[ResultRecord]:
    return parse_results_json(Path(path).read_text())


def summarize(records: list[ResultRecord]) -> str:
    lines = []
    for r in records:
        mean = "nan" if r.mean is None else f"{r.mean:.4f}"
        std = "nan" if r.std is None or math.isnan(r.std) else f"{r.std:.4f}"
        lines.append(f"{r.task} N={r.num_qubits} eps={r.epsilon:g}: {r.metric_name} mean={mean} std={std}")
    return "\n".join(lines)
