"""Training protocol: epochs, runs, batches, and learning-curve summaries.

One epoch is a fixed number of randomly drawn pattern presentations whose
weight changes are accumulated and applied together, followed by rate
scaling of hidden-layer inputs (three-layer networks) and a test of all
four cases. Runs are independent and fully determined by (config, seed,
run index).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import _kernels
from .codec import (
    CASE_ORDER,
    LogicalEncoding,
    LogicalOp,
    PatternSet,
    TrainGenParams,
    build_pattern_set,
    generate_encoding,
)
from .errors import ConfigurationError
from .learning import (
    ResumeParams,
    ScalingParams,
    WeightDeltaAccumulator,
    apply_deltas,
    pair_delta_table,
    scale_rates,
)
from .metrics import KernelParams, convolve_train
from .network import (
    N_DELAYS,
    LayeredNetwork,
    LifParams,
    build_network,
    forward_matrices,
    init_weights,
    reset_network,
    trains_to_matrix,
)

_PARAM_GROUPS = {
    "lif": LifParams,
    "resume": ResumeParams,
    "scaling": ScalingParams,
    "traingen": TrainGenParams,
    "kernel": KernelParams,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one training condition."""

    op: LogicalOp
    seed: int
    bank_size: int = 10
    hidden_size: int | None = None
    epochs: int = 2000
    presentations_per_epoch: int = 10
    snapshot_every_epoch: bool = False
    lif: LifParams = field(default_factory=LifParams)
    resume: ResumeParams = field(default_factory=ResumeParams)
    scaling: ScalingParams = field(default_factory=ScalingParams)
    traingen: TrainGenParams = field(default_factory=TrainGenParams)
    kernel: KernelParams = field(default_factory=KernelParams)

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        if self.bank_size < 1:
            raise ConfigurationError(f"bank_size must be >= 1, got {self.bank_size}")
        if self.hidden_size is not None and self.hidden_size < 1:
            raise ConfigurationError(
                f"hidden_size must be >= 1 or absent, got {self.hidden_size}"
            )
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.presentations_per_epoch < 1:
            raise ConfigurationError("presentations_per_epoch must be >= 1")
        if self.kernel.window < self.presentation_duration:
            raise ConfigurationError(
                f"kernel window {self.kernel.window} shorter than the "
                f"presentation duration {self.presentation_duration}"
            )

    @property
    def presentation_duration(self) -> int:
        """Input-train duration plus twice the maximal synaptic delay."""
        return self.traingen.duration + 2 * N_DELAYS

    @property
    def arch_label(self) -> str:
        if self.hidden_size is None:
            return f"2x{self.bank_size}"
        return f"2x{self.bank_size}+{self.hidden_size}"

    def to_dict(self) -> dict:
        d = {
            "op": self.op.value,
            "seed": self.seed,
            "bank_size": self.bank_size,
            "hidden_size": self.hidden_size,
            "epochs": self.epochs,
            "presentations_per_epoch": self.presentations_per_epoch,
            "snapshot_every_epoch": self.snapshot_every_epoch,
        }
        for name in _PARAM_GROUPS:
            d[name] = dataclasses.asdict(getattr(self, name))
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "op", "seed", "bank_size", "hidden_size", "epochs",
            "presentations_per_epoch", "snapshot_every_epoch", *_PARAM_GROUPS,
        }
        for key in data:
            if key not in known:
                raise ConfigurationError(f"unknown config key {key!r}")
        if "op" not in data or data["op"] is None:
            raise ConfigurationError("missing required key 'op'")
        if "seed" not in data or data["seed"] is None:
            raise ConfigurationError("missing required key 'seed'")
        kwargs = {"op": LogicalOp.parse(data["op"])}
        for key in ("seed", "bank_size", "epochs", "presentations_per_epoch"):
            if key in data:
                kwargs[key] = _as_int(key, data[key])
        if "hidden_size" in data:
            value = data["hidden_size"]
            kwargs["hidden_size"] = None if value is None else _as_int("hidden_size", value)
        if "snapshot_every_epoch" in data:
            if not isinstance(data["snapshot_every_epoch"], bool):
                raise ConfigurationError("snapshot_every_epoch must be a boolean")
            kwargs["snapshot_every_epoch"] = data["snapshot_every_epoch"]
        for name, group_cls in _PARAM_GROUPS.items():
            sub = data.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigurationError(f"config key {name!r} must be a group of values")
            fields = {f.name for f in dataclasses.fields(group_cls)}
            for key, value in sub.items():
                if key not in fields:
                    raise ConfigurationError(f"unknown config key {name!r}.{key!r}")
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ConfigurationError(
                        f"config key {name}.{key} must be a number, got {value!r}"
                    )
            kwargs[name] = group_cls(**sub)
        return cls(**kwargs)


def _as_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"config key {key!r} must be an integer, got {value!r}")
    return value


def config_digest(cfg: ExperimentConfig) -> str:
    """Digest of the protocol parameters shared by comparable batches.

    Excludes op and seed so that runs of different operations (or seeds) of
    one protocol can be aggregated side by side.
    """
    d = cfg.to_dict()
    for key in ("op", "seed", "snapshot_every_epoch"):
        d.pop(key)
    payload = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def derive_run_rng(seed: int, run_id: int) -> np.random.Generator:
    """Independent, reproducible stream for one run of a batch."""
    return np.random.default_rng(np.random.SeedSequence((seed, run_id)))


@dataclass
class EpochRecord:
    """Error measures and scaling activity of one epoch."""

    epoch: int
    ste: float
    le: int
    hidden_rates: np.ndarray | None = None
    scaling_events: int = 0


@dataclass
class RunRecord:
    """Complete per-run training trace."""

    run_id: int
    seed: int
    config_digest: str
    epochs: list[EpochRecord]
    final_weights: list[np.ndarray]
    encoding: LogicalEncoding
    weight_snapshots: list[list[np.ndarray]] | None = None
    encoding_path: str | None = None


@dataclass
class _CompiledRun:
    """Per-run constants reused by every epoch."""

    duration: int
    in_mats: list[np.ndarray]
    targets: list[np.ndarray]
    g_target: list[np.ndarray]
    g_nontarget: list[np.ndarray]
    table: np.ndarray
    offset: int


def _compile_run(patterns: PatternSet, cfg: ExperimentConfig) -> _CompiledRun:
    duration = cfg.presentation_duration
    in_mats = [trains_to_matrix(case.input_trains, duration) for case in patterns.cases]
    targets = [np.asarray(case.target, dtype=np.int64) for case in patterns.cases]
    s_true, s_false = patterns.output_pair
    g_true = convolve_train(s_true, cfg.kernel)
    g_false = convolve_train(s_false, cfg.kernel)
    g_target, g_nontarget = [], []
    for (b0, b1), target in zip(CASE_ORDER, targets):
        if patterns.op.apply(b0, b1):
            g_target.append(g_true)
            g_nontarget.append(g_false)
        else:
            g_target.append(g_false)
            g_nontarget.append(g_true)
    table, offset = pair_delta_table(cfg.resume, duration + N_DELAYS)
    return _CompiledRun(duration, in_mats, targets, g_target, g_nontarget,
                        table, offset)


def run_epoch(network: LayeredNetwork, patterns: PatternSet,
              cfg: ExperimentConfig, rng: np.random.Generator,
              epoch_index: int, compiled: _CompiledRun | None = None) -> EpochRecord:
    """One training epoch: present, accumulate, apply, scale, test.

    Weight changes are collected over all presentations and applied once;
    test presentations never touch the weights, and the network is reset
    after every presentation.
    """
    if compiled is None:
        compiled = _compile_run(patterns, cfg)
    three_layer = network.has_hidden
    n_pre = network.weights[-1].shape[0]
    acc = WeightDeltaAccumulator(n_pre, N_DELAYS)
    hidden_counts = np.zeros(network.n_hidden) if three_layer else None

    draws = rng.integers(0, 4, size=cfg.presentations_per_epoch)
    for case in draws:
        mats = forward_matrices(network, compiled.in_mats[case])
        actual = np.flatnonzero(mats[-1][:, 0]).astype(np.int64)
        pre_matrix = mats[0] if three_layer else compiled.in_mats[case]
        _kernels.accumulate_pair_deltas(
            pre_matrix, compiled.targets[case], actual, N_DELAYS,
            compiled.table, compiled.offset, acc.delta,
        )
        if three_layer:
            hidden_counts += mats[0].sum(axis=0)
        reset_network(network)

    apply_deltas(acc, network)

    rates = None
    events = 0
    if three_layer:
        denominator = cfg.presentations_per_epoch * cfg.scaling.rate_window
        rates = hidden_counts / denominator
        events = scale_rates(network, rates, cfg.scaling)

    ste = 0.0
    le = 0
    for case in range(4):
        mats = forward_matrices(network, compiled.in_mats[case])
        actual = np.flatnonzero(mats[-1][:, 0]).astype(np.int64)
        reset_network(network)
        g_actual = convolve_train(actual, cfg.kernel)
        d_target = float(((g_actual - compiled.g_target[case]) ** 2).sum())
        d_other = float(((g_actual - compiled.g_nontarget[case]) ** 2).sum())
        ste += d_target
        if not d_target < d_other:
            le += 1
    return EpochRecord(epoch=epoch_index, ste=ste, le=le,
                       hidden_rates=rates, scaling_events=events)


def run_training(cfg: ExperimentConfig, run_id: int = 0) -> RunRecord:
    """Train one freshly initialised network with its own encoding."""
    rng = derive_run_rng(cfg.seed, run_id)
    encoding = generate_encoding(rng, cfg.bank_size, cfg.traingen)
    patterns = build_pattern_set(encoding, cfg.op)
    network = build_network(cfg.bank_size, cfg.hidden_size, cfg.lif)
    init_weights(network, rng)
    compiled = _compile_run(patterns, cfg)

    records = []
    snapshots = [] if cfg.snapshot_every_epoch else None
    for epoch in range(cfg.epochs):
        records.append(run_epoch(network, patterns, cfg, rng, epoch, compiled))
        if snapshots is not None:
            snapshots.append([w.copy() for w in network.weights])
    return RunRecord(
        run_id=run_id,
        seed=cfg.seed,
        config_digest=config_digest(cfg),
        epochs=records,
        final_weights=[w.copy() for w in network.weights],
        encoding=encoding,
        weight_snapshots=snapshots,
    )


def run_batch(cfg: ExperimentConfig, n_runs: int,
              jobs: int | None = None) -> list[RunRecord]:
    """Independent runs with seeds split deterministically from cfg.seed.

    Run i draws from SeedSequence((cfg.seed, i)), so results do not depend
    on scheduling order or the number of workers.
    """
    if n_runs < 1:
        raise ConfigurationError(f"n_runs must be >= 1, got {n_runs}")
    if jobs is None:
        jobs = os.cpu_count() or 1
    jobs = max(1, min(jobs, n_runs))
    if jobs == 1:
        return [run_training(cfg, run_id) for run_id in range(n_runs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(run_training, cfg), range(n_runs)))


@dataclass(frozen=True)
class WindowSummary:
    """Mean errors of one (operation, epoch window) cell."""

    op: str
    arch: str
    window_start: int
    window_end: int
    mean_ste: float
    sem_ste: float
    mean_le: float
    sem_le: float


def window_stats(ste: np.ndarray, le: np.ndarray,
                 window: tuple[int, int]) -> tuple[float, float, float, float]:
    """Mean and standard error over all (run, epoch) samples of a window.

    ste and le have shape (n_runs, n_epochs); the window is half-open.
    """
    start, end = window
    n_epochs = ste.shape[1]
    if not 0 <= start < end <= n_epochs:
        raise ConfigurationError(
            f"window {start}:{end} outside the recorded range 0:{n_epochs}"
        )

    def stats(mat):
        samples = mat[:, start:end].ravel().astype(np.float64)
        mean = float(samples.mean())
        sem = float(samples.std(ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else 0.0
        return mean, sem

    mean_ste, sem_ste = stats(ste)
    mean_le, sem_le = stats(le)
    return mean_ste, sem_ste, mean_le, sem_le


def summarize(cfg: ExperimentConfig, records, windows) -> list[WindowSummary]:
    """Windowed means over a set of runs sharing one configuration."""
    if not records:
        raise ConfigurationError("no run records to summarize")
    digests = sorted({r.config_digest for r in records})
    if digests != [config_digest(cfg)]:
        raise ConfigurationError(
            "records do not share the expected config digest: " + ", ".join(digests)
        )
    lengths = {len(r.epochs) for r in records}
    if len(lengths) != 1:
        raise ConfigurationError(f"records differ in epoch count: {sorted(lengths)}")
    ste = np.array([[er.ste for er in r.epochs] for r in records])
    le = np.array([[er.le for er in r.epochs] for r in records])
    rows = []
    for window in windows:
        mean_ste, sem_ste, mean_le, sem_le = window_stats(ste, le, window)
        rows.append(WindowSummary(
            op=cfg.op.value, arch=cfg.arch_label,
            window_start=int(window[0]), window_end=int(window[1]),
            mean_ste=mean_ste, sem_ste=sem_ste,
            mean_le=mean_le, sem_le=sem_le,
        ))
    return rows


def format_measurement(mean: float, sem: float) -> str:
    """Render mean with the error's most significant digit in parentheses."""
    if not math.isfinite(mean):
        return str(mean)
    if sem <= 0 or not math.isfinite(sem):
        return f"{mean:g}"
    exponent = math.floor(math.log10(sem))
    digit = round(sem / 10 ** exponent)
    if digit == 10:
        exponent += 1
        digit = 1
    if exponent >= 0:
        scale = 10 ** exponent
        return f"{round(mean / scale) * scale:.0f}({digit * scale:.0f})"
    decimals = -exponent
    return f"{mean:.{decimals}f}({digit})"
