"""Spike-train generation and logical-value encodings.

Spike trains are 1-d int64 numpy arrays of strictly increasing times in
milliseconds. Encoding trains live in [0, duration); the TRUE/FALSE trains
of one neuron are produced by splitting a common base train, which keeps
their spikes more than min_isi ms apart (the exclusion window).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigurationError, GenerationError

# Case order used everywhere a logical operation is evaluated on all four
# input combinations.
CASE_ORDER = ((False, False), (False, True), (True, False), (True, True))

DEFAULT_SAMPLING_BUDGET = 1_000_000


class LogicalOp(enum.Enum):
    """Binary logical operations trainable by the experiment harness."""

    TRUE = "true"
    J0 = "j0"
    AND = "and"
    XOR = "xor"

    def apply(self, b0: bool, b1: bool) -> bool:
        if self is LogicalOp.TRUE:
            return True
        if self is LogicalOp.J0:
            return b0
        if self is LogicalOp.AND:
            return b0 and b1
        return b0 != b1

    @classmethod
    def parse(cls, name: str) -> "LogicalOp":
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown op {name!r}; expected one of "
                + ", ".join(op.value for op in cls)
            ) from None


@dataclass(frozen=True)
class TrainGenParams:
    """Constants for constrained stochastic train generation."""

    rate_input: float = 0.2
    rate_output: float = 0.06
    min_isi: int = 10
    duration: int = 100
    output_quiet_head: int = 20
    output_spike_count: int = 3

    def __post_init__(self):
        for name in ("rate_input", "rate_output"):
            rate = getattr(self, name)
            if not 0.0 < rate <= 1.0:
                raise ConfigurationError(f"{name} must be in (0, 1], got {rate}")
        if self.min_isi < 1:
            raise ConfigurationError(f"min_isi must be >= 1, got {self.min_isi}")
        if self.duration < 1:
            raise ConfigurationError(f"duration must be >= 1, got {self.duration}")
        if not 0 <= self.output_quiet_head < self.duration:
            raise ConfigurationError(
                "output_quiet_head must lie within the train duration, got "
                f"{self.output_quiet_head}"
            )
        if self.output_spike_count < 1:
            raise ConfigurationError("output_spike_count must be >= 1")


TrainPair = tuple[np.ndarray, np.ndarray]


@dataclass
class LogicalEncoding:
    """Per-neuron (S_TRUE, S_FALSE) train pairs for one experiment instance."""

    bank_j0: list[TrainPair]
    bank_j1: list[TrainPair]
    output: TrainPair

    @property
    def bank_size(self) -> int:
        return len(self.bank_j0)

    def input_trains(self, b0: bool, b1: bool) -> list[np.ndarray]:
        """Concrete trains for all input neurons, bank J0 first."""
        trains = [pair[0] if b0 else pair[1] for pair in self.bank_j0]
        trains += [pair[0] if b1 else pair[1] for pair in self.bank_j1]
        return trains

    def output_train(self, value: bool) -> np.ndarray:
        return self.output[0] if value else self.output[1]


@dataclass(frozen=True)
class PatternCase:
    """One input-target test case of a logical operation."""

    b0: bool
    b1: bool
    input_trains: list[np.ndarray]
    target: np.ndarray


@dataclass(frozen=True)
class PatternSet:
    """The four input-target cases of one logical operation."""

    op: LogicalOp
    cases: tuple[PatternCase, ...]
    output_pair: TrainPair = field(repr=False)

    def __post_init__(self):
        if len(self.cases) != 4:
            raise ConfigurationError("a pattern set holds exactly 4 cases")


def generate_base_train(rng: np.random.Generator, rate: float, min_isi: int,
                        duration: int) -> np.ndarray:
    """Draw a spike train with per-slot probability `rate`.

    Slots closer than min_isi+1 to the previous spike are suppressed, so the
    resulting intervals all exceed min_isi (one uniform is consumed per slot
    either way).
    """
    return _kernels.base_train(rng, float(rate), int(min_isi), int(duration))


def split_train_pair(rng: np.random.Generator, base: np.ndarray) -> TrainPair:
    """Distribute the spikes of `base` over two disjoint trains, p=1/2 each."""
    base = np.asarray(base, dtype=np.int64)
    pick = rng.random(base.size) < 0.5
    return base[pick], base[~pick]


def generate_output_pair(rng: np.random.Generator, params: TrainGenParams,
                         max_attempts: int = DEFAULT_SAMPLING_BUDGET) -> TrainPair:
    """Rejection-sample the output neuron's train pair.

    Regenerates base train and split until both trains carry exactly
    output_spike_count spikes, none earlier than output_quiet_head.
    """
    s_true, s_false, attempts = _kernels.sample_constrained_pair(
        rng, float(params.rate_output), int(params.min_isi),
        int(params.duration), int(params.output_quiet_head),
        int(params.output_spike_count), int(max_attempts),
    )
    if attempts < 0:
        raise GenerationError(
            f"no acceptable output train pair within {max_attempts} attempts; "
            "output-pair constraints look infeasible for these parameters"
        )
    return s_true, s_false


def generate_encoding(rng: np.random.Generator, bank_size: int,
                      params: TrainGenParams) -> LogicalEncoding:
    """Independent train pairs for both input banks plus the output pair."""
    if bank_size < 1:
        raise ConfigurationError(f"bank_size must be >= 1, got {bank_size}")

    def input_pair() -> TrainPair:
        base = generate_base_train(rng, params.rate_input, params.min_isi,
                                   params.duration)
        return split_train_pair(rng, base)

    bank_j0 = [input_pair() for _ in range(bank_size)]
    bank_j1 = [input_pair() for _ in range(bank_size)]
    output = generate_output_pair(rng, params)
    return LogicalEncoding(bank_j0=bank_j0, bank_j1=bank_j1, output=output)


def build_pattern_set(encoding: LogicalEncoding, op: LogicalOp) -> PatternSet:
    """Bind an encoding to an operation, yielding its four test cases."""
    cases = tuple(
        PatternCase(
            b0=b0,
            b1=b1,
            input_trains=encoding.input_trains(b0, b1),
            target=encoding.output_train(op.apply(b0, b1)),
        )
        for b0, b1 in CASE_ORDER
    )
    return PatternSet(op=op, cases=cases, output_pair=encoding.output)


def encoding_records(encoding: LogicalEncoding) -> list[dict]:
    """Flatten an encoding into serializable per-neuron records."""
    records = []
    for bank, pairs in ((0, encoding.bank_j0), (1, encoding.bank_j1)):
        for index, (s_true, s_false) in enumerate(pairs):
            records.append({
                "role": "input",
                "bank": bank,
                "index": index,
                "true_times": [int(t) for t in s_true],
                "false_times": [int(t) for t in s_false],
            })
    s_true, s_false = encoding.output
    records.append({
        "role": "output",
        "bank": None,
        "index": 0,
        "true_times": [int(t) for t in s_true],
        "false_times": [int(t) for t in s_false],
    })
    return records


def dump_encoding(encoding: LogicalEncoding, fp) -> None:
    """Write an encoding as JSON lines (one neuron pair per line)."""
    for record in encoding_records(encoding):
        fp.write(json.dumps(record) + "\n")
