"""Spike-train error (van Rossum distance) and logical-error classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import CASE_ORDER, LogicalOp, TrainPair
from .errors import ConfigurationError


@dataclass(frozen=True)
class KernelParams:
    """Causal exponential kernel and sampling grid for train comparison."""

    tau_c: float = 10.0
    window: int = 120
    dt: float = 1.0

    def __post_init__(self):
        if self.tau_c <= 0:
            raise ConfigurationError(f"tau_c must be > 0, got {self.tau_c}")
        if self.window <= 0:
            raise ConfigurationError(f"window must be > 0, got {self.window}")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(0.0, self.window, self.dt)


@dataclass(frozen=True)
class EpochErrors:
    """Error measures of one epoch's four test cases."""

    ste: float
    le: int

    def __post_init__(self):
        if self.ste < 0:
            raise ValueError(f"ste must be >= 0, got {self.ste}")
        if self.le not in (0, 1, 2, 3, 4):
            raise ValueError(f"le must be in 0..4, got {self.le}")


def convolve_train(train: np.ndarray, k: KernelParams) -> np.ndarray:
    """Convolve a spike train with exp(-t/tau_c) on the sampling grid.

    g(t) = sum over spikes t' <= t of exp(-(t - t') / tau_c), sampled at
    every grid point of [0, window).
    """
    times = np.asarray(train, dtype=np.float64)
    grid = k.grid
    if times.size == 0:
        return np.zeros(grid.size)
    if times.min() < 0 or times.max() >= k.window:
        raise ValueError(
            f"spike times must lie in [0, {k.window}), got range "
            f"[{times.min()}, {times.max()}]"
        )
    diffs = grid[:, None] - times[None, :]
    return np.where(diffs >= 0.0, np.exp(-diffs / k.tau_c), 0.0).sum(axis=1)


def van_rossum_distance(s: np.ndarray, t: np.ndarray, k: KernelParams) -> float:
    """Squared distance between the kernel convolutions of two trains."""
    gs = convolve_train(s, k)
    gt = convolve_train(t, k)
    return float(((gs - gt) ** 2).sum())


def spike_train_error(results, targets, k: KernelParams) -> float:
    """Sum of van Rossum distances over the four test cases."""
    if len(results) != 4 or len(targets) != 4:
        raise ValueError(
            f"expected 4 result and 4 target trains, got {len(results)} "
            f"and {len(targets)}"
        )
    return sum(van_rossum_distance(a, d, k) for a, d in zip(results, targets))


def logical_error(results, encoding_output: TrainPair, op: LogicalOp,
                  k: KernelParams) -> int:
    """Count test cases whose output is not strictly closest to its target.

    A case is correct iff the response is strictly closer to the train of
    the operation's truth value than to the other train; ties count as
    incorrect.
    """
    if len(results) != 4:
        raise ValueError(f"expected 4 result trains, got {len(results)}")
    s_true, s_false = encoding_output
    wrong = 0
    for actual, (b0, b1) in zip(results, CASE_ORDER):
        if op.apply(b0, b1):
            target, nontarget = s_true, s_false
        else:
            target, nontarget = s_false, s_true
        d_target = van_rossum_distance(actual, target, k)
        d_other = van_rossum_distance(actual, nontarget, k)
        if not d_target < d_other:
            wrong += 1
    return wrong
