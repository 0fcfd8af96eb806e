"""Supervised weight updates (ReSuMe) and homeostatic rate scaling.

The learning rule pairs every delay-shifted input spike with every desired
and actual output spike. A desired-train pair contributes an exponential
STDP window; an actual-train pair contributes its exact negation, so the
update vanishes once the output reproduces the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .network import WEIGHT_LIMIT, LayeredNetwork, trains_to_matrix


@dataclass(frozen=True)
class ResumeParams:
    """STDP window constants; a_id defaults to a_di when not given."""

    a_d: float = 0.0
    a_di: float = 0.0005
    a_id: float | None = None
    tau_learn: float = 4.0

    def __post_init__(self):
        if self.a_id is None:
            object.__setattr__(self, "a_id", self.a_di)
        if self.a_di < 0 or self.a_id < 0 or self.tau_learn < 0:
            raise ConfigurationError(
                "a_di, a_id and tau_learn must be >= 0, got "
                f"{self.a_di}, {self.a_id}, {self.tau_learn}"
            )


@dataclass(frozen=True)
class ScalingParams:
    """Target rate band and step for multiplicative weight scaling.

    Rates are spikes per ms of input-train time; rate_window is the per-
    presentation duration the spike counts are divided by. The default band
    keeps hidden rates near 0.1/ms, which freezes the hidden code once
    reached; the narrower (0.03, 0.1) reading is selectable but leaves
    rates hugging the lower bound, so sporadic rescaling keeps perturbing
    otherwise converged solutions.
    """

    r_min: float = 0.1
    r_max: float = 0.3
    f_up: float = 0.05
    f_down: float = -0.05
    rate_window: float = 100.0

    def __post_init__(self):
        if not 0 <= self.r_min < self.r_max:
            raise ConfigurationError(
                f"need 0 <= r_min < r_max, got {self.r_min}, {self.r_max}"
            )
        if not self.f_up > 0 > self.f_down:
            raise ConfigurationError(
                f"need f_up > 0 > f_down, got {self.f_up}, {self.f_down}"
            )
        if 1 + self.f_down <= 0:
            raise ConfigurationError(f"f_down must exceed -1, got {self.f_down}")
        if self.rate_window <= 0:
            raise ConfigurationError(f"rate_window must be > 0, got {self.rate_window}")


def pair_delta_desired(t_in: float, t_desired: float, p: ResumeParams) -> float:
    """Weight change of one (input, desired) spike pair."""
    d = t_desired - t_in
    if d >= 0:
        return p.a_d + p.a_di * math.exp(-d / p.tau_learn)
    return p.a_d - p.a_id * math.exp(d / p.tau_learn)


def pair_delta_actual(t_in: float, t_actual: float, p: ResumeParams) -> float:
    """Weight change of one (input, actual) spike pair; negates the desired window."""
    d = t_actual - t_in
    if d >= 0:
        return -p.a_d - p.a_di * math.exp(-d / p.tau_learn)
    return -p.a_d + p.a_id * math.exp(d / p.tau_learn)


def _window_sum(diffs: np.ndarray, p: ResumeParams) -> float:
    if diffs.size == 0:
        return 0.0
    return float(
        np.where(
            diffs >= 0,
            p.a_d + p.a_di * np.exp(-diffs / p.tau_learn),
            p.a_d - p.a_id * np.exp(diffs / p.tau_learn),
        ).sum()
    )


def train_delta(s_in: np.ndarray, delay: int, s_desired: np.ndarray,
                s_actual: np.ndarray, p: ResumeParams) -> float:
    """Total weight change of one synapse from one presentation.

    Input spikes are shifted by the synapse delay before pairing; shifted
    arrivals are paired even when they fall outside the presentation window.
    """
    arrivals = np.asarray(s_in, dtype=np.float64) + delay
    desired = np.asarray(s_desired, dtype=np.float64)
    actual = np.asarray(s_actual, dtype=np.float64)
    gain = _window_sum(desired[None, :] - arrivals[:, None], p)
    drain = _window_sum(actual[None, :] - arrivals[:, None], p)
    return gain - drain


def pair_delta_table(p: ResumeParams, horizon: int) -> tuple[np.ndarray, int]:
    """Lookup of pair_delta_desired over integer differences in [-horizon, horizon].

    table[d + horizon] equals pair_delta_desired(0, d, p); actual-train
    contributions are the negated entries.
    """
    d = np.arange(-horizon, horizon + 1, dtype=np.float64)
    table = np.where(
        d >= 0,
        p.a_d + p.a_di * np.exp(-d / p.tau_learn),
        p.a_d - p.a_id * np.exp(d / p.tau_learn),
    )
    return table, horizon


class WeightDeltaAccumulator:
    """Per-synapse weight changes collected across an epoch's presentations.

    Covers the synapses into the single output neuron: delta[p, s] belongs
    to presynaptic neuron p at delay s+1.
    """

    def __init__(self, n_pre: int, n_delays: int):
        self.delta = np.zeros((n_pre, n_delays))

    def clear(self) -> None:
        self.delta.fill(0.0)


def accumulate_presentation(acc: WeightDeltaAccumulator, network: LayeredNetwork,
                            pre_trains, target: np.ndarray, actual: np.ndarray,
                            p: ResumeParams) -> None:
    """Add one presentation's deltas for all synapses into the output neuron.

    pre_trains holds one spike train per neuron of the layer feeding the
    output (input neurons of a two-layer network, hidden neurons otherwise).
    """
    n_pre, _, n_delays = network.weights[-1].shape
    if len(pre_trains) != n_pre:
        raise ConfigurationError(
            f"got {len(pre_trains)} presynaptic trains for {n_pre} neurons"
        )
    t_max = 0
    for train in (*pre_trains, target, actual):
        t_max = max(t_max, int(train[-1]) if len(train) else 0)
    pre_matrix = trains_to_matrix(pre_trains, t_max + 1)
    table, offset = pair_delta_table(p, t_max + n_delays + 1)
    _kernels.accumulate_pair_deltas(
        pre_matrix, np.asarray(target, dtype=np.int64),
        np.asarray(actual, dtype=np.int64), n_delays, table, offset, acc.delta,
    )


def apply_deltas(acc: WeightDeltaAccumulator, network: LayeredNetwork) -> None:
    """Apply and clear the accumulated deltas, clipping the touched weights."""
    w = network.weights[-1]
    w[:, 0, :] += acc.delta
    np.clip(w, -WEIGHT_LIMIT, WEIGHT_LIMIT, out=w)
    acc.clear()


def scale_rates(network: LayeredNetwork, epoch_rates, sp: ScalingParams) -> int:
    """Multiplicatively rescale incoming weights of out-of-band hidden neurons.

    Positive weights are multiplied by (1 + f) and negative ones divided by
    it, with f = f_up below r_min and f = f_down above r_max; the sign of a
    weight never changes. Returns the number of neurons adjusted.
    """
    if not network.has_hidden:
        return 0
    rates = np.asarray(epoch_rates, dtype=np.float64)
    if rates.shape != (network.n_hidden,):
        raise ConfigurationError(
            f"expected {network.n_hidden} hidden rates, got shape {rates.shape}"
        )
    w = network.weights[0]
    events = 0
    for y, rate in enumerate(rates):
        if sp.r_min <= rate <= sp.r_max:
            continue
        f = sp.f_up if rate < sp.r_min else sp.f_down
        col = w[:, y, :]
        col[col > 0] *= 1.0 + f
        col[col < 0] /= 1.0 + f
        np.clip(col, -WEIGHT_LIMIT, WEIGHT_LIMIT, out=col)
        events += 1
    return events
