"""Discrete-time simulation of layered feedforward LIF networks.

Neurons are leaky integrate-and-fire units updated with a forward Euler
step at dt resolution; leak and input are applied in one update, then the
threshold is tested and the potential reset. Layers are fully connected
through pulse-coupled synapses with one weight per delay of 1..N_DELAYS ms.
Input neurons are stateless emitters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ConfigurationError

# Delays of the synapse bundle between any connected neuron pair, in steps.
N_DELAYS = 10
# Hard clip applied to every weight after any mutation.
WEIGHT_LIMIT = 2.0
# Default initialisation range, skewed towards excitatory values and small
# enough that fresh networks stay silent.
INIT_WEIGHT_LOW = -0.02
INIT_WEIGHT_HIGH = 0.08


@dataclass(frozen=True)
class LifParams:
    """Leaky integrate-and-fire constants (mV, MOhm, nF, ms)."""

    v_rest: float = -60.0
    v_threshold: float = -55.0
    v_reset: float = -65.0
    membrane_resistance: float = 10.0
    membrane_capacitance: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if not self.v_reset < self.v_rest < self.v_threshold:
            raise ConfigurationError(
                "expected v_reset < v_rest < v_threshold, got "
                f"{self.v_reset}, {self.v_rest}, {self.v_threshold}"
            )
        if self.membrane_resistance <= 0 or self.membrane_capacitance <= 0:
            raise ConfigurationError("membrane R and C must be > 0")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")

    @property
    def tau_membrane(self) -> float:
        return self.membrane_resistance * self.membrane_capacitance


@dataclass
class NeuronState:
    """Membrane potential plus the input current summed for the next step."""

    v: float
    input_current: float = 0.0


def lif_step(state: NeuronState, params: LifParams) -> tuple[NeuronState, bool]:
    """Advance one neuron by one Euler step; returns (new state, fired)."""
    v = state.v + params.dt * (
        -(state.v - params.v_rest) / params.tau_membrane
        + state.input_current / params.membrane_capacitance
    )
    fired = v >= params.v_threshold
    if fired:
        v = params.v_reset
    return NeuronState(v=v, input_current=0.0), fired


@dataclass(frozen=True)
class Synapse:
    """View of one delayed connection (delay in 1..N_DELAYS)."""

    boundary: int
    pre: int
    post: int
    delay: int
    weight: float


class LayeredNetwork:
    """Fully connected feedforward network with per-delay weight bundles.

    weights[b] has shape (n_pre, n_post, N_DELAYS) for layer boundary b;
    v[b] and pending[b] hold the mutable state of the boundary's
    postsynaptic layer. The output layer always has exactly one neuron.
    """

    def __init__(self, layer_sizes, lif: LifParams | None = None):
        sizes = tuple(int(n) for n in layer_sizes)
        if len(sizes) < 2:
            raise ConfigurationError("a network needs at least input and output layers")
        if any(n < 1 for n in sizes):
            raise ConfigurationError(f"layer sizes must be >= 1, got {sizes}")
        if sizes[-1] != 1:
            raise ConfigurationError(f"output layer must have exactly 1 neuron, got {sizes[-1]}")
        self.layer_sizes = sizes
        self.lif = lif if lif is not None else LifParams()
        self.weights = [
            np.zeros((sizes[b], sizes[b + 1], N_DELAYS))
            for b in range(len(sizes) - 1)
        ]
        self.v = [np.full(sizes[b + 1], self.lif.v_rest) for b in range(len(sizes) - 1)]
        self.pending = [np.zeros((N_DELAYS, sizes[b + 1])) for b in range(len(sizes) - 1)]

    @property
    def n_input(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_hidden(self) -> int:
        return self.layer_sizes[1] if len(self.layer_sizes) == 3 else 0

    @property
    def has_hidden(self) -> bool:
        return len(self.layer_sizes) == 3

    def synapses(self) -> Iterator[Synapse]:
        for b, w in enumerate(self.weights):
            n_pre, n_post, n_delay = w.shape
            for p in range(n_pre):
                for q in range(n_post):
                    for s in range(n_delay):
                        yield Synapse(b, p, q, s + 1, float(w[p, q, s]))


def build_network(bank_size: int, hidden_size: int | None,
                  lif: LifParams | None = None) -> LayeredNetwork:
    """Network with two equal input banks, an optional hidden layer, one output."""
    if bank_size < 1:
        raise ConfigurationError(f"bank_size must be >= 1, got {bank_size}")
    if hidden_size is not None and hidden_size < 1:
        raise ConfigurationError(f"hidden_size must be >= 1, got {hidden_size}")
    sizes = [2 * bank_size] + ([hidden_size] if hidden_size else []) + [1]
    return LayeredNetwork(sizes, lif)


def init_weights(network: LayeredNetwork, rng: np.random.Generator,
                 low: float = INIT_WEIGHT_LOW,
                 high: float = INIT_WEIGHT_HIGH) -> None:
    """Draw every weight i.i.d. uniform from [low, high]."""
    if low >= high:
        raise ConfigurationError(f"need low < high, got [{low}, {high}]")
    for w in network.weights:
        w[...] = rng.uniform(low, high, size=w.shape)


def reset_network(network: LayeredNetwork) -> None:
    """Return all membranes to rest and drop pending deliveries."""
    for v in network.v:
        v.fill(network.lif.v_rest)
    for pending in network.pending:
        pending.fill(0.0)


@dataclass
class PresentationResult:
    """Spike trains of all non-input neurons for one presentation window."""

    trains: list[list[np.ndarray]]
    matrices: list[np.ndarray] = field(repr=False)
    duration: int = 0

    @property
    def output_train(self) -> np.ndarray:
        return self.trains[-1][0]


def trains_to_matrix(trains, duration: int) -> np.ndarray:
    """Binary (duration, n) raster from per-neuron spike-time arrays."""
    mat = np.zeros((duration, len(trains)), np.uint8)
    for i, train in enumerate(trains):
        t = np.asarray(train, dtype=np.int64)
        t = t[(t >= 0) & (t < duration)]
        mat[t, i] = 1
    return mat


def forward_matrices(network: LayeredNetwork, input_matrix: np.ndarray) -> list[np.ndarray]:
    """Propagate a spike raster through all boundaries, layer by layer.

    Valid for feedforward topologies: each layer's response depends only on
    the previous layer's completed raster. Updates the network's membrane
    state and consumes pending currents.
    """
    lif = network.lif
    prev = input_matrix
    out = []
    for b, w in enumerate(network.weights):
        spikes, v_final = _kernels.layer_forward(
            prev, w, network.v[b], network.pending[b],
            lif.v_rest, lif.v_reset, lif.v_threshold,
            lif.dt, lif.tau_membrane, lif.membrane_capacitance,
        )
        network.v[b] = v_final
        network.pending[b].fill(0.0)
        out.append(spikes)
        prev = spikes
    return out


def simulate_presentation(network: LayeredNetwork, input_trains,
                          duration: int) -> PresentationResult:
    """Clocked simulation of one presentation of the given input trains.

    Input neurons emit exactly their trains; every spike is delivered to
    each outgoing synapse's target after the synapse delay, and deliveries
    landing at or beyond `duration` are dropped.
    """
    if len(input_trains) != network.n_input:
        raise ConfigurationError(
            f"got {len(input_trains)} input trains for {network.n_input} input neurons"
        )
    matrices = forward_matrices(network, trains_to_matrix(input_trains, duration))
    trains = [
        [np.flatnonzero(m[:, i]).astype(np.int64) for i in range(m.shape[1])]
        for m in matrices
    ]
    return PresentationResult(trains=trains, matrices=matrices, duration=duration)
