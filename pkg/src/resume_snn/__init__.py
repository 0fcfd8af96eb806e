"""Supervised training of layered spiking networks on logical operations."""

__version__ = "0.1.0"

from .codec import (
    CASE_ORDER,
    LogicalEncoding,
    LogicalOp,
    PatternSet,
    TrainGenParams,
    build_pattern_set,
    generate_base_train,
    generate_encoding,
    generate_output_pair,
    split_train_pair,
)
from .errors import ConfigurationError, GenerationError
from .experiment import (
    EpochRecord,
    ExperimentConfig,
    RunRecord,
    WindowSummary,
    config_digest,
    derive_run_rng,
    format_measurement,
    run_batch,
    run_epoch,
    run_training,
    summarize,
)
from .learning import (
    ResumeParams,
    ScalingParams,
    WeightDeltaAccumulator,
    accumulate_presentation,
    apply_deltas,
    pair_delta_actual,
    pair_delta_desired,
    scale_rates,
    train_delta,
)
from .metrics import (
    EpochErrors,
    KernelParams,
    convolve_train,
    logical_error,
    spike_train_error,
    van_rossum_distance,
)
from .network import (
    N_DELAYS,
    WEIGHT_LIMIT,
    LayeredNetwork,
    LifParams,
    NeuronState,
    PresentationResult,
    Synapse,
    build_network,
    init_weights,
    lif_step,
    reset_network,
    simulate_presentation,
)
