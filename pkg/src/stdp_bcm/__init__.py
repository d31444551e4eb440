"""Pair and triplet STDP under Poisson stimulation, and the BCM curves they produce."""
from .analytic import (
    AnalyticCurve,
    BcmThresholdModel,
    DegenerateParametersError,
    Normalization,
    UnexpectedOrientationError,
    bcm_sign_check,
    minimal_triplet_threshold,
    numeric_threshold,
    pair_bcm_curve,
    pair_nearest_drift,
    pair_threshold,
    triplet_drift,
    triplet_drift_alltoall,
    triplet_threshold_alltoall,
)
from .circuit import (
    PairCircuitParams,
    TripletCircuitParams,
    circuit_learning_window,
    pair_circuit_run,
    triplet_circuit_run,
)
from .experiments import (
    MINIMAL_TRIPLET,
    BcmCurvePoint,
    ExperimentConfig,
    ThresholdEstimate,
    bcm_sweep,
    compare_mc_analytic,
    extract_threshold,
    oracle_for,
    pairing_frequency_sweep,
    threshold_modulation,
)
from .rules import (
    InteractionMode,
    PairParams,
    SynapseState,
    TripletParams,
    WeightTrajectory,
    pair_window,
    run_pair,
    run_stepwise,
    run_triplet,
    triplet_on_post,
    triplet_on_pre,
)
from .spikes import Seed, SpikeTrain, gen_pairing_protocol, gen_poisson, validate_train

__version__ = "0.1.0"
