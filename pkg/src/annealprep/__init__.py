"""Coefficient reduction, minor-embedding and precision-noise tooling for
Ising/QUBO annealing workflows."""

from .embedding import (
    EmbeddedModel,
    Embedding,
    EmbeddingError,
    HardwareGraph,
    PegasusCliqueEstimate,
    assign_coefficients,
    chain_consistent_lift,
    chain_expand,
    pegasus_clique_estimate,
    physical_scaling,
    unembed,
    validate,
)
from .harness import (
    AlmStep,
    MetricOptions,
    MetricsRow,
    NoPlateauError,
    SweepConfig,
    SweepOutcome,
    alm_experiment,
    chain_strength_sweep,
    compute_metrics,
    make_sampler,
    penalty_grid_experiment,
    run_sweep,
    scaling_survey,
    select_chain_strength,
)
from .model import (
    AcceptRanges,
    IsingModel,
    ParseError,
    QuboModel,
    ScalingReport,
    SpinAssignment,
    ground_states,
    ising_to_qubo,
    qubo_to_ising,
    rescale,
    scaling_factors,
)
from .reduction import (
    AlmState,
    IntegerEncoding,
    LinearConstraint,
    ReductionResult,
    alm_update,
    bce_decode,
    bce_encode,
    iem_reduce,
    perturbed_penalty,
    project_samples,
    projected_ground_states,
    reduction_from_json_dict,
    reduction_to_json_dict,
)
from .sampling import (
    NoiseModel,
    SampleRecord,
    SampleSet,
    SaParams,
    exact_inner,
    exact_sample,
    noisy_sample,
    sa_inner,
    sa_sample,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptRanges",
    "AlmState",
    "AlmStep",
    "EmbeddedModel",
    "Embedding",
    "EmbeddingError",
    "HardwareGraph",
    "IntegerEncoding",
    "IsingModel",
    "LinearConstraint",
    "MetricOptions",
    "MetricsRow",
    "NoPlateauError",
    "NoiseModel",
    "ParseError",
    "PegasusCliqueEstimate",
    "QuboModel",
    "ReductionResult",
    "SaParams",
    "SampleRecord",
    "SampleSet",
    "ScalingReport",
    "SpinAssignment",
    "SweepConfig",
    "SweepOutcome",
    "alm_experiment",
    "alm_update",
    "assign_coefficients",
    "bce_decode",
    "bce_encode",
    "chain_consistent_lift",
    "chain_expand",
    "chain_strength_sweep",
    "compute_metrics",
    "exact_inner",
    "exact_sample",
    "ground_states",
    "iem_reduce",
    "ising_to_qubo",
    "make_sampler",
    "noisy_sample",
    "pegasus_clique_estimate",
    "penalty_grid_experiment",
    "perturbed_penalty",
    "physical_scaling",
    "project_samples",
    "projected_ground_states",
    "qubo_to_ising",
    "reduction_from_json_dict",
    "reduction_to_json_dict",
    "rescale",
    "run_sweep",
    "sa_inner",
    "sa_sample",
    "scaling_factors",
    "scaling_survey",
    "select_chain_strength",
    "unembed",
    "validate",
]
