"""Graph-structured allelic evolution: stationary theory and simulation.

A population walks on a finite graph of allelic types.  Monomorphic
states sit on the vertices; mutation pushes a copy of a neighboring
type to frequency x, where it runs a Wright-Fisher diffusion with
directional selection along the edge until absorption.  This package
computes the exact and large-population stationary measures of that
hybrid process, multilocus summary statistics with their upper bounds,
the distributions of fitness effects they induce, and Monte Carlo
estimates of all of the above for validation.
"""

from .graph import (
    AlleleGraph,
    AssumptionError,
    SelectionSpec,
    ValidationReport,
    gamma_from_fitness,
    require_valid,
    unordered_pairs,
    validate_graph,
)
from .kernels import (
    fixation_prob,
    fixation_prob_complement,
    fixation_weight,
    green_function,
    log_fixation_prob,
    log_fixation_weight,
    neutral_occupation,
    occupation_correction,
    occupation_integral,
    scale_fn,
)
from .stationary import (
    BoundaryMeasure,
    StationaryMeasure,
    afs,
    approx_stationary,
    boundary_measure,
    exact_stationary,
    folded_density,
    pair_density,
)
from .multilocus import (
    LocusEnsemble,
    SelectionClass,
    bias_ratio,
    boundary_indicator,
    diversity_pi,
    eta_gamma_inversion,
    expectation,
    interior_indicator,
    neutral_ensemble,
    neutral_statistics,
    pairwise_difference,
    random_reversible_ensemble,
    sample_polymorphism,
    sandwich,
    segregating_sites,
    two_type_diversity,
    upper_bound,
)
from .dfe import (
    ContinuousDfe,
    DfeDistribution,
    continuous_dfe,
    h_dfe,
    h_pdfe,
    mean_load,
    prf_afs,
    skew_report,
)
from .simulate import (
    EmpiricalMeasure,
    FixationEstimate,
    SimConfig,
    embedded_chain_sim,
    fixation_monte_carlo,
    fixation_refinement,
    simulate_paths,
)
from .config import ConfigError, ModelConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "AlleleGraph",
    "AssumptionError",
    "SelectionSpec",
    "ValidationReport",
    "gamma_from_fitness",
    "require_valid",
    "unordered_pairs",
    "validate_graph",
    "fixation_prob",
    "fixation_prob_complement",
    "fixation_weight",
    "green_function",
    "log_fixation_prob",
    "log_fixation_weight",
    "neutral_occupation",
    "occupation_correction",
    "occupation_integral",
    "scale_fn",
    "BoundaryMeasure",
    "StationaryMeasure",
    "afs",
    "approx_stationary",
    "boundary_measure",
    "exact_stationary",
    "folded_density",
    "pair_density",
    "LocusEnsemble",
    "SelectionClass",
    "bias_ratio",
    "boundary_indicator",
    "diversity_pi",
    "eta_gamma_inversion",
    "expectation",
    "interior_indicator",
    "neutral_ensemble",
    "neutral_statistics",
    "pairwise_difference",
    "random_reversible_ensemble",
    "sample_polymorphism",
    "sandwich",
    "segregating_sites",
    "two_type_diversity",
    "upper_bound",
    "ContinuousDfe",
    "DfeDistribution",
    "continuous_dfe",
    "h_dfe",
    "h_pdfe",
    "mean_load",
    "prf_afs",
    "skew_report",
    "EmpiricalMeasure",
    "FixationEstimate",
    "SimConfig",
    "embedded_chain_sim",
    "fixation_monte_carlo",
    "fixation_refinement",
    "simulate_paths",
    "ConfigError",
    "ModelConfig",
    "load_config",
    "parse_config",
]
