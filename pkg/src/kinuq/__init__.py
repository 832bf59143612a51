"""Multiscale control variate Monte Carlo estimators for kinetic equations."""

from .random_inputs import SampleSet, SeededStream, draw_uniform, gauss_legendre
from .phase_space import (
    DistributionField,
    MomentVector,
    SpatialGrid,
    VelocityGrid,
    l2_error,
    maxwellian,
    moments,
    read_field_binary,
    weighted_norm,
    write_field_binary,
    write_moment_csv,
)
from .stats import (
    CovarianceSystem,
    SampleEnsemble,
    build_cov_system,
    mc_mean,
    sample_covariance,
    sample_variance,
    solve_cov_system,
    solve_tridiagonal,
)
from .estimators import (
    ChainStats,
    ControlVariateSpec,
    EstimatorOutput,
    GramSchmidtTransform,
    LevelEnsembles,
    PipelineConfig,
    WeightField,
    chain_stats,
    cv_estimate_multi,
    cv_estimate_orthogonal,
    cv_estimate_single,
    gram_schmidt_cv,
    me_correction,
    moment_lambda,
    optimal_lambda_multi,
    optimal_lambda_single,
    recursive_estimate,
    recursive_weights_from_stats,
    recursive_weights_optimal,
    recursive_weights_quasi,
    recursive_weights_unit,
    run_pipeline,
    two_cv_closed_form,
)

from .experiments import (
    CostModel,
    ErrorRecord,
    ExperimentConfig,
    ReferenceSolution,
    boundary_spec,
    cost_model,
    equilibrium_mean,
    estimator_tallies,
    euler_datum,
    initial_datum,
    read_csv,
    reference_solution,
    resolve_config,
    run_experiment,
    run_test1,
    run_test2,
    run_test3,
    two_level_estimate,
    write_csv,
)

__version__ = "0.1.0"
