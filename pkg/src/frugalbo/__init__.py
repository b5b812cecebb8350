"""Cost-aware Bayesian optimization for iterative prototyping.

Selects the next prototype by expected improvement per unit cost, where cost
is classified per component group (tweak / swap / create) against a record of
everything already built, and smoothly relaxed for gradient-based acquisition
search.
"""

from .acquisition import AcquisitionSpec, cost_aware_value, expected_improvement, maximize, realize
from .benchmarks import GroundTruth, NoiseModel, benchmark_space, ground_truth, noisy_observe
from .costs import (
    CostBreakdown,
    CostLevels,
    CostSchedule,
    GroupLevels,
    RelaxationParams,
    classify_group,
    discrete_cost,
    effective_levels,
    rbf_similarity,
    smooth_cost,
    smooth_cost_gradient,
    update_record,
)
from .gp import Dataset, GPModel, fit, predict, predict_gradient
from .loop import OptimizationTrace, RunConfig, initialize, regret, run, step
from .space import (
    ComponentGroup,
    Configuration,
    DesignSpace,
    Parameter,
    PrototypeRecord,
    denormalize,
    normalize,
    project,
)
from .studies import StudySpec, run_study, summarize

__version__ = "0.1.0"

__all__ = [
    "AcquisitionSpec",
    "ComponentGroup",
    "Configuration",
    "CostBreakdown",
    "CostLevels",
    "CostSchedule",
    "Dataset",
    "DesignSpace",
    "GPModel",
    "GroundTruth",
    "GroupLevels",
    "NoiseModel",
    "OptimizationTrace",
    "Parameter",
    "PrototypeRecord",
    "RelaxationParams",
    "RunConfig",
    "StudySpec",
    "benchmark_space",
    "classify_group",
    "cost_aware_value",
    "denormalize",
    "discrete_cost",
    "effective_levels",
    "expected_improvement",
    "fit",
    "ground_truth",
    "initialize",
    "maximize",
    "normalize",
    "noisy_observe",
    "predict",
    "predict_gradient",
    "project",
    "rbf_similarity",
    "realize",
    "regret",
    "run",
    "run_study",
    "smooth_cost",
    "smooth_cost_gradient",
    "step",
    "summarize",
    "update_record",
]
