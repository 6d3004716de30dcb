"""Feasibility seeking in R^d by modular averaging of projection-like operators.

The pieces, bottom up: :mod:`~strav.operators` builds operator trees with
certified contraction constants, :mod:`~strav.sets` supplies exact
projections and the lazily materialized input family, :mod:`~strav.gmsa`
validates per-iteration construction plans and prices their guarantees,
:mod:`~strav.control` decides which plan runs when and audits coverage,
:mod:`~strav.solver` drives the relaxed iteration with optional bounded
perturbations, :mod:`~strav.superiorize` steers it by an objective, and
:mod:`~strav.dsa` maps string-averaging descriptions onto plans.
"""

from .numeric import DEFAULT_TOL, Tolerance, as_vector, inner, lincomb, norm
from .operators import (
    CheckReport,
    Composition,
    ConvexComb,
    Identity,
    OperatorNode,
    Primitive,
    Relaxation,
    SampleBudget,
    check_fne,
    check_nonexpansive,
    check_sqne,
    structurally_equal,
)
from .sets import (
    AffineSubspace,
    Ball,
    Box,
    Halfspace,
    Hyperplane,
    OperatorFamily,
    ProjectableSet,
)
from .gmsa import (
    InputAssumptions,
    IterationPlan,
    PlanValidation,
    StepSpec,
    build_module,
    fne_bound,
    index_set,
    output_operator,
    rho_uniform,
    sqne_bound,
    validate_plan,
)
from .control import (
    AdmissibilityReport,
    ControlSchedule,
    CustomSchedule,
    CyclicSchedule,
    ExplicitSchedule,
    PowerOfTwoSchedule,
    f_value,
    fit_check,
    uniform_modulus,
    verify_admissible,
)
from .solver import (
    ConvergenceReport,
    FejerReport,
    PerturbationSchedule,
    RelaxationSchedule,
    StopRule,
    Trace,
    away_from,
    check_fejer,
    constant_direction,
    convergence_report,
    random_unit_directions,
    run,
    run_perturbed,
)
from .superiorize import (
    AlternativesReport,
    BetaGrid,
    ObjectiveOracle,
    alternatives_diagnostic,
    inner_directions,
    linear_objective,
    max_affine_objective,
    run_superiorized,
    squared_distance_objective,
)
from .dsa import (
    StringSpec,
    StringStage,
    direct_eval,
    gdsa_to_gmsa,
    msa_embed,
    rho_gdsa,
)
from .config import ConfigError, RunConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "Tolerance", "as_vector", "inner", "lincomb", "norm",
    "CheckReport", "Composition", "ConvexComb", "Identity", "OperatorNode",
    "Primitive", "Relaxation", "SampleBudget", "check_fne",
    "check_nonexpansive", "check_sqne", "structurally_equal",
    "AffineSubspace", "Ball", "Box", "Halfspace", "Hyperplane",
    "OperatorFamily", "ProjectableSet",
    "InputAssumptions", "IterationPlan", "PlanValidation", "StepSpec",
    "build_module", "fne_bound", "index_set", "output_operator",
    "rho_uniform", "sqne_bound", "validate_plan",
    "AdmissibilityReport", "ControlSchedule", "CustomSchedule",
    "CyclicSchedule", "ExplicitSchedule", "PowerOfTwoSchedule", "f_value",
    "fit_check", "uniform_modulus", "verify_admissible",
    "ConvergenceReport", "FejerReport", "PerturbationSchedule",
    "RelaxationSchedule", "StopRule", "Trace", "away_from", "check_fejer",
    "constant_direction", "convergence_report", "random_unit_directions",
    "run", "run_perturbed",
    "AlternativesReport", "BetaGrid", "ObjectiveOracle",
    "alternatives_diagnostic", "inner_directions", "linear_objective",
    "max_affine_objective", "run_superiorized", "squared_distance_objective",
    "StringSpec", "StringStage", "direct_eval", "gdsa_to_gmsa", "msa_embed",
    "rho_gdsa",
    "ConfigError", "RunConfig", "parse_config",
    "__version__",
]
