"""Ramsey frequency estimation with uncorrelated and GHZ probes."""

from .bayes import (
    MeasurementRecord,
    PosteriorGrid,
    PrecisionReport,
    PriorWindow,
    accumulate,
    flat_posterior,
    report,
)
from .errors import ConvergenceError, DomainError, InconsistentDataError
from .fisher import (
    CrbQuery,
    OperatingPoint,
    crb_uncertainty,
    fisher_information,
    minimum_uncertainty,
    optimal_operating_point,
)
from .probes import Correlation, ProbeConfig, lindblad_ramsey_oracle, p_excited, p_ground
from .sampling import TrialSeed, expected_record, sample_record
from .schemes import (
    SchemePlan,
    combination_plan,
    evaluate_plan,
    feedback_phase,
    feedback_phase_for_estimate,
    geometric_ladder,
    optimize_combination,
    plan_posterior,
    uncorrelated_plan,
)

__version__ = "0.1.0"
