"""Robustness workbench for stochastic parallel-machine schedules.

Builds schedules with fixed machine sequences, scores them with surrogate
robustness measures over the combined precedence/machine order, validates
the surrogates against Monte-Carlo simulation, and ships the whole study
as a reproducible command line pipeline.
"""

from ._accel import USE_NUMBA, mode
from .core import (CombinedOrder, CycleError, Instance, Job, Schedule,
                   SlackProfile, Violation, build_combined_order,
                   latest_start_times, resolve_job_deadlines, slack_profile,
                   validate)
from .distributions import (DistributionSpec, GaussianMoment, gaussian_cdf_at,
                            gaussian_max, lambda_factor, mad_factor, quantile,
                            sample)
from .generate import (BufferPlan, GenerationError, InstanceGenConfig,
                       diversify_buffers, gen_deadline, gen_earliest_start,
                       gen_instance)
from .lp import (InfeasibleScheduleError, IntervalSolution, apply_buffers,
                 solve_rm13, solve_rm14, weighted_slack_insertion)
from .measures import (MEASURE_IDS, ORIENTATION, EsdProfile, MeasureConfig,
                       MeasureVector, evaluate_all, evaluate_population,
                       time_measures)
from .simulate import Realization, SimulationReport, run_once, simulate
from .stats import (CorrelationTable, CorrRow, CorrSummary, MwuResult,
                    correlation_study, mann_whitney_u, spearman,
                    spearman_flagged)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "mode",
    "CombinedOrder", "CycleError", "Instance", "Job", "Schedule",
    "SlackProfile", "Violation", "build_combined_order", "latest_start_times",
    "resolve_job_deadlines", "slack_profile", "validate",
    "DistributionSpec", "GaussianMoment", "gaussian_cdf_at", "gaussian_max",
    "lambda_factor", "mad_factor", "quantile", "sample",
    "BufferPlan", "GenerationError", "InstanceGenConfig", "diversify_buffers",
    "gen_deadline", "gen_earliest_start", "gen_instance",
    "InfeasibleScheduleError", "IntervalSolution", "apply_buffers",
    "solve_rm13", "solve_rm14", "weighted_slack_insertion",
    "MEASURE_IDS", "ORIENTATION", "EsdProfile", "MeasureConfig",
    "MeasureVector", "evaluate_all", "evaluate_population", "time_measures",
    "Realization", "SimulationReport", "run_once", "simulate",
    "CorrelationTable", "CorrRow", "CorrSummary", "MwuResult",
    "correlation_study", "mann_whitney_u", "spearman", "spearman_flagged",
    "__version__",
]
