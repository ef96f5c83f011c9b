"""Orienteering under stochastic arc weights: robust models and recourse."""

from .instance import (Instance, InstanceFormatError, WeightModel,
                       apply_deviation, euclidean_weights, instance_digest,
                       load_instance, parse_tsiligirides, save_instance)
from .uncertainty import (BoxUncertainty, Scenario, contains,
                          optimistic_weights, sample_scenario,
                          scenario_from_csv, scenario_to_csv,
                          worst_case_weights)
from .recourse import (RecourseOutcome, brute_force_cut, concurrent_recourse,
                       sequential_recourse, step_executor)
from .milp import (Constraint, MilpModel, ModelKind, Variable, build_dop,
                   build_one_stage_ro, build_recourse_concurrent,
                   build_recourse_sequential, build_static_concurrent,
                   build_static_sequential, relax_integrality)
from .lp_io import LpFormatError, export_lp, parse_lp
from .solver import (CapacityError, FeasibilityError, InfeasibleModelError,
                     RobustSolution, branch_and_bound, enumerate_milp,
                     evaluate_objective)
from .experiments import (SimulationSummary, SolverConfig, TableRow,
                          VerificationReport, emit_csv, emit_csv_long,
                          parse_csv, run_table, simulate, verify_equivalences)

__version__ = "0.1.0"

__all__ = [
    "Instance", "InstanceFormatError", "WeightModel", "apply_deviation",
    "euclidean_weights", "instance_digest", "load_instance",
    "parse_tsiligirides", "save_instance",
    "BoxUncertainty", "Scenario", "contains", "optimistic_weights",
    "sample_scenario", "scenario_from_csv", "scenario_to_csv",
    "worst_case_weights",
    "RecourseOutcome", "brute_force_cut", "concurrent_recourse",
    "sequential_recourse", "step_executor",
    "Constraint", "MilpModel", "ModelKind", "Variable", "build_dop",
    "build_one_stage_ro", "build_recourse_concurrent",
    "build_recourse_sequential", "build_static_concurrent",
    "build_static_sequential", "relax_integrality",
    "LpFormatError", "export_lp", "parse_lp",
    "CapacityError", "FeasibilityError", "InfeasibleModelError",
    "RobustSolution", "branch_and_bound", "enumerate_milp",
    "evaluate_objective",
    "SimulationSummary", "SolverConfig", "TableRow", "VerificationReport",
    "emit_csv", "emit_csv_long", "parse_csv", "run_table", "simulate",
    "verify_equivalences",
]
