"""Drift-based stability classification for two-queue quasi-birth-and-death
processes, with critical-rate tables, matrix-analytic solvers, and Monte-Carlo
cross checks."""

from __future__ import annotations

__version__ = "0.1.0"

from .ctmc import AssumptionViolation, closed_classes, stationary, uniformize
from .efficiency import (
    EfficiencyResult,
    ModelFamily,
    TableRow,
    additional_server_family,
    drift_of_lambda,
    find_lambda_star,
    independent_pair_family,
    priority_setup_family,
    table_sweep,
)
from .model import (
    Archetype,
    BlockKey,
    ModelError,
    PhaseLayout,
    QbdModel,
    ValidationReport,
    active_blocks,
    assemble_truncated_generator,
    build_additional_server,
    build_independent_pair,
    build_priority_setup,
    build_priority_setup_mapph,
    kron_product,
    kron_sum,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate,
)
from .qbd import (
    NullRecurrenceError,
    QbdSolution,
    QbdSpec,
    level_distribution,
    minimal_rate_matrix,
    quadratic_residual,
    solve_qbd,
    truncated_generator,
)
from .simulate import (
    VARIANTS,
    EmpiricalDrift,
    SimState,
    empirical_drift,
    occupancy_probe,
    step,
)
from .stability import (
    AxisChainStructure,
    Classification,
    DriftVector,
    Verdict,
    classify,
    classify_axis_chain,
    drift_axis,
    drift_plus,
    induced_axis,
    induced_plus,
)

__all__ = [
    "__version__",
    "Archetype",
    "AssumptionViolation",
    "AxisChainStructure",
    "BlockKey",
    "Classification",
    "DriftVector",
    "EfficiencyResult",
    "EmpiricalDrift",
    "ModelError",
    "ModelFamily",
    "NullRecurrenceError",
    "PhaseLayout",
    "QbdModel",
    "QbdSolution",
    "QbdSpec",
    "SimState",
    "TableRow",
    "ValidationReport",
    "VARIANTS",
    "Verdict",
    "active_blocks",
    "additional_server_family",
    "assemble_truncated_generator",
    "build_additional_server",
    "build_independent_pair",
    "build_priority_setup",
    "build_priority_setup_mapph",
    "classify",
    "classify_axis_chain",
    "closed_classes",
    "drift_axis",
    "drift_of_lambda",
    "drift_plus",
    "empirical_drift",
    "find_lambda_star",
    "independent_pair_family",
    "induced_axis",
    "induced_plus",
    "kron_product",
    "kron_sum",
    "level_distribution",
    "load_model",
    "minimal_rate_matrix",
    "model_from_dict",
    "model_to_dict",
    "occupancy_probe",
    "priority_setup_family",
    "quadratic_residual",
    "save_model",
    "solve_qbd",
    "stationary",
    "step",
    "table_sweep",
    "truncated_generator",
    "uniformize",
    "validate",
]
