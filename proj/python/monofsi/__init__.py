"""Monolithic mortar fluid-structure interaction solver."""

from ._core import (
    AssemblyError,
    CaseConfig,
    CouplingError,
    FsiError,
    InvalidConfig,
    Master,
    ParseError,
    Predictor,
    SolverError,
    column_meshes,
    column_mortar,
    convergence_study,
    observed_order,
    predictor_study,
    pseudo1d_analytic,
    run,
)

__all__ = [
    "AssemblyError",
    "CaseConfig",
    "CouplingError",
    "FsiError",
    "InvalidConfig",
    "Master",
    "ParseError",
    "Predictor",
    "SolverError",
    "column_meshes",
    "column_mortar",
    "convergence_study",
    "observed_order",
    "predictor_study",
    "pseudo1d_analytic",
    "run",
]
