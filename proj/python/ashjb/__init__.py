"""Gap-belief HJB solver: Python bindings to the C++ core."""

from ._core import (
    ConfigError,
    DomainError,
    GridSpec,
    ModelSpec,
    SolverError,
    band,
    boundary_closed_form,
    extremal_gaps,
    run,
    solve,
    structural_constants,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "GridSpec",
    "ModelSpec",
    "SolverError",
    "band",
    "boundary_closed_form",
    "extremal_gaps",
    "run",
    "solve",
    "structural_constants",
]
