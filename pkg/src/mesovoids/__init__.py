"""Meso-scale asymptotic displacement fields for elastic solids with many small spherical voids."""

from .cloud import Ball, Cloud, CloudReport, generate_cloud, validate_cloud
from .elastic import (
    LameParams,
    big_xi,
    energy_density,
    rigid_motion_matrix,
    small_xi,
    stiffness_matrix,
    strain_vector,
    traction,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    GateError,
    GeometryError,
    InputError,
    NumericalError,
    ParameterError,
    SingularityError,
)
from .field import (
    EvaluationGrid,
    FieldSample,
    Status,
    evaluate_grid,
    far_field,
    uniform_field,
)
from .kernels import (
    FreeSpaceKernel,
    GreenKernel,
    gamma,
    gamma_dipole_kernel,
    gamma_hessian_kernel,
)
from .solver import (
    BackgroundField,
    InteractionSystem,
    PointForcePair,
    assemble_system,
    background_eval,
    background_strain,
    solve_coefficients,
    system_diagnostics,
)
from .sphere import Void, check_orthogonality, dipole_field, dipole_matrix

__version__ = "0.1.0"

__all__ = [
    "BackgroundField",
    "Ball",
    "CapacityError",
    "Cloud",
    "CloudReport",
    "ConvergenceError",
    "EvaluationGrid",
    "FieldSample",
    "FreeSpaceKernel",
    "GateError",
    "GeometryError",
    "GreenKernel",
    "InputError",
    "InteractionSystem",
    "LameParams",
    "NumericalError",
    "ParameterError",
    "PointForcePair",
    "SingularityError",
    "Status",
    "Void",
    "assemble_system",
    "background_eval",
    "background_strain",
    "big_xi",
    "check_orthogonality",
    "dipole_field",
    "dipole_matrix",
    "energy_density",
    "evaluate_grid",
    "far_field",
    "gamma",
    "gamma_dipole_kernel",
    "gamma_hessian_kernel",
    "generate_cloud",
    "rigid_motion_matrix",
    "small_xi",
    "solve_coefficients",
    "stiffness_matrix",
    "strain_vector",
    "system_diagnostics",
    "traction",
    "uniform_field",
    "validate_cloud",
]
