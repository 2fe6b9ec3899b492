"""Viscous-capillary shock fronts on the half line.

Construction of traveling fronts for a compressible flow model with both
viscosity and capillarity, the asymptotic shift a reflecting wall imposes
on them, an implicit half-line solver, and the diagnostics needed to check
the nonlinear stability estimates numerically.
"""

from .config import RunConfig, load_config, parse_config
from .errors import (
    AuditError,
    ConfigError,
    CorridorError,
    DegenerateShockError,
    InconsistentParamsError,
    MonotonicityError,
    NotATwoShockError,
    NskError,
    OvershootError,
    PositivityError,
    ProfileError,
    ShiftConsistencyError,
    StepFailure,
    TailFitError,
    TailTruncationError,
    VacuumExceededError,
)
from .model import (
    ModelParams,
    PressureLaw,
    char_speed,
    lax_entropy_margin,
    profile_existence_margin,
    solve_rankine_hugoniot,
)
from .profile import (
    ShockProfile,
    compute_first_integrals,
    equilibrium_eigenvalues,
    estimate_decay_rate,
    evaluate_profile,
    profile_ode_rhs,
    solve_profile,
)
from .shift import ShiftData, boundary_data_norm, compute_alpha, eval_A, eval_I
from .solver import (
    FieldState,
    Grid,
    Perturbation,
    SolverConfig,
    make_initial_data,
    run,
    semidiscrete_rhs,
    step,
)
from .diagnostics import (
    DiagnosticsAuditor,
    DiagnosticsRecord,
    PerturbationFields,
    compute_perturbation,
    mass_balance_residual,
    sobolev_norms,
    sup_distance,
    theorem_bound_audit,
)
from .experiment import RunSetup, prepare, refinement_study, simulate

__version__ = "0.1.0"
