"""Pulsed nonlocal-dispersal epidemic fronts.

Simulation of a two-component density system with nonlocal dispersal,
periodic pulse intervention, and moving fronts; principal eigenvalues of the
pulsed linearisation; and spreading/vanishing classification.
"""

from .config import PRESETS, ConfigError, ScenarioConfig, parse_config
from .fixed_domain import (
    FixedProblem,
    InstabilityError,
    LimitTrajectory,
    MonotoneIterationResult,
    PeriodicState,
    apply_pulse,
    period_map,
    periodic_state,
    solve_limit_ode,
    stable_dt,
    step_fixed,
)
from .free_boundary import (
    Classification,
    DetectorThresholds,
    FrontState,
    IndeterminateOutcomeError,
    InvalidBracketError,
    Simulator,
    Snapshot,
    Trajectory,
    WindowCapError,
    boundary_speeds,
    classify,
    cosine_initial_profiles,
    detect_outcome,
    find_mu_star,
    simulate,
)
from .kernels import (
    FieldPair,
    Grid,
    Kernel,
    KernelSpec,
    active_weights,
    build_kernel,
    bump_kernel,
    convolve,
    first_half_moment,
    tail_mass,
)
from .model import (
    GrowthSpec,
    ModelParams,
    PulseSpec,
    RootNotBracketedError,
    SolutionBounds,
    ValidationReport,
    compute_bounds,
    reproduction_ratio,
    validate,
)
from .spectral import (
    BracketError,
    EigenReport,
    MonotonicityError,
    NoRootError,
    PowerIterationError,
    eta1_closed_form,
    find_lstar,
    lambda1,
    lambda1_transformed,
    mu1_ode,
    sweep_lambda1,
)

__version__ = "0.1.0"
