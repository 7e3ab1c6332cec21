"""Spectral simulator for the stochastic heat equation on a moving interval."""

from .basis import (
    CoefficientState,
    FieldSnapshot,
    coupling,
    coupling_matrix,
    eigenfunction,
    eigenvalue,
    eigenvalues,
    h1_norm_sq,
    l2_norm_sq,
    project_initial,
    synthesize,
)
from .diagnostics import (
    EnergyLedger,
    energy_residual,
    energy_residuals,
    level_distance,
    mean_energy_balance,
    moment_report,
    self_convergence_study,
    x_norm,
    y_norm_sq,
)
from .domain import DomainMotion, make_domain
from .errors import ConfigError, NumericalError
from .integrator import (
    EnsembleSummary,
    ModeInitial,
    ModesInitial,
    ParabolaInitial,
    SimulationConfig,
    Trajectory,
    drift,
    explicit_dt_bound,
    simulate,
    simulate_ensemble,
    step,
)
from .noise import (
    DiffusionModel,
    NoiseStream,
    check_assumptions,
    draw_increment,
    general_matrix,
    hs_norm_sq,
    moving_diagonal,
    noise_kick,
    sigma_coeff,
    zero_model,
)
from .oracle import MappedGridSolution, compare_with_spectral, fd_solve

__version__ = "0.1.0"

__all__ = [
    "CoefficientState",
    "ConfigError",
    "DiffusionModel",
    "DomainMotion",
    "EnergyLedger",
    "EnsembleSummary",
    "FieldSnapshot",
    "MappedGridSolution",
    "ModeInitial",
    "ModesInitial",
    "NoiseStream",
    "NumericalError",
    "ParabolaInitial",
    "SimulationConfig",
    "Trajectory",
    "check_assumptions",
    "compare_with_spectral",
    "coupling",
    "coupling_matrix",
    "drift",
    "draw_increment",
    "eigenfunction",
    "eigenvalue",
    "eigenvalues",
    "energy_residual",
    "energy_residuals",
    "explicit_dt_bound",
    "fd_solve",
    "general_matrix",
    "h1_norm_sq",
    "hs_norm_sq",
    "l2_norm_sq",
    "level_distance",
    "make_domain",
    "mean_energy_balance",
    "moment_report",
    "moving_diagonal",
    "noise_kick",
    "project_initial",
    "self_convergence_study",
    "sigma_coeff",
    "simulate",
    "simulate_ensemble",
    "step",
    "synthesize",
    "x_norm",
    "y_norm_sq",
    "zero_model",
]
