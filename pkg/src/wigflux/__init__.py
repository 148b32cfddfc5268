"""Entropy production and entropy flux for one damped bosonic mode.

The package tracks a Gaussian Wigner function of a single mode coupled to
a thermal, squeezed or dephasing reservoir, and computes the phase-space
entropy production rate and entropy flux rate by four independent routes:
closed forms, Gauss-Legendre quadrature of the current fields, a finite
volume evolution of the phase-space distribution, and stochastic
trajectories with a fluctuation-theorem estimator.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    BalanceError,
    ConfigError,
    GaussianityNotPreserved,
    PhysicalityError,
    StabilityError,
    UnsupportedOperation,
    WigfluxError,
)
from .phasespace import (
    GaussianState,
    fourth_moment,
    gaussian_moment,
    von_neumann_entropy,
    wigner_entropy,
    wigner_eval,
    wigner_log_gradient,
)
from .model import (
    Dephasing,
    HamiltonianSpec,
    Pump,
    Squeezed,
    Thermal,
    drive_power,
    energy_flux,
    evolve,
    evolve_fixed_grid,
    mean_energy,
    moment_rhs,
    nbar_from_temperature,
    steady_state,
    temperature_from_nbar,
)
from .rates import (
    CurrentKind,
    Method,
    QuadratureSpec,
    RateReport,
    VnRates,
    current_eval,
    entropy_rate,
    jb_field_squared,
    jb_via_thermal_identity,
    phi_rate,
    pi_closed_form,
    pi_quadratic_form,
    pi_quadrature,
    pi_rate,
    pi_steady_state,
    rate_report,
    to_squeezed_frame,
    vn_rates,
)
from .trajectories import (
    DephasingSpec,
    FtEstimate,
    LangevinSpec,
    TrajectoryEnsemble,
    accumulate_sigma,
    dephasing_ensemble,
    fluctuation_theorem_estimator,
    kernel_term_sum,
    propagator_density,
    sample_paths,
)
from .fpgrid import (
    GridField,
    GridRates,
    GridStepper,
    evolve_grid,
    grid_rates,
)
from ._kernels import BACKEND, get_backend

__all__ = [
    "__version__",
    "AccuracyError", "BalanceError", "ConfigError", "GaussianityNotPreserved",
    "PhysicalityError", "StabilityError", "UnsupportedOperation",
    "WigfluxError",
    "GaussianState", "fourth_moment", "gaussian_moment",
    "von_neumann_entropy", "wigner_entropy", "wigner_eval",
    "wigner_log_gradient",
    "Dephasing", "HamiltonianSpec", "Pump", "Squeezed", "Thermal",
    "drive_power", "energy_flux", "evolve", "evolve_fixed_grid",
    "mean_energy", "moment_rhs", "nbar_from_temperature", "steady_state",
    "temperature_from_nbar",
    "CurrentKind", "Method", "QuadratureSpec", "RateReport", "VnRates",
    "current_eval", "entropy_rate", "jb_field_squared",
    "jb_via_thermal_identity", "phi_rate", "pi_closed_form",
    "pi_quadratic_form", "pi_quadrature", "pi_rate", "pi_steady_state",
    "rate_report", "to_squeezed_frame", "vn_rates",
    "DephasingSpec", "FtEstimate", "LangevinSpec", "TrajectoryEnsemble",
    "accumulate_sigma", "dephasing_ensemble",
    "fluctuation_theorem_estimator", "kernel_term_sum",
    "propagator_density", "sample_paths",
    "GridField", "GridRates", "GridStepper", "evolve_grid", "grid_rates",
    "BACKEND", "get_backend",
]
