"""Random flights: samplers, closed-form densities, large deviation rates and
Monte Carlo checks of the rates."""

from .densities import (
    IsotropicDensity,
    conditional_density,
    poisson_mixture_density,
    radial_marginal,
    standard_ac_density_2d,
    standard_ac_density_4d,
)
from .errors import (
    DomainError,
    InfeasibleExperimentError,
    InsufficientSamplesError,
    InvalidDimensionError,
    InvalidParameterError,
    UnsupportedModelError,
)
from .flights import FlightSpec, Path, running_max_norm, sample_batch, simulate, simulate_conditional, simulate_standard
from .rates import (
    RateFunction,
    b_limit,
    brownian_limit_rate,
    compare_rates,
    conditional_rate,
    crossing_radius_4d,
    rate_inf_over_tail,
    standard_rate_2d,
    standard_rate_4d,
)
from .sampling import RngStream, sample_gamma, sample_time_partition, sample_unit_direction
from .verify import (
    convergence_race,
    estimate_exit_probability,
    estimate_tail,
    fit_decay_rate,
)

__version__ = "0.1.0"
