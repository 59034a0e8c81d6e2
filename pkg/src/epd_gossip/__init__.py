"""Gossip averaging on Z^d lattices, accelerated second-order iterations,
and closed-form PDE oracles for verifying their scaling limits at desk scale.
"""

from .engine import (
    IterationTrace,
    RoundMetrics,
    fundamental_profile,
    metrics_to_csv,
    run_from_descriptor,
    run_second_order,
    run_simple,
)
from .lattice import (
    BUILTIN_FILTERS,
    LatticeFilter,
    ScalarField,
    convolve,
    dirac_field,
    filter_fourier,
    lazy_filter,
    load_filter,
    new_filter,
    save_filter,
    standard_filter,
    triangular_filter,
    verify_aperiodicity,
)
from .oracles import (
    EpdSolution,
    HeatSolution,
    epd_eval,
    epd_filtered_on_lattice,
    epd_fourier,
    heat_eval,
    sinc_filter,
)
from .schedules import (
    CoefficientSchedule,
    check_schedule_asymptotics,
    custom_schedule,
    jacobi_general_schedule,
    jacobi_schedule,
    load_schedule,
)
from .specfun import (
    JacobiParams,
    bessel_j,
    gamma_fn,
    jacobi_normalized,
    jacobi_poly,
    jacobi_sup_bound,
    mehler_heine_limit,
)
from .verify import (
    TheoremReport,
    field_fourier,
    plancherel_l2,
    report_to_csv,
    sharp_rate_constant,
    sharp_rate_estimate,
    verify_local_clt,
    verify_local_epd,
    verify_weak_epd_pointwise,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_FILTERS",
    "CoefficientSchedule",
    "EpdSolution",
    "HeatSolution",
    "IterationTrace",
    "JacobiParams",
    "LatticeFilter",
    "RoundMetrics",
    "ScalarField",
    "TheoremReport",
    "bessel_j",
    "check_schedule_asymptotics",
    "convolve",
    "custom_schedule",
    "dirac_field",
    "epd_eval",
    "epd_filtered_on_lattice",
    "epd_fourier",
    "field_fourier",
    "filter_fourier",
    "fundamental_profile",
    "gamma_fn",
    "heat_eval",
    "jacobi_general_schedule",
    "jacobi_normalized",
    "jacobi_poly",
    "jacobi_schedule",
    "jacobi_sup_bound",
    "lazy_filter",
    "load_filter",
    "load_schedule",
    "mehler_heine_limit",
    "metrics_to_csv",
    "new_filter",
    "plancherel_l2",
    "report_to_csv",
    "run_from_descriptor",
    "run_second_order",
    "run_simple",
    "save_filter",
    "sharp_rate_constant",
    "sharp_rate_estimate",
    "sinc_filter",
    "standard_filter",
    "triangular_filter",
    "verify_aperiodicity",
    "verify_local_clt",
    "verify_local_epd",
    "verify_weak_epd_pointwise",
]
