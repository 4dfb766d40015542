"""Jacobi heat kernel: spectral series, reduction route, product formulas and
empirical verification of two-sided Gaussian bounds for all alpha, beta > -1."""

from .jacobi import JacobiParams, frak_c, frak_d, jacobi_eval, norm_h
from .kernel import (
    T_MIN,
    HeatTarget,
    KernelQuery,
    KernelValue,
    envelope_z,
    h_aux_series,
    heat_kernel_reduced,
    heat_kernel_series,
    phase_f,
    truncation_depth,
)
from .measures import EndpointMeasure, ToleranceNotMet, pi_function
from .product import dk_lhs, dk_rhs, int1_rhs, phi, phi_even
from .verify import RatioReport, SweepGrid, bound_ratio_sweep, identity_suite

__all__ = [
    "JacobiParams",
    "jacobi_eval",
    "norm_h",
    "frak_c",
    "frak_d",
    "T_MIN",
    "KernelQuery",
    "KernelValue",
    "HeatTarget",
    "truncation_depth",
    "heat_kernel_series",
    "heat_kernel_reduced",
    "h_aux_series",
    "envelope_z",
    "phase_f",
    "EndpointMeasure",
    "ToleranceNotMet",
    "pi_function",
    "phi",
    "phi_even",
    "dk_lhs",
    "dk_rhs",
    "int1_rhs",
    "SweepGrid",
    "RatioReport",
    "bound_ratio_sweep",
    "identity_suite",
]

__version__ = "0.1.0"
