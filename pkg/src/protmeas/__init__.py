"""Protective-measurement dynamics toolkit.

Coupling windows and their transforms, Dyson-series amplitudes, an exact
propagation oracle, and the scaling analysis that ties them together.
"""

from .analysis import fit_envelope_exponent, fwhm, probability_scan, table1_report
from .dyson import (
    AmplitudeTable,
    DysonRequest,
    SecondOrderBreakdown,
    alpha_distinct_chain,
    amplitude_table,
    dyson_amplitude,
    first_order_amplitude,
    first_order_probability,
    gamma_factor,
    nested_integral_identity,
    pointer_shift_phase,
    second_order_breakdown,
    single_virtual_term,
)
from .model import PointerModel, SystemModel, build_pointer, transition_frequency
from .oracle import (
    EvolutionResult,
    constant_coupling_diagonalization,
    disturbance_vs_prediction,
    full_measurement_run,
    propagate,
    rabi_transition_probability,
)
from .profiles import (
    CouplingProfile,
    cumulative_area,
    eval_g,
    fourier_transform,
    numeric_fourier_transform,
)

__all__ = [
    "AmplitudeTable",
    "CouplingProfile",
    "DysonRequest",
    "EvolutionResult",
    "PointerModel",
    "SecondOrderBreakdown",
    "SystemModel",
    "alpha_distinct_chain",
    "amplitude_table",
    "build_pointer",
    "constant_coupling_diagonalization",
    "cumulative_area",
    "disturbance_vs_prediction",
    "dyson_amplitude",
    "eval_g",
    "first_order_amplitude",
    "first_order_probability",
    "fit_envelope_exponent",
    "fourier_transform",
    "full_measurement_run",
    "fwhm",
    "gamma_factor",
    "nested_integral_identity",
    "numeric_fourier_transform",
    "pointer_shift_phase",
    "probability_scan",
    "propagate",
    "rabi_transition_probability",
    "second_order_breakdown",
    "single_virtual_term",
    "table1_report",
    "transition_frequency",
]

__version__ = "0.1.0"
