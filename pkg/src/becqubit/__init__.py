"""Impurity-qubit dephasing in a Bose-Einstein condensate.

Computes the time-local decay rate gamma(t), the decoherence exponent
Gamma(t), information back-flow (non-Markovianity) measures, and the
Markovian/non-Markovian crossover in the boson scattering length for 1D, 2D
and 3D condensate geometries.
"""

__version__ = "0.1.0"

from .analysis import (
    BracketError,
    CrossoverResult,
    SweepTable,
    ToyModel,
    classify,
    classify_config,
    find_crossover,
    sweep,
    toy_critical_s,
    toy_rate,
    toy_rate_trace,
)
from .constants import A_RB, BOHR_RADIUS, HBAR
from .dynamics import (
    NegativeInterval,
    NonMarkovianityResult,
    OptimalPairReport,
    QubitState,
    choose_horizon,
    evolve,
    find_negative_intervals,
    information_flux,
    measure,
    trace_distance,
    verify_optimal_pair,
)
from .engine import (
    ConvergenceError,
    DecoherenceTrace,
    RateTrace,
    SpectralProfile,
    angular_kernel,
    bogoliubov_energy,
    build_decoherence_trace,
    build_rate_trace,
    decoherence,
    effective_spectral_density,
    fit_exponent,
    free_energy,
    rate,
    rate_from_spectrum,
)
from .params import (
    DerivedCouplings,
    PhysicalConfig,
    RegimeWarning,
    ReducedModel,
    default_config,
    derive_couplings,
    model_from_config,
    parse_config_file,
    parse_config_text,
    reduce_model,
)

__all__ = [
    "A_RB",
    "BOHR_RADIUS",
    "HBAR",
    "BracketError",
    "ConvergenceError",
    "CrossoverResult",
    "DecoherenceTrace",
    "DerivedCouplings",
    "NegativeInterval",
    "NonMarkovianityResult",
    "OptimalPairReport",
    "PhysicalConfig",
    "QubitState",
    "RateTrace",
    "ReducedModel",
    "RegimeWarning",
    "SpectralProfile",
    "SweepTable",
    "ToyModel",
    "angular_kernel",
    "bogoliubov_energy",
    "build_decoherence_trace",
    "build_rate_trace",
    "choose_horizon",
    "classify",
    "classify_config",
    "decoherence",
    "default_config",
    "derive_couplings",
    "effective_spectral_density",
    "evolve",
    "find_crossover",
    "find_negative_intervals",
    "fit_exponent",
    "free_energy",
    "information_flux",
    "measure",
    "model_from_config",
    "parse_config_file",
    "parse_config_text",
    "rate",
    "rate_from_spectrum",
    "reduce_model",
    "sweep",
    "toy_critical_s",
    "toy_rate",
    "toy_rate_trace",
    "trace_distance",
    "verify_optimal_pair",
]
