"""Quantitative third-law bounds for cooling with finite resources.

Modules: :mod:`spectra` (system and bath models), :mod:`statmech` (counting,
entropy, free energies), :mod:`bounds` (error and temperature bounds),
:mod:`oracle` (exact relaxed optimum on small spectra) and :mod:`cli`.
"""
from .bounds import (
    BoundReport,
    ResourceBudget,
    error_bound_general,
    error_bound_smooth,
    radiation_bound,
    thermal_cooling_bound,
    time_bound,
)
from .oracle import enumerate_joint, exhaustive_optimal_error, greedy_optimal_error, validate_bound
from .spectra import (
    AnalyticBathModel,
    ExplicitBathSpectrum,
    SystemSpec,
    build_system,
    build_thermal_system,
    compose_bath,
    erasure_system,
    explicit_bath,
    radiation_bath,
)

__version__ = "0.1.0"
