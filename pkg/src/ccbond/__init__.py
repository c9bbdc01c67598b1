"""Perpetual callable convertible bonds when both parties may only act at Poisson arrival times."""

from .closed_form import (
    bondholder_solution,
    firm_coefficients,
    forced_conversion_boundary,
    regime_boundaries,
    solve_game,
    threshold_co,
    threshold_co_unconstrained,
    value_ca,
    value_ca_unconstrained,
    value_co,
    value_f,
    z_level,
)
from .engine import estimate_J, sample_path, simulate_stops
from .errors import CCBondError, ParameterError
from .model import ModelParams, RegimeTag, char_roots, classify_regime, validate_params
from .strategies import StoppingStrategy, parse_strategy

__version__ = "0.1.0"
