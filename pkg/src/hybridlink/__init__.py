"""Outage analysis of a weather-switched hybrid RF/FSO satellite downlink."""

from .errors import (ConsistencyError, DomainError, NumericalError, SeriesDivergenceError,
                     UnsupportedParameterError)
from .scenario import Scenario, ScenarioFile, load_bundled, load_scenario
from .specfun import SeriesControl

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError", "DomainError", "NumericalError", "Scenario", "ScenarioFile",
    "SeriesControl", "SeriesDivergenceError", "UnsupportedParameterError",
    "load_bundled", "load_scenario",
]
