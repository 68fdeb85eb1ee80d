"""Simulation and inference for stochastic epidemic models."""
from .core import (
    EventLog,
    GseParams,
    ReedFrostParams,
    basic_reproduction_number,
    classify_major,
    critical_vaccination_coverage,
    final_size,
    replicate,
    simulate,
    simulate_gse,
    simulate_reed_frost,
    vaccinated_reproduction_number,
)
from .errors import ConvergenceError, DomainError, EmptyPosteriorError, EpiError, SchemaError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "DomainError",
    "EmptyPosteriorError",
    "EpiError",
    "EventLog",
    "GseParams",
    "ReedFrostParams",
    "SchemaError",
    "basic_reproduction_number",
    "classify_major",
    "critical_vaccination_coverage",
    "final_size",
    "replicate",
    "simulate",
    "simulate_gse",
    "simulate_reed_frost",
    "vaccinated_reproduction_number",
]
