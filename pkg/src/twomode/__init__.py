"""Closed-form dynamics of a cat state coupled to a coherent state.

Two bosonic modes exchange excitations through a rotating-wave coupling.
``dynamics`` and ``charfunc`` hold the analytic results; ``oracle``
re-derives every observable by brute force in a truncated Fock space.
"""
from .dynamics import (
    ModeCoupling,
    Scenario,
    entropy_closed_form,
    evolution_coeffs,
    exchange_functional_closed,
    joint_state,
    mean_excitations,
    special_times,
    variance_closed_form,
)
from .errors import ConfigError, TwoModeError
from .fock import CatSpec, coherent_ket, cat_ket, partial_trace, purity_and_linear_entropy
from .oracle import Oracle, verify_against_analytic

__version__ = "0.1.0"

__all__ = [
    "CatSpec",
    "ConfigError",
    "ModeCoupling",
    "Oracle",
    "Scenario",
    "TwoModeError",
    "cat_ket",
    "coherent_ket",
    "entropy_closed_form",
    "evolution_coeffs",
    "exchange_functional_closed",
    "joint_state",
    "mean_excitations",
    "partial_trace",
    "purity_and_linear_entropy",
    "special_times",
    "variance_closed_form",
    "verify_against_analytic",
]
