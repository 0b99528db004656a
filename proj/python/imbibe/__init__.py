"""Moisture imbibition in porous materials."""

import os
from pathlib import Path

# Wheels ship the materials table next to the extension module.
_share = Path(__file__).with_name("share")
if (_share / "materials.json").is_file():
    os.environ.setdefault("IMBIBE_SHARE_DIR", str(_share))

from ._core import (  # noqa: E402
    AbsorptionLaw,
    Boundary,
    CflError,
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    IntegrationError,
    NumericalError,
    Scheme,
    cfl_max_dt,
    cmd_calibrate,
    cmd_converge,
    cmd_reconstruct,
    cmd_simulate,
    dtw,
    fit_monotone,
    legendre_shifted,
    simulate,
    sre,
)

__all__ = [
    "AbsorptionLaw",
    "Boundary",
    "CflError",
    "ConfigError",
    "DataError",
    "DivergenceError",
    "DomainError",
    "IntegrationError",
    "NumericalError",
    "Scheme",
    "cfl_max_dt",
    "cmd_calibrate",
    "cmd_converge",
    "cmd_reconstruct",
    "cmd_simulate",
    "dtw",
    "fit_monotone",
    "legendre_shifted",
    "simulate",
    "sre",
]
