"""Step paths with explosion, local Skorokhod distances and their diagnostics.

Submodules
----------
paths, statespace, serialization
    Step paths, state spaces with a cemetery point, path files.
modulus, metrics, matching, warps, nets, convergence
    Moduli of continuity, exact distances by monotone matching.
timechange
    Time change by a rate function and regularizing rate functions.
tightness, sim
    Compactness and tightness diagnostics, fixture generators.
cli, config
    The ``localsko`` command line.
"""

from __future__ import annotations

from .errors import ConfigError, InvariantViolation, NotRelativelyCompactError, PathFormatError
from .metrics import global_metric, global_rho, local_metric, rho, rho_tilde
from .modulus import omega_prime
from .paths import StepPath
from .statespace import DELTA, Ball, Box, Exhaustion, StateSpace
from .timechange import GFunction, build_regularizing_g, clock, time_change

__all__ = [
    "DELTA",
    "Ball",
    "Box",
    "ConfigError",
    "Exhaustion",
    "GFunction",
    "InvariantViolation",
    "NotRelativelyCompactError",
    "PathFormatError",
    "StateSpace",
    "StepPath",
    "build_regularizing_g",
    "clock",
    "global_metric",
    "global_rho",
    "local_metric",
    "omega_prime",
    "rho",
    "rho_tilde",
    "time_change",
]

__version__ = "0.1.0"
