"""Validated run configuration for the command-line interface.

A config file is a JSON object; every section rejects unknown keys.  Only the
sections needed by the invoked command must be present.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .statespace import METRIC_KINDS, Ball, Box, CompactSet, Exhaustion, StateSpace

__all__ = [
    "RegionConfig",
    "ExhaustionConfig",
    "Tolerances",
    "TightConfig",
    "DemoConfig",
    "CompactnessConfig",
    "Config",
    "load_config",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RegionConfig(_Strict):
    """A ball (``center``, ``radius``) or a box (``lo``, ``hi``)."""

    kind: Literal["ball", "box"]
    center: Optional[list[float]] = None
    radius: Optional[float] = None
    lo: Optional[list[float]] = None
    hi: Optional[list[float]] = None

    def build(self) -> CompactSet:
        try:
            if self.kind == "ball":
                if self.center is None or self.radius is None or self.lo or self.hi:
                    raise ValueError("a ball takes exactly 'center' and 'radius'")
                return Ball(tuple(self.center), self.radius)
            if self.lo is None or self.hi is None or self.center or self.radius is not None:
                raise ValueError("a box takes exactly 'lo' and 'hi'")
            return Box(tuple(self.lo), tuple(self.hi))
        except ValueError as exc:
            raise ConfigError(f"region: {exc}") from None


class ExhaustionConfig(_Strict):
    base: float = Field(1.0, gt=0.0)
    growth: float = Field(2.0, gt=1.0)


class Tolerances(_Strict):
    bisection: float = Field(1e-10, gt=0.0)
    compact: float = Field(1e-3, gt=0.0)


class TightConfig(_Strict):
    statistic: Literal["omega", "aldous", "both"] = "both"
    samplers: list[dict[str, Any]] = Field(min_length=1)
    t: float = Field(ge=0.0)
    epsilon: float = Field(gt=0.0)
    region: Optional[RegionConfig] = None
    delta_grid: list[float] = Field(min_length=1)
    n_mc: int = Field(ge=1)

    @field_validator("delta_grid")
    @classmethod
    def _positive(cls, v: list[float]) -> list[float]:
        if any(not d > 0.0 for d in v):
            raise ValueError("grid values must be > 0")
        return v


class DemoConfig(_Strict):
    x0_list: Optional[list[float]] = None
    gap: float = Field(1e-3, gt=0.0)
    ode: Optional[dict[str, Any]] = None
    n_terms: int = Field(12, ge=1)
    t_rho: float = Field(2.0, ge=0.0)
    n_max: int = Field(16, ge=0)
    tol: float = Field(1e-6, gt=0.0)


class CompactnessConfig(_Strict):
    family: Literal["accumulating", "refinement", "paths"]
    n_max: int = Field(50, ge=1)
    m_max: int = Field(10, ge=0)
    f_expr: str = "a0"
    paths: list[str] = Field(default_factory=list)
    t_list: list[float] = Field(min_length=1)
    regions: list[RegionConfig] = Field(min_length=1)
    delta_grid: list[float] = Field(min_length=1)


class Config(_Strict):
    """Top-level configuration.

    Attributes
    ----------
    metric_kind : str
        ``euclidean-truncated`` or ``chordal``.
    seed : int
        Default seed, overridden by ``--seed``.
    output_dir : str, optional
        Directory for outputs when ``--out`` names a bare file.
    """

    metric_kind: str = "euclidean-truncated"
    exhaustion: ExhaustionConfig = ExhaustionConfig()
    tolerances: Tolerances = Tolerances()
    n_terms: int = Field(12, ge=1)
    seed: int = 0
    output_dir: Optional[str] = None
    tight: Optional[TightConfig] = None
    demo: Optional[DemoConfig] = None
    compactness: Optional[CompactnessConfig] = None

    @field_validator("metric_kind")
    @classmethod
    def _kind(cls, v: str) -> str:
        if v not in METRIC_KINDS:
            raise ValueError(f"metric_kind must be one of {METRIC_KINDS}")
        return v

    def space(self, dim: int) -> StateSpace:
        return StateSpace(dim, self.metric_kind)

    def exhaustion_for(self, dim: int) -> Exhaustion:
        return Exhaustion(dim, self.exhaustion.base, self.exhaustion.growth)


def load_config(file: str | Path | None) -> Config:
    """Read and validate a config file; ``None`` gives the defaults.

    Raises
    ------
    ConfigError
        On unreadable files, malformed JSON or schema violations.
    """
    if file is None:
        return Config()
    p = Path(file)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return Config.model_validate(obj)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(v) for v in first["loc"]) or "top level"
        raise ConfigError(f"{p}: {where}: {first['msg']}") from None
