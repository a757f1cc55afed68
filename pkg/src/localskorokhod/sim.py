"""Fixture generators: Euler paths of explosive ODEs and compound-Poisson paths.

The ODE generator emits the piecewise-constant path of explicit Euler
iterates and truncates it at the first iterate outside a large escape ball,
which stands in for the blow-up time.  :func:`continuity_demo` runs the
scalar equation ``x' = (1 - t) x^2`` for starting points on both sides of
its blow-up threshold ``x_0 = 2`` and tabulates local and global distances
before and after a regularizing time change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .metrics import global_metric, global_rho, local_metric
from .paths import StepPath
from .statespace import Exhaustion, StateSpace
from .timechange import GFunction, GProfile, build_regularizing_g, time_change

__all__ = [
    "FIELDS",
    "OdeSpec",
    "OdeResult",
    "ode_run",
    "ode_path",
    "explosion_threshold",
    "JumpSpec",
    "levy_step_path",
    "DEMO_SPEC",
    "straddling_pair",
    "DemoRow",
    "DemoReport",
    "continuity_demo",
]


def _intro_field(t: float, x: np.ndarray) -> np.ndarray:
    return (1.0 - t) * x * x


def _zero_field(t: float, x: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


def _square_field(t: float, x: np.ndarray) -> np.ndarray:
    return x * x


# Named fields usable from JSON specs.
FIELDS: dict[str, Callable[[float, np.ndarray], np.ndarray]] = {
    "intro": _intro_field,
    "zero": _zero_field,
    "square": _square_field,
}


@dataclass(frozen=True)
class OdeSpec:
    """Explicit Euler scheme with step halving near blow-up.

    Parameters
    ----------
    field : str or callable
        ``b(t, x)``; a name from :data:`FIELDS` or an effect-free callable.
    x0 : sequence of float
        Starting point.
    t_max : float
        Integration horizon.
    escape_radius : float
        Explosion is declared at the first iterate with ``|x| > escape_radius``.
    base_step : float
        Step used where the field is tame.
    max_increment : float
        The step is halved while ``|b| h > max_increment * max(1, |x|)``.
    min_step : float
        Halving stops here; the path is then truncated and flagged.
    """

    field: str | Callable[[float, np.ndarray], np.ndarray]
    x0: tuple[float, ...]
    t_max: float = 2.0
    escape_radius: float = 1e6
    base_step: float = 0.01
    max_increment: float = 0.05
    min_step: float = 1e-12

    def __post_init__(self) -> None:
        x0 = tuple(float(v) for v in np.atleast_1d(np.asarray(self.x0, dtype=float)))
        object.__setattr__(self, "x0", x0)
        if not x0 or not all(math.isfinite(v) for v in x0):
            raise ValueError("x0 must be a nonempty finite point")
        if isinstance(self.field, str) and self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}; known: {sorted(FIELDS)}")
        if not (self.t_max > 0.0 and math.isfinite(self.t_max)):
            raise ValueError("t_max must be finite and > 0")
        if not self.escape_radius > float(np.linalg.norm(x0)):
            raise ValueError("x0 must lie inside the escape ball")
        if not 0.0 < self.min_step <= self.base_step:
            raise ValueError("need 0 < min_step <= base_step")
        if not self.max_increment > 0.0:
            raise ValueError("max_increment must be > 0")

    @property
    def b(self) -> Callable[[float, np.ndarray], np.ndarray]:
        return FIELDS[self.field] if isinstance(self.field, str) else self.field

    def with_x0(self, x0: Sequence[float] | float) -> "OdeSpec":
        return OdeSpec(self.field, tuple(np.atleast_1d(x0)), self.t_max, self.escape_radius,
                       self.base_step, self.max_increment, self.min_step)

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "OdeSpec":
        allowed = {"field", "x0", "t_max", "escape_radius", "base_step", "max_increment", "min_step"}
        extra = set(obj) - allowed
        if extra:
            raise ValueError(f"unexpected ODE spec keys: {sorted(extra)}")
        if "field" not in obj or "x0" not in obj:
            raise ValueError("ODE spec needs 'field' and 'x0'")
        if not isinstance(obj["field"], str):
            raise ValueError("ODE spec 'field' must be a name")
        kw = {k: float(v) for k, v in obj.items() if k not in ("field", "x0")}
        return cls(obj["field"], tuple(np.atleast_1d(np.asarray(obj["x0"], dtype=float))), **kw)


@dataclass(frozen=True)
class OdeResult:
    path: StepPath
    exploded: bool
    step_floor_hit: bool


def ode_run(spec: OdeSpec) -> OdeResult:
    """Euler integration with explosion diagnostics; see :func:`ode_path`."""
    b = spec.b
    x = np.array(spec.x0, dtype=float)
    t = 0.0
    times = [0.0]
    values = [x.copy()]
    while t < spec.t_max:
        h = min(spec.base_step, spec.t_max - t)
        drift = np.asarray(b(t, x), dtype=float)
        if drift.shape != x.shape or not np.all(np.isfinite(drift)):
            raise ValueError(f"field returned a non-finite or misshapen value at t={t!r}")
        speed = float(np.linalg.norm(drift))
        scale = max(1.0, float(np.linalg.norm(x)))
        while speed * h > spec.max_increment * scale and h > spec.min_step:
            h = max(h / 2.0, spec.min_step)
        if speed * h > spec.max_increment * scale:
            # The step cannot shrink further: truncate here as an explosion.
            return OdeResult(StepPath(times, np.array(values), t + h), True, True)
        t_new = t + h
        x_new = x + h * drift
        if float(np.linalg.norm(x_new)) > spec.escape_radius:
            return OdeResult(StepPath(times, np.array(values), t_new), True, False)
        if t_new >= spec.t_max:
            break
        t, x = t_new, x_new
        if not np.array_equal(x, values[-1]):
            times.append(t)
            values.append(x.copy())
    return OdeResult(StepPath(times, np.array(values)), False, False)


def ode_path(spec: OdeSpec) -> StepPath:
    """Step path of the Euler iterates of ``x' = b(t, x)``.

    The path holds the iterate ``x_k`` on ``[t_k, t_{k+1})``.  If an iterate
    leaves the escape ball before ``t_max``, ``xi`` is the time of that
    iterate; otherwise ``xi = inf`` and the last value before ``t_max`` is
    held.  Iterates equal to their predecessor are merged.

    Raises
    ------
    ValueError
        If the field evaluates to a non-finite value.

    Examples
    --------
    >>> ode_path(OdeSpec("zero", (1.0,))).n_segments
    1
    >>> p = ode_path(OdeSpec("intro", (3.0,)))
    >>> 0.0 < p.xi < 1.0
    True
    """
    return ode_run(spec).path


def explosion_threshold(spec: OdeSpec, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Bisect the scalar starting point at which the Euler scheme starts to explode.

    ``lo`` must give a non-exploding path and ``hi`` an exploding one.  The
    scheme's threshold differs from the exact one by roughly
    ``max_increment``, so demos straddle this value rather than the exact one.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if ode_run(spec.with_x0(lo)).exploded or not ode_run(spec.with_x0(hi)).exploded:
        raise ValueError("the bracket does not straddle the explosion threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ode_run(spec.with_x0(mid)).exploded:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


JUMP_KINDS = ("normal", "uniform", "constant", "rademacher")


@dataclass(frozen=True)
class JumpSpec:
    """Compound-Poisson path with clamped values.

    Parameters
    ----------
    intensity : float
        Jump rate, ``> 0``.
    horizon : float
        Jumps are drawn on ``[0, horizon)``.
    jump : str
        ``normal`` (mean 0, sd ``scale``), ``uniform`` on ``[-scale, scale]``,
        ``constant`` (always ``+scale``) or ``rademacher`` (``+-scale``).
    scale : float
        Jump-size parameter, ``>= 0``.
    clamp : float
        Values are clipped to ``[-clamp, clamp]`` in every coordinate.
    x0 : tuple of float
        Starting point; its length sets the dimension.
    """

    intensity: float = 1.0
    horizon: float = 10.0
    jump: str = "normal"
    scale: float = 1.0
    clamp: float = 1e6
    x0: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        if not (self.intensity > 0.0 and math.isfinite(self.intensity)):
            raise ValueError("intensity must be finite and > 0")
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be finite and > 0")
        if self.jump not in JUMP_KINDS:
            raise ValueError(f"jump must be one of {JUMP_KINDS}")
        if not (self.scale >= 0.0 and math.isfinite(self.scale)):
            raise ValueError("scale must be finite and >= 0")
        if not self.clamp > 0.0:
            raise ValueError("clamp must be > 0")
        if not self.x0 or any(abs(v) > self.clamp for v in self.x0):
            raise ValueError("x0 must be nonempty and within the clamp")

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "JumpSpec":
        allowed = {"intensity", "horizon", "jump", "scale", "clamp", "x0"}
        extra = set(obj) - allowed
        if extra:
            raise ValueError(f"unexpected jump spec keys: {sorted(extra)}")
        kw: dict[str, Any] = dict(obj)
        if "x0" in kw:
            kw["x0"] = tuple(np.atleast_1d(np.asarray(kw["x0"], dtype=float)))
        return cls(**kw)


def levy_step_path(spec: JumpSpec, seed: int | np.random.SeedSequence) -> StepPath:
    """Sample a compound-Poisson step path; ``xi = inf``.

    Examples
    --------
    >>> p = levy_step_path(JumpSpec(intensity=2.0, jump="constant", scale=1.0), seed=0)
    >>> bool(all(v == i for i, v in enumerate(p.values[:, 0])))
    True
    """
    rng = np.random.default_rng(seed)
    dim = len(spec.x0)
    x = np.array(spec.x0, dtype=float)
    times = [0.0]
    values = [x.copy()]
    t = 0.0
    while True:
        t += float(rng.exponential(1.0 / spec.intensity))
        if t >= spec.horizon:
            break
        if spec.jump == "normal":
            dx = rng.normal(0.0, spec.scale, dim)
        elif spec.jump == "uniform":
            dx = rng.uniform(-spec.scale, spec.scale, dim)
        elif spec.jump == "constant":
            dx = np.full(dim, spec.scale)
        else:
            dx = spec.scale * rng.choice([-1.0, 1.0], dim)
        x = np.clip(x + dx, -spec.clamp, spec.clamp)
        if not np.array_equal(x, values[-1]):
            times.append(t)
            values.append(x.copy())
    return StepPath(times, np.array(values))


# Coarse scheme used by the demo: it blows up like the exact flow and keeps
# paths short enough for the exact matching distances.
DEMO_SPEC = OdeSpec("intro", (2.0,), t_max=2.0, base_step=0.05, max_increment=0.2)


def straddling_pair(spec: OdeSpec, seed: int, gap: float = 1e-3,
                    bracket: tuple[float, float] = (1.0, 4.0)) -> tuple[float, float]:
    """Two starting points ``gap`` apart on both sides of the scheme's threshold.

    The center is the threshold shifted by a seeded offset of at most
    ``gap / 4``, so both points stay on their side.
    """
    if not gap > 0.0:
        raise ValueError("gap must be > 0")
    thr = explosion_threshold(spec, *bracket)
    shift = float(np.random.default_rng(seed).uniform(-0.25, 0.25)) * gap
    return thr + shift - 0.5 * gap, thr + shift + 0.5 * gap


@dataclass(frozen=True)
class DemoRow:
    """Distances between the paths started at ``x0_a`` and ``x0_b``.

    ``local_*`` and ``global_after`` are upper ends of metric brackets;
    ``global_rho_*`` is the single global distance at horizon ``t_rho``.
    """

    x0_a: float
    x0_b: float
    xi_a: float
    xi_b: float
    local_before: float
    global_rho_before: float
    local_after: float
    global_rho_after: float
    global_after: float

    HEADER = ("x0_a", "x0_b", "xi_a", "xi_b", "local_before", "global_rho_before",
              "local_after", "global_rho_after", "global_after")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, k)) for k in self.HEADER)


@dataclass(frozen=True)
class DemoReport:
    rows: tuple[DemoRow, ...]
    profile: GProfile = field(repr=False)
    n_terms: int
    t_rho: float

    def to_csv(self) -> str:
        from .serialization import render_csv

        return render_csv(DemoRow.HEADER, (r.as_tuple() for r in self.rows))


def continuity_demo(x0_list: Sequence[float], spec: OdeSpec | None = None,
                    g: GFunction | None = None, n_terms: int = 12, t_rho: float = 2.0,
                    exhaustion: Exhaustion | None = None, n_max: int = 16,
                    tol: float = 1e-6) -> DemoReport:
    """Local versus global distances for neighboring starting points.

    Parameters
    ----------
    x0_list : sequence of float
        Scalar starting points; consecutive entries are compared.
    spec : OdeSpec, optional
        Template scheme (its ``x0`` is replaced); defaults to :data:`DEMO_SPEC`.
    g : GFunction, optional
        Rate function for the time change; defaults to the normalized
        profile of :func:`build_regularizing_g` on the emitted family.
    n_terms : int
        Terms of the metric series.
    t_rho : float
        Horizon of the single global distance.
    exhaustion : Exhaustion, optional
        Compacts of the local metric; defaults to balls of radius ``2^n``.
    tol : float
        Bisection tolerance of every distance.

    Notes
    -----
    All distances use the chordal metric, under which the cemetery is at
    finite distance from every point.  The full global series before the
    time change is not tabulated: ``global_rho_before`` already bounds it
    from below by ``2^-t_rho min(global_rho_before, 1)`` for integer ``t_rho``.
    """
    if len(x0_list) < 2:
        raise ValueError("need at least two starting points")
    spec = spec if spec is not None else DEMO_SPEC
    paths = [ode_path(spec.with_x0(float(v))) for v in x0_list]
    sp = StateSpace(paths[0].dim, "chordal")
    ex = exhaustion if exhaustion is not None else Exhaustion(paths[0].dim)
    profile = build_regularizing_g(paths, None, n_max).normalized()
    gf = g if g is not None else profile.as_gfunction()
    changed = [time_change(gf, p) for p in paths]
    rows = []
    for i in range(len(paths) - 1):
        a, b = paths[i], paths[i + 1]
        ga, gb = changed[i], changed[i + 1]
        rows.append(DemoRow(
            float(x0_list[i]), float(x0_list[i + 1]), a.xi, b.xi,
            local_metric(a, b, ex, n_terms, sp, tol)[1],
            global_rho(a, b, t_rho, sp, tol),
            local_metric(ga, gb, ex, n_terms, sp, tol)[1],
            global_rho(ga, gb, t_rho, sp, tol),
            global_metric(ga, gb, n_terms, sp, tol)[1],
        ))
    return DemoReport(tuple(rows), profile, n_terms, t_rho)
