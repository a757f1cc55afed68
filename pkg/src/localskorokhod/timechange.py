"""Time change of step paths by a rate function ``g``.

The clock ``A_s = int_0^s du / g(x_u)`` runs up to the first time the path
sits in ``{g = 0}``; the time-changed path ``g.x`` follows ``x`` along the
inverse clock and freezes once the clock is exhausted.  On step paths the
clock is piecewise linear with slopes ``1 / g(v_i)``, so every quantity here
is a finite sum.  Sums are carried in :class:`fractions.Fraction`, which is
exact for float inputs; results are rounded to float once.

The module also builds rate functions that vanish fast enough near the
boundary of an open set (or near infinity) for time-changed paths to have
limits in the one-point compactification.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import NotRelativelyCompactError
from .modulus import omega_prime_below
from .paths import StepPath
from .statespace import DELTA, Ball, StateSpace, chordal_radius_to_norm

__all__ = [
    "GFunction",
    "Clock",
    "clock",
    "time_change",
    "BConditions",
    "b_conditions",
    "in_continuity_set",
    "compose_check",
    "GProfile",
    "build_regularizing_g",
    "GlobalizeReport",
    "globalize",
    "compare_sequence",
]


def _never(a: np.ndarray) -> bool:
    return False


@dataclass(frozen=True)
class GFunction:
    """A rate function ``g >= 0`` with a declared closed zero set.

    Parameters
    ----------
    func : callable
        Maps a point (1-d float array) to a float.
    is_zero : callable, optional
        Membership in ``{g = 0}``; defaults to the empty set.
    bound : float, optional
        A global upper bound on ``g`` when one is known.
    label : str
        Free-form description, used in reports.

    Notes
    -----
    Clocks check on every visited value that ``g`` is finite, nonnegative
    and vanishes exactly on the declared zero set.
    """

    func: Callable[[np.ndarray], float]
    is_zero: Callable[[np.ndarray], bool] = _never
    bound: float | None = None
    label: str = "g"

    def __call__(self, a: np.ndarray) -> float:
        return float(self.func(np.asarray(a, dtype=float)))

    def checked(self, a: np.ndarray) -> float:
        """``g(a)`` after validating sign, finiteness and the zero set."""
        v = self(a)
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"{self.label} must be finite and >= 0, got {v!r} at {a!r}")
        if (v == 0.0) != bool(self.is_zero(a)):
            raise ValueError(f"{self.label} disagrees with its declared zero set at {a!r}")
        return v

    def __mul__(self, other: "GFunction") -> "GFunction":
        f1, f2, z1, z2 = self.func, other.func, self.is_zero, other.is_zero
        bound = None
        if self.bound is not None and other.bound is not None:
            bound = self.bound * other.bound
        return GFunction(lambda a: f1(a) * f2(a), lambda a: bool(z1(a)) or bool(z2(a)),
                         bound, f"({self.label})*({other.label})")

    def scaled(self, c: float) -> "GFunction":
        """``c * g`` for ``c > 0``: same zero set."""
        if not (c > 0.0 and math.isfinite(c)):
            raise ValueError("scale must be finite and > 0")
        f = self.func
        bound = None if self.bound is None else c * self.bound
        return GFunction(lambda a: c * f(a), self.is_zero, bound, f"{c!r}*({self.label})")

    @classmethod
    def constant(cls, c: float) -> "GFunction":
        if not (c >= 0.0 and math.isfinite(c)):
            raise ValueError("constant rate must be finite and >= 0")
        zero = c == 0.0
        return cls(lambda a: c, (lambda a: True) if zero else _never, c, f"{c!r}")

    @classmethod
    def coordinate(cls, index: int = 0, shift: float = 0.0, scale: float = 1.0) -> "GFunction":
        """``g(a) = scale * max(a[index] - shift, 0)``, zero on ``{a[index] <= shift}``."""
        if index < 0:
            raise ValueError("index must be >= 0")
        if not (scale > 0.0 and math.isfinite(scale)):
            raise ValueError("scale must be finite and > 0")
        return cls(lambda a: scale * max(float(a[index]) - shift, 0.0),
                   lambda a: float(a[index]) <= shift, None,
                   f"{scale!r}*max(a[{index}]-{shift!r},0)")

    @classmethod
    def from_expr(cls, expr: str, dim: int) -> "GFunction":
        """Rate from an arithmetic expression in ``a0, a1, ...`` and ``r = |a|``.

        Allowed: numbers, ``+ - * / **``, unary minus, and the functions
        ``abs, sqrt, exp, log, min, max``.  The zero set is ``{g == 0}``.
        """
        code = _compile_expr(expr, dim)
        return cls(code, lambda a: code(a) == 0.0, None, expr)

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any], dim: int) -> "GFunction":
        """Build from a config mapping with a ``kind`` key.

        Kinds: ``constant`` (``value``), ``coordinate`` (``index``,
        ``shift``, ``scale``), ``radial-profile`` (a :class:`GProfile`
        mapping) and ``expr`` (``expr``).
        """
        kind = spec.get("kind")
        extra = set(spec) - {"kind"}
        if kind == "constant":
            _only(extra, {"value"}, kind)
            return cls.constant(float(spec.get("value", 1.0)))
        if kind == "coordinate":
            _only(extra, {"index", "shift", "scale"}, kind)
            index = int(spec.get("index", 0))
            if index >= dim:
                raise ValueError("coordinate index exceeds the dimension")
            return cls.coordinate(index, float(spec.get("shift", 0.0)), float(spec.get("scale", 1.0)))
        if kind == "radial-profile":
            prof = GProfile.from_dict({k: v for k, v in spec.items() if k != "kind"})
            if prof.dim != dim:
                raise ValueError("profile dimension does not match the path")
            return prof.as_gfunction()
        if kind == "expr":
            _only(extra, {"expr"}, kind)
            return cls.from_expr(str(spec["expr"]), dim)
        raise ValueError(f"unknown g kind {kind!r}")


def _only(keys: set[str], allowed: set[str], kind: str) -> None:
    bad = keys - allowed
    if bad:
        raise ValueError(f"unexpected keys for g kind {kind!r}: {sorted(bad)}")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS: dict[str, Callable[..., float]] = {"abs": abs, "sqrt": math.sqrt, "exp": math.exp,
                                           "log": math.log, "min": min, "max": max}


def _compile_expr(expr: str, dim: int) -> Callable[[np.ndarray], float]:
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"invalid g expression: {exc.msg}") from None
    names = {f"a{i}" for i in range(dim)} | {"r"}

    def check(node: ast.AST) -> None:
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name) and node.id in names:
            pass
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            check(node.operand)
        elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
              and node.func.id in _FUNCS and not node.keywords):
            for arg in node.args:
                check(arg)
        else:
            raise ValueError(f"unsupported construct in g expression: {ast.dump(node)[:60]}")

    check(tree)

    def ev(node: ast.AST, env: dict[str, float]) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        assert isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
        return float(_FUNCS[node.func.id](*(ev(a, env) for a in node.args)))

    def run(a: np.ndarray) -> float:
        a = np.asarray(a, dtype=float).reshape(-1)
        env = {f"a{i}": float(a[i]) for i in range(dim)}
        env["r"] = float(np.linalg.norm(a))
        return ev(tree, env)

    return run


def _frac(v: float) -> Fraction:
    return Fraction(v)


@dataclass(frozen=True)
class Clock:
    """Piecewise-linear clock ``A`` of a step path.

    Attributes
    ----------
    knots : tuple of Fraction
        Path times ``0 = s_0 < s_1 < ...`` where the slope changes, up to
        ``tau_inf`` when it is finite.
    values : tuple of Fraction
        ``A`` at the knots.
    slopes : tuple of Fraction
        ``1 / g`` on ``[s_i, s_{i+1})``; the last slope applies up to ``tau_inf``.
    tau_inf : float
        First time ``x`` or its left limit is in ``{g = 0}``, capped at ``xi``.
    total : Fraction or float
        ``A`` at ``tau_inf``; ``inf`` when the clock never stops.
    zero_hit_index : int or None
        Index of the first segment in ``{g = 0}``.
    """

    knots: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]
    tau_inf: float
    total: Fraction | float
    zero_hit_index: int | None

    @property
    def hits_infinity(self) -> bool:
        return self.total == math.inf

    def A(self, s: float | Fraction) -> float | Fraction:
        """``A_s``; exact (Fraction) when ``s`` is a Fraction."""
        exact = isinstance(s, Fraction)
        if s < 0:
            raise ValueError("clock is defined for s >= 0")
        if s > self.tau_inf:
            return math.inf
        if s == math.inf:
            return self.total if exact or self.total == math.inf else float(self.total)
        fs = Fraction(s)
        k = _last_le(self.knots, fs)
        val = self.values[k] + self.slopes[k] * (fs - self.knots[k]) if k < len(self.slopes) \
            else self.values[k]
        return val if exact else float(val)

    def tau(self, t: float | Fraction) -> float | Fraction:
        """Generalized inverse ``inf{s : A_s >= t}``; ``tau(inf) = tau_inf``."""
        exact = isinstance(t, Fraction)
        if t < 0:
            raise ValueError("tau is defined for t >= 0")
        if t == math.inf or (self.total != math.inf and t >= self.total):
            if t == math.inf or math.isinf(self.tau_inf):
                return self.tau_inf
            return Fraction(self.tau_inf) if exact else self.tau_inf
        ft = Fraction(t)
        k = _last_le(self.values, ft)
        if k >= len(self.slopes):
            k = len(self.slopes) - 1
        s = self.knots[k] + (ft - self.values[k]) / self.slopes[k]
        return s if exact else float(s)


def _last_le(seq: Sequence[Fraction], v: Fraction) -> int:
    lo, hi = 0, len(seq) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if seq[mid] <= v:
            lo = mid
        else:
            hi = mid - 1
    return lo


def clock(g: GFunction, x: StepPath) -> Clock:
    """The clock ``A^g(x)`` and its stopping data.

    Examples
    --------
    >>> c = clock(GFunction.coordinate(), StepPath([0.0, 1.0], [1.0, 2.0], xi=2.0))
    >>> c.A(2.0)
    1.5
    """
    gv = [g.checked(v) for v in x.values]
    ends = x.segment_ends().tolist()
    starts = x.times.tolist()
    zero = next((i for i, v in enumerate(gv) if v == 0.0), None)
    last = zero if zero is not None else x.n_segments
    knots = [Fraction(0)]
    values = [Fraction(0)]
    slopes: list[Fraction] = []
    for i in range(last):
        slope = 1 / _frac(gv[i])
        slopes.append(slope)
        end = ends[i]
        if math.isinf(end):
            break
        knots.append(_frac(end))
        values.append(values[-1] + slope * (_frac(end) - _frac(starts[i])))
    if zero is not None:
        tau_inf = starts[zero]
        total: Fraction | float = values[-1]
    elif math.isfinite(x.xi):
        tau_inf = x.xi
        total = values[-1]
    else:
        tau_inf = math.inf
        total = math.inf
    if zero == 0:
        slopes = []
    return Clock(tuple(knots), tuple(values), tuple(slopes), tau_inf, total, zero)


def time_change(g: GFunction, x: StepPath) -> StepPath:
    """The time-changed path ``g.x``.

    Segment ``i`` lasts ``duration_i / g(v_i)`` until the first segment in
    ``{g = 0}``, whose value is then held forever.  Without a zero the output
    explodes at ``A_xi`` when ``xi`` is finite.

    Notes
    -----
    The frozen value could in principle be the left limit at ``tau_inf``
    when that limit lies in ``{g = 0}``.  For a step path the left limit at
    ``tau_inf`` is an earlier segment value, where ``g > 0``, so the frozen
    value is always ``x_{tau_inf}``.

    Examples
    --------
    >>> y = time_change(GFunction.constant(2.0), StepPath([0.0, 1.0], [0.0, 1.0]))
    >>> y.times.tolist()
    [0.0, 0.5]
    """
    c = clock(g, x)
    z = c.zero_hit_index
    if z == 0:
        return StepPath([0.0], x.values[:1], math.inf)
    n = z if z is not None else x.n_segments
    times = [float(v) for v in c.values[:n]]
    vals = list(x.values[:n])
    if z is not None:
        times.append(float(c.total))
        vals.append(x.values[z])
        return StepPath(times, np.array(vals), math.inf)
    xi = float(c.total) if math.isfinite(x.xi) else math.inf
    return StepPath(times, np.array(vals), xi)


@dataclass(frozen=True)
class BConditions:
    """The two conditions defining the continuity set of the time change."""

    divergent_after_stop: bool
    left_limit_frozen: bool

    @property
    def holds(self) -> bool:
        return self.divergent_after_stop and self.left_limit_frozen


def b_conditions(g: GFunction, x: StepPath) -> BConditions:
    """Evaluate both continuity-set conditions exactly.

    The first asks that ``int_0^{tau_inf +} ds / g(x_s) = inf`` whenever
    ``tau_inf < xi``; on a step path this holds iff the segment starting at
    ``tau_inf`` has ``g = 0``.  The second asks that when the clock is
    finite at ``tau_inf`` and the left limit there lies in ``S`` and in
    ``{g = 0}``, it equals ``x_{tau_inf}``.
    """
    c = clock(g, x)
    tau = c.tau_inf
    first = True
    if tau < x.xi:
        seg = x.segment_index(tau)
        first = g.checked(x.values[seg]) == 0.0
    second = True
    if c.total != math.inf and 0.0 < tau < math.inf:
        left = x.left_limit(tau)
        if left is not DELTA and g.checked(left) == 0.0:
            here = x(tau)
            second = here is not DELTA and bool(np.array_equal(left, here))
    return BConditions(first, second)


def in_continuity_set(g: GFunction, x: StepPath) -> bool:
    """Whether ``(g, x)`` satisfies both continuity-set conditions."""
    return b_conditions(g, x).holds


def compose_check(g1: GFunction, g2: GFunction, x: StepPath, rtol: float = 1e-12) -> bool:
    """Whether ``g1.(g2.x)`` and ``(g1 g2).x`` coincide.

    Times and explosion times must agree within ``rtol`` (relative, with a
    floor of 1), values exactly.
    """
    a = time_change(g1, time_change(g2, x))
    b = time_change(g1 * g2, x)
    if a.n_segments != b.n_segments or not np.array_equal(a.values, b.values):
        return False
    if math.isinf(a.xi) != math.isinf(b.xi):
        return False
    if math.isfinite(a.xi) and abs(a.xi - b.xi) > rtol * max(1.0, abs(b.xi)):
        return False
    scale = np.maximum(1.0, np.abs(b.times))
    return bool(np.all(np.abs(a.times - b.times) <= rtol * scale))


@dataclass(frozen=True)
class GProfile:
    """Radial rate ``g(a) = phi(d(a, S^Delta minus U))`` in the chordal metric.

    ``phi`` is piecewise linear through ``(0, 0)`` and ``breakpoints``
    (increasing radii, nondecreasing values) and constant beyond the last
    radius.  ``U`` is the open ball with the given center and radius, or all
    of ``R^d`` when ``radius`` is None.

    Attributes
    ----------
    etas : tuple of float
        The time resolutions ``eta_n`` found by the construction (may be empty
        for hand-made profiles).
    """

    dim: int
    breakpoints: tuple[tuple[float, float], ...]
    center: tuple[float, ...] | None = None
    radius: float | None = None
    etas: tuple[float, ...] = ()
    _space: StateSpace = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        bps = tuple((float(r), float(v)) for r, v in self.breakpoints)
        if not bps:
            raise ValueError("a profile needs at least one breakpoint")
        rs = [r for r, _ in bps]
        vs = [v for _, v in bps]
        if rs[0] <= 0.0 or any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("profile radii must be positive and increasing")
        if vs[0] <= 0.0 or any(b < a for a, b in zip(vs, vs[1:])):
            raise ValueError("profile values must be positive and nondecreasing")
        if (self.radius is None) != (self.center is None):
            raise ValueError("give both center and radius of U, or neither")
        if self.radius is not None:
            if not self.radius > 0.0 or len(self.center or ()) != self.dim:
                raise ValueError("U must be a ball of positive radius in the path dimension")
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))  # type: ignore[union-attr]
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "_space", StateSpace(self.dim, "chordal"))

    @property
    def peak(self) -> float:
        return self.breakpoints[-1][1]

    def margin(self, a: np.ndarray) -> float:
        """Chordal distance from ``a`` to the complement of ``U`` in S^Delta."""
        pts = np.asarray(a, dtype=float).reshape(1, -1)
        if self.radius is None:
            return float(self._space.dist_to_delta(pts)[0])
        return float(self._space.dist_to_complement(pts, Ball(self.center, self.radius))[0])

    def phi(self, r: float) -> float:
        rs = [0.0] + [b[0] for b in self.breakpoints]
        vs = [0.0] + [b[1] for b in self.breakpoints]
        return float(np.interp(r, rs, vs))

    def __call__(self, a: np.ndarray) -> float:
        return self.phi(self.margin(a))

    def in_U(self, a: np.ndarray) -> bool:
        return self.margin(a) > 0.0

    def normalized(self) -> "GProfile":
        """The profile scaled so that its maximum is 1 (same zero set)."""
        c = 1.0 / self.peak
        return GProfile(self.dim, tuple((r, v * c) for r, v in self.breakpoints),
                        self.center, self.radius, self.etas)

    def as_gfunction(self) -> GFunction:
        return GFunction(self.__call__, lambda a: not self.in_U(a), self.peak, "radial-profile")

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "breakpoints": [[r, v] for r, v in self.breakpoints],
            "center": None if self.center is None else list(self.center),
            "radius": self.radius,
            "etas": list(self.etas),
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "GProfile":
        extra = set(obj) - {"dim", "breakpoints", "center", "radius", "etas"}
        if extra:
            raise ValueError(f"unexpected profile keys: {sorted(extra)}")
        try:
            center = obj.get("center")
            return cls(int(obj["dim"]), tuple((float(r), float(v)) for r, v in obj["breakpoints"]),
                       None if center is None else tuple(float(c) for c in center),
                       None if obj.get("radius") is None else float(obj["radius"]),
                       tuple(float(e) for e in obj.get("etas", ())))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed profile: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def build_regularizing_g(D: Sequence[StepPath], U: Ball | None = None, n_max: int = 16,
                         j_max: int = 60) -> GProfile:
    """Radial rate function adapted to the finite family ``D``.

    For ``n = 0..n_max``, ``eta_n`` is the largest ``2^-j`` (``j >= 1``, and
    no larger than ``eta_{n-1}``) such that every path of ``D`` has
    ``omega'_{2^n, K, x}(eta_n) < 2^(-n-2)``, where ``K`` is the complement
    of the chordal ball of radius ``2^(-n-2)`` around the cemetery and the
    modulus uses the chordal metric.  The profile then satisfies
    ``phi(2^-n) = 2^-n eta_n``, so ``g <= 2^-n eta_n`` wherever the chordal
    distance to the complement of ``U`` is below ``2^-n``, for ``n <= n_max``.

    Parameters
    ----------
    D : sequence of StepPath
        Nonempty family, all of one dimension.
    U : Ball, optional
        ``U`` is the interior of this ball; ``None`` means all of ``R^d``.
    n_max : int
        Last level of the construction.
    j_max : int
        Finest resolution tried, ``2^-j_max``.

    Raises
    ------
    NotRelativelyCompactError
        If some level admits no resolution down to ``2^-j_max``.

    Notes
    -----
    Any ``h`` with the same zero set and ``h <= C g`` for a constant ``C``
    serves equally well, so :meth:`GProfile.normalized` keeps every
    guarantee.
    """
    if not D:
        raise ValueError("D must be nonempty")
    dim = D[0].dim
    if any(x.dim != dim for x in D):
        raise ValueError("all paths of D must share one dimension")
    if U is not None and U.dim != dim:
        raise ValueError("U has the wrong dimension")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    sphere = StateSpace(dim, "chordal")
    etas: list[float] = []
    j = 1
    for n in range(n_max + 1):
        thr = 2.0 ** (-n - 2)
        K = Ball((0.0,) * dim, chordal_radius_to_norm(thr))
        while not all(omega_prime_below(x, 2.0**n, K, 2.0**-j, thr, sphere) for x in D):
            j += 1
            if j > j_max:
                raise NotRelativelyCompactError(
                    f"no resolution 2^-j with j <= {j_max} meets level {n}; "
                    "the family is not relatively compact at this resolution")
        etas.append(2.0**-j)
    bps = tuple((2.0**-n, 2.0**-n * etas[n]) for n in range(n_max, -1, -1))
    center = None if U is None else U.center
    radius = None if U is None else U.radius
    return GProfile(dim, bps, center, radius, tuple(etas))


@dataclass(frozen=True)
class GlobalizeReport:
    """Membership checks for a time-changed path.

    Attributes
    ----------
    in_local : bool
        The output is a valid step path, hence a locally cadlag path.
    in_global : bool
        The output is cadlag as an S^Delta-valued path on all of ``[0, inf)``.
    explosion_from_U : bool or None
        When ``0 < xi < inf``, whether ``x_{xi-}`` lies in ``U``; None otherwise.
    """

    in_local: bool
    in_global: bool
    explosion_from_U: bool | None


def globalize(x: StepPath, g: GFunction, U: Ball | None = None) -> tuple[StepPath, GlobalizeReport]:
    """``g.x`` with a report on its membership in the local and global path spaces."""
    y = time_change(g, x)
    from_u: bool | None = None
    if math.isfinite(y.xi):
        last = y.values[-1]
        from_u = True if U is None else bool(U.interior_contains(last))
    # A step path has a left limit at xi, so it is cadlag in S^Delta as well.
    return y, GlobalizeReport(True, True, from_u)


def compare_sequence(xs: Sequence[StepPath], x: StepPath, g: GFunction, n_terms: int = 8,
                     space: StateSpace | None = None) -> list[dict[str, float]]:
    """Local and global distances to ``x`` before and after the time change.

    Returns one row per index with the upper ends of the local and global
    metric brackets for ``(x^k, x)`` and for ``(g.x^k, g.x)``.
    """
    from .metrics import global_metric, local_metric
    from .statespace import Exhaustion

    sp = space if space is not None else StateSpace(x.dim, "chordal")
    ex = Exhaustion(x.dim)
    gx = time_change(g, x)
    rows = []
    for k, y in enumerate(xs):
        gy = time_change(g, y)
        rows.append({
            "k": float(k),
            "local_before": local_metric(y, x, ex, n_terms, sp)[1],
            "global_before": global_metric(y, x, n_terms, sp)[1],
            "local_after": local_metric(gy, gx, ex, n_terms, sp)[1],
            "global_after": global_metric(gy, gx, n_terms, sp)[1],
        })
    return rows
