"""Compactness curves and Monte-Carlo tightness diagnostics.

Three families of statistics are provided:

* :func:`compactness_report`: ``delta -> sup_{x in D} omega'_{t,K,x}(delta)``
  for a finite family ``D``;
* :func:`tightness_statistic`: estimates of ``P(omega'_{t,K,X}(delta) >= eps)``
  per sampler, and their supremum;
* :func:`aldous_statistic`: estimates of ``P(R >= eps)`` for stopping-time
  triples built from the hitting times of :func:`hitting_stopping_times`.
  The supremum over all stopping times is not computable, so the reported
  value is a lower bound labeled ``restricted-alpha lower bound``.

Every sample ``i`` of sampler ``k`` draws from its own stream
``SeedSequence([seed, k, i])``, so results do not depend on ``jobs``.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .modulus import omega_prime
from .paths import StepPath, exit_time
from .serialization import path_from_dict, path_to_dict, render_csv
from .sim import JumpSpec, levy_step_path
from .statespace import Ball, Box, CompactSet, StateSpace

__all__ = [
    "SAMPLER_KINDS",
    "EnsembleSampler",
    "CompactnessCurve",
    "compactness_report",
    "accumulating_family",
    "refinement_family",
    "hitting_stopping_times",
    "r_statistic",
    "TightnessRow",
    "TightnessReport",
    "half_width",
    "tightness_statistic",
    "aldous_statistic",
    "DEFAULT_PATTERNS",
]

SAMPLER_KINDS = ("fixed", "levy", "single-jump", "two-jump", "dead", "custom")

# z-score of the two-sided 95% normal interval.
Z95 = 1.959963984540054


@dataclass(frozen=True)
class EnsembleSampler:
    """A seeded generator of step paths.

    Parameters
    ----------
    label : str
    kind : str
        ``fixed`` (``path``: path mapping), ``levy`` (:class:`JumpSpec`
        fields), ``single-jump`` (``size``, ``horizon``: one jump at a uniform
        time), ``two-jump`` (``size``, ``gap``, ``horizon``: jumps at ``U``
        and ``U + gap``), ``dead`` (explodes at time 0) or ``custom``.
    params : mapping
        Kind-specific parameters, kept for reports.
    generator : callable, optional
        ``Generator -> StepPath | None`` for the ``custom`` kind.  Custom
        samplers cannot be shipped to worker processes.

    Notes
    -----
    A path exploding at time 0 has no step representation and is returned
    as ``None``.
    """

    label: str
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    generator: Callable[[np.random.Generator], StepPath | None] | None = None

    def __post_init__(self) -> None:
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"sampler kind must be one of {SAMPLER_KINDS}")
        if (self.kind == "custom") != (self.generator is not None):
            raise ValueError("a generator is required exactly for the custom kind")
        p = dict(self.params)
        if self.kind == "fixed":
            _keys(p, {"path"}, {"path"})
            object.__setattr__(self, "_fixed", path_from_dict(p["path"]))
        elif self.kind == "levy":
            object.__setattr__(self, "_jump", JumpSpec.from_dict(p))
        elif self.kind == "single-jump":
            _keys(p, {"size", "horizon"}, {"size", "horizon"})
            if not float(p["horizon"]) > 0.0:
                raise ValueError("horizon must be > 0")
        elif self.kind == "two-jump":
            _keys(p, {"size", "gap", "horizon"}, {"size", "gap", "horizon"})
            if not (float(p["horizon"]) > 0.0 and float(p["gap"]) > 0.0):
                raise ValueError("horizon and gap must be > 0")
        elif self.kind == "dead":
            _keys(p, set(), set())

    @classmethod
    def fixed(cls, label: str, path: StepPath) -> "EnsembleSampler":
        return cls(label, "fixed", {"path": path_to_dict(path)})

    @classmethod
    def levy(cls, label: str, spec: JumpSpec) -> "EnsembleSampler":
        return cls(label, "levy", {
            "intensity": spec.intensity, "horizon": spec.horizon, "jump": spec.jump,
            "scale": spec.scale, "clamp": spec.clamp, "x0": list(spec.x0)})

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "EnsembleSampler":
        extra = set(obj) - {"label", "kind", "params"}
        if extra:
            raise ValueError(f"unexpected sampler keys: {sorted(extra)}")
        if obj.get("kind") == "custom":
            raise ValueError("custom samplers cannot be configured from data")
        return cls(str(obj.get("label", obj.get("kind"))), str(obj.get("kind")),
                   dict(obj.get("params", {})))

    def sample(self, seed: int | np.random.SeedSequence) -> StepPath | None:
        rng = np.random.default_rng(seed)
        if self.kind == "fixed":
            return self._fixed  # type: ignore[attr-defined]
        if self.kind == "levy":
            return levy_step_path(self._jump, rng)  # type: ignore[attr-defined]
        if self.kind == "dead":
            return None
        if self.kind == "custom":
            assert self.generator is not None
            return self.generator(rng)
        size = float(self.params["size"])
        horizon = float(self.params["horizon"])
        u = float(rng.uniform(0.0, horizon))
        if u == 0.0:
            u = horizon / 2.0
        if self.kind == "single-jump":
            return StepPath([0.0, u], [0.0, size])
        return StepPath([0.0, u, u + float(self.params["gap"])], [0.0, size, 0.0])


def _keys(p: Mapping[str, Any], allowed: set[str], required: set[str]) -> None:
    extra = set(p) - allowed
    if extra:
        raise ValueError(f"unexpected sampler parameters: {sorted(extra)}")
    missing = required - set(p)
    if missing:
        raise ValueError(f"missing sampler parameters: {sorted(missing)}")


def _stream(seed: int, k: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(k), int(i)])


def region_label(K: CompactSet | None) -> str:
    if K is None:
        return "S"
    if isinstance(K, Ball):
        c = ",".join(repr(float(v)) for v in K.center)
        return f"ball(center=[{c}];radius={float(K.radius)!r})"
    if isinstance(K, Box):
        lo = ",".join(repr(float(v)) for v in K.lo)
        hi = ",".join(repr(float(v)) for v in K.hi)
        return f"box(lo=[{lo}];hi=[{hi}])"
    return type(K).__name__


@dataclass(frozen=True)
class CompactnessCurve:
    """``delta -> sup_{x in D} omega'_{t,K,x}(delta)`` on a grid."""

    t: float
    region: str
    deltas: tuple[float, ...]
    values: tuple[float, ...]
    tol: float

    @property
    def relatively_compact(self) -> bool:
        """Whether the value at the smallest ``delta`` is at most ``tol``."""
        k = int(np.argmin(self.deltas))
        return self.values[k] <= self.tol

    @property
    def verdict(self) -> str:
        if self.relatively_compact:
            return "relatively compact at resolution"
        return "not relatively compact at resolution"


def compactness_report(D: Sequence[StepPath], t_list: Sequence[float], K_list: Sequence[CompactSet],
                       delta_grid: Sequence[float], tol: float = 1e-3,
                       space: StateSpace | None = None) -> list[CompactnessCurve]:
    """One curve per ``(t, K)`` pair, ``t`` varying slowest.

    Examples
    --------
    >>> x = StepPath([0.0, 0.5], [0.0, 1.0])
    >>> c = compactness_report([x], [1.0], [Box([-2.0], [2.0])], [0.75, 0.25])[0]
    >>> c.values
    (1.0, 0.0)
    """
    if not D:
        raise ValueError("D must be nonempty")
    if not delta_grid:
        raise ValueError("delta_grid must be nonempty")
    if any(not d > 0.0 for d in delta_grid):
        raise ValueError("grid values must be > 0")
    curves = []
    for t in t_list:
        for K in K_list:
            vals = tuple(max(omega_prime(x, t, K, d, space) for x in D) for d in delta_grid)
            curves.append(CompactnessCurve(float(t), region_label(K), tuple(map(float, delta_grid)),
                                           vals, tol))
    return curves


def accumulating_family(n_max: int = 50) -> list[StepPath]:
    """Unit jumps at times ``1/n``, ``n = 1..n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [StepPath([0.0, 1.0 / n], [0.0, 1.0]) for n in range(1, n_max + 1)]


def refinement_family(f: Callable[[float], float], m_max: int, horizon: float = 1.0) -> list[StepPath]:
    """Discretizations of ``f`` on ``[0, horizon]`` at steps ``horizon * 2^-m``, ``m <= m_max``.

    Each path holds ``f(k h)`` on ``[k h, (k + 1) h)`` and ``f(horizon)``
    from ``horizon`` on.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    out = []
    for m in range(m_max + 1):
        n = 2**m
        times = [horizon * k / n for k in range(n + 1)]
        out.append(StepPath(times, [float(f(s)) for s in times]))
    return out


def hitting_stopping_times(x: StepPath | None, eps: float, t: float,
                           U: CompactSet | None = None,
                           space: StateSpace | None = None) -> list[float]:
    """The hitting sequence ``tau_0 = 0 <= tau_1 <= ...``, without repeats.

    ``tau_{n+1}`` is the first ``s > tau_n`` at which ``x_s`` or ``x_{s-}``
    is at distance ``>= eps`` from ``x_{tau_n}``, capped at
    ``(t + 2) ^ tau^U``.  On a step path ``x_{s-}`` only takes values already
    seen as ``x_s``, so only jump times can trigger.  The list ends at the
    cap, where the sequence becomes stationary.  A path dead from time 0
    gives ``[0.0]``.

    Examples
    --------
    >>> hitting_stopping_times(StepPath([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]), 0.5, 5.0)
    [0.0, 1.0, 2.0, 7.0]
    """
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if x is None:
        return [0.0]
    sp = space if space is not None else StateSpace(x.dim)
    cap = min(t + 2.0, exit_time(x, U))
    out = [0.0]
    if cap == 0.0:
        return out
    times = x.times.tolist()
    anchor = x.values[0]
    for i in range(1, len(times)):
        s = times[i]
        if s >= cap:
            break
        if sp.dist(anchor, x.values[i]) >= eps:
            out.append(s)
            anchor = x.values[i]
    out.append(cap)
    return out


def _seg(times: list[float], s: float, left: bool) -> int:
    """Index of the segment holding ``x_s`` (``x_{s-}`` if ``left``)."""
    return (bisect_left if left else bisect_right)(times, s) - 1


def _r_cases(xi: float, t1: float, t2: float, t3: float,
             d: Callable[[float, bool, float], float]) -> float:
    """``R`` from ``d(s, left, u) = d(x_s or x_{s-}, x_u)`` for ``s, u < xi``."""
    if t1 == xi:
        return 0.0
    if t1 == 0.0:
        if t2 == xi:
            return math.inf
        return d(t1, False, t2)
    if t2 == t3:
        return 0.0
    # From here 0 < t1 <= t2 < t3 <= xi.
    d12 = d(t1, False, t2) if t1 < t2 else d(t2, True, t2)
    if t3 < xi:
        return min(d12, d(t2, False, t3))
    return d12


def r_statistic(x: StepPath | None, t1: float, t2: float, t3: float,
                space: StateSpace | None = None) -> float:
    """The oscillation ``R`` of a triple ``t1 <= t2 <= t3``, case by case.

    A path dead from time 0 (``None``) has ``t1 = xi = 0``, so ``R = 0``.

    Examples
    --------
    >>> x = StepPath([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])
    >>> r_statistic(x, 0.5, 1.0, 2.0)
    1.0
    >>> r_statistic(x, 1.0, 1.0, 2.0)
    1.0
    """
    if not t1 <= t2 <= t3:
        raise ValueError("need t1 <= t2 <= t3")
    if t1 < 0.0:
        raise ValueError("times must be >= 0")
    if x is None:
        return 0.0
    if t3 > x.xi:
        raise ValueError("stopping times must not exceed xi")
    sp = space if space is not None else StateSpace(x.dim)

    def d(s: float, left: bool, u: float) -> float:
        return sp.dist(x.left_limit(s) if left else x(s), x(u))

    return _r_cases(x.xi, t1, t2, t3, d)


def _r_table(x: StepPath, sp: StateSpace) -> Callable[[float, float, float], float]:
    """``R`` evaluator backed by the matrix of distances between segment values."""
    times = x.times.tolist()
    D = sp.pairwise(x.values, x.values).tolist()

    def d(s: float, left: bool, u: float) -> float:
        return D[_seg(times, s, left)][_seg(times, u, False)]

    return lambda t1, t2, t3: _r_cases(x.xi, t1, t2, t3, d)


# (n, p, q): tau_1 from index n, tau_2 from n + p, tau_3 from n + p + q.
DEFAULT_PATTERNS: tuple[tuple[int, int, int], ...] = tuple(
    (n, p, q) for n in range(6) for p in (0, 1) for q in (1, 2))


def alpha_triples(hits: Sequence[float], delta: float, t: float, tau_u: float,
                  patterns: Iterable[tuple[int, int, int]] = DEFAULT_PATTERNS
                  ) -> list[tuple[float, float, float]]:
    """Stopping-time triples ``tau_3 <= (tau_1 + delta) ^ t ^ tau^U`` from a hitting sequence.

    Indices past the end of ``hits`` reuse its last entry (the sequence is
    stationary there).
    """
    last = len(hits) - 1
    out = []
    for n, p, q in patterns:
        h1 = hits[min(n, last)]
        h2 = hits[min(n + p, last)]
        h3 = hits[min(n + p + q, last)]
        t1 = min(h1, t, tau_u)
        cap = min(t1 + delta, t, tau_u)
        out.append((t1, min(h2, cap), min(h3, cap)))
    return out


@dataclass(frozen=True)
class TightnessRow:
    sampler_label: str
    epsilon: float
    t: float
    region: str
    delta: float
    estimate: float
    half_width: float
    n_mc: int


CSV_HEADER = ("sampler_label", "epsilon", "t", "region", "delta", "estimate", "half_width", "n_mc")


@dataclass(frozen=True)
class TightnessReport:
    """Estimated probabilities on a grid, per sampler and their supremum.

    Rows labeled ``sup`` carry the largest estimate over samplers (and, for
    the stopping-time statistic, over triple patterns) with the half-width of
    the maximizing estimate.
    """

    statistic: str
    rows: tuple[TightnessRow, ...]
    z: float = Z95
    caveat: str = ""

    def sup_curve(self) -> list[TightnessRow]:
        return [r for r in self.rows if r.sampler_label == "sup"]

    def to_csv(self) -> str:
        return render_csv(CSV_HEADER, ((r.sampler_label, r.epsilon, r.t, r.region, r.delta,
                                        r.estimate, r.half_width, r.n_mc) for r in self.rows))


def half_width(p: float, n: int, z: float = Z95) -> float:
    """Normal-approximation half-width ``z sqrt(p (1 - p) / n)``.

    >>> round(half_width(0.5, 10000), 6)
    0.0098
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return z * math.sqrt(p * (1.0 - p) / n)


def _omega_task(args: tuple) -> np.ndarray:
    sampler, k, seed, lo, hi, t, K, eps, deltas, space = args
    out = np.zeros((hi - lo, len(deltas)), dtype=bool)
    for row, i in enumerate(range(lo, hi)):
        x = sampler.sample(_stream(seed, k, i))
        if x is None:
            continue
        sp = space if space is not None else StateSpace(x.dim)
        for c, d in enumerate(deltas):
            out[row, c] = omega_prime(x, t, K, d, sp) >= eps
    return out


def _alpha_task(args: tuple) -> np.ndarray:
    sampler, k, seed, lo, hi, t, U, eps, deltas, patterns, space = args
    out = np.zeros((hi - lo, len(deltas), len(patterns)), dtype=bool)
    for row, i in enumerate(range(lo, hi)):
        x = sampler.sample(_stream(seed, k, i))
        if x is None:
            continue
        sp = space if space is not None else StateSpace(x.dim)
        hits = hitting_stopping_times(x, eps, t, U, sp)
        tau_u = exit_time(x, U)
        r_of = _r_table(x, sp)
        seen: dict[tuple[float, float, float], bool] = {}
        for c, d in enumerate(deltas):
            for j, tri in enumerate(alpha_triples(hits, d, t, tau_u, patterns)):
                got = seen.get(tri)
                if got is None:
                    got = seen[tri] = r_of(*tri) >= eps
                out[row, c, j] = got
    return out


def _run(task: Callable[[tuple], np.ndarray], jobs_args: list[tuple], jobs: int) -> list[np.ndarray]:
    if jobs <= 1 or len(jobs_args) <= 1:
        return [task(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, jobs_args))


def _chunks(n: int, jobs: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(n / max(jobs, 1)))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _check_grid(delta_grid: Sequence[float], n_mc: int, eps: float, samplers: Sequence[Any]) -> None:
    if not samplers:
        raise ValueError("need at least one sampler")
    if not delta_grid or any(not d > 0.0 for d in delta_grid):
        raise ValueError("delta_grid must be nonempty with values > 0")
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    if not eps > 0.0:
        raise ValueError("eps must be > 0")


def tightness_statistic(P_list: Sequence[EnsembleSampler], t: float, K: CompactSet, eps: float,
                        delta_grid: Sequence[float], n_mc: int, seed: int,
                        space: StateSpace | None = None, jobs: int = 1) -> TightnessReport:
    """Estimates of ``P(omega'_{t,K,X}(delta) >= eps)`` on the grid.

    The same samples serve every ``delta``, so per-sample indicators are
    monotone in ``delta`` and so are the estimates.
    """
    _check_grid(delta_grid, n_mc, eps, P_list)
    deltas = [float(d) for d in delta_grid]
    region = region_label(K)
    rows: list[TightnessRow] = []
    best: list[tuple[float, float]] = [(-1.0, 0.0)] * len(deltas)
    for k, sampler in enumerate(P_list):
        args = [(sampler, k, seed, lo, hi, t, K, eps, deltas, space) for lo, hi in _chunks(n_mc, jobs)]
        hits = np.concatenate(_run(_omega_task, args, jobs), axis=0)
        for c, d in enumerate(deltas):
            p = float(hits[:, c].mean())
            hw = half_width(p, n_mc)
            rows.append(TightnessRow(sampler.label, eps, t, region, d, p, hw, n_mc))
            if p > best[c][0]:
                best[c] = (p, hw)
    for c, d in enumerate(deltas):
        rows.append(TightnessRow("sup", eps, t, region, d, best[c][0], best[c][1], n_mc))
    return TightnessReport("omega-prime", tuple(rows))


def aldous_statistic(P_list: Sequence[EnsembleSampler], eps: float, t: float, U: CompactSet | None,
                     delta_grid: Sequence[float], n_mc: int, seed: int,
                     space: StateSpace | None = None, jobs: int = 1,
                     patterns: Sequence[tuple[int, int, int]] = DEFAULT_PATTERNS) -> TightnessReport:
    """Restricted stopping-time statistic, a lower bound for the full supremum.

    For each pattern ``(n, p, q)`` the triple is ``tau_1 = T_n ^ t ^ tau^U``,
    ``tau_2 = T_{n+p} ^ (tau_1 + delta) ^ t ^ tau^U`` and
    ``tau_3 = T_{n+p+q} ^ (tau_1 + delta) ^ t ^ tau^U``, with ``T`` the
    hitting sequence at level ``eps``.  Each pattern is a genuine triple of
    stopping times, so the largest estimated ``P(R >= eps)`` over patterns
    and samplers bounds the supremum from below.
    """
    _check_grid(delta_grid, n_mc, eps, P_list)
    pats = [tuple(p) for p in patterns]
    if not pats or any(len(p) != 3 or min(p) < 0 for p in pats):
        raise ValueError("patterns must be nonempty triples of nonnegative integers")
    deltas = [float(d) for d in delta_grid]
    region = region_label(U)
    rows: list[TightnessRow] = []
    best: list[tuple[float, float]] = [(-1.0, 0.0)] * len(deltas)
    for k, sampler in enumerate(P_list):
        args = [(sampler, k, seed, lo, hi, t, U, eps, deltas, pats, space)
                for lo, hi in _chunks(n_mc, jobs)]
        hits = np.concatenate(_run(_alpha_task, args, jobs), axis=0)
        for c, d in enumerate(deltas):
            probs = hits[:, c, :].mean(axis=0)
            j = int(np.argmax(probs))
            p = float(probs[j])
            hw = half_width(p, n_mc)
            rows.append(TightnessRow(sampler.label, eps, t, region, d, p, hw, n_mc))
            if p > best[c][0]:
                best[c] = (p, hw)
    for c, d in enumerate(deltas):
        rows.append(TightnessRow("sup", eps, t, region, d, best[c][0], best[c][1], n_mc))
    return TightnessReport("restricted-alpha", tuple(rows),
                           caveat="restricted-alpha lower bound: supremum over hitting-time "
                                  "triples only, not over all stopping times")
