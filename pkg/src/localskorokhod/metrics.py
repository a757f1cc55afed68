"""Skorokhod-type distances between step paths.

For a horizon ``t`` and a compact ``K`` the two pseudo-metrics are

``rho_tilde(x, y) = inf max(sup_{s < t1} d(x_s, y_{lambda(s)}), ||lambda - id||_{t1},
pen_x(t1), pen_y(lambda(t1)))``

over increasing bijections ``lambda`` and stop times ``t1 <= xi(x)`` with
``lambda(t1) <= xi(y)``, where ``pen_z(s) = d(z_s, K^c) ^ (t - s)_+`` for
``s < xi(z)`` and 0 at ``s = xi(z)``.  ``rho`` adds ``||log lambda'||_{t1}``
to the max and restricts to bi-Lipschitz warps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matching import EndRule, MatchProblem, feasible
from .paths import StepPath
from .statespace import DELTA, CompactSet, Exhaustion, StateSpace
from .warps import TimeWarp, warp_deviation, warp_log_slope

__all__ = [
    "rho_tilde",
    "rho",
    "rho_witness",
    "search_level",
    "sup_distance",
    "warp_from_points",
    "warp_objective",
    "local_metric",
    "global_rho",
    "global_metric",
]

DEFAULT_TOL = 1e-10


def _space(x: StepPath, space: StateSpace | None) -> StateSpace:
    return space if space is not None else StateSpace(x.dim)


def _check_pair(x: StepPath, y: StepPath, t: float) -> None:
    if x.dim != y.dim:
        raise ValueError("paths have different dimensions")
    if not t >= 0.0:
        raise ValueError("t must be >= 0")


def _problem(x: StepPath, y: StepPath, t: float, K: CompactSet, sp: StateSpace) -> MatchProblem:
    D = sp.pairwise(x.values, y.values).tolist()
    px = tuple(sp.dist_to_complement(x.values, K).tolist())
    py = tuple(sp.dist_to_complement(y.values, K).tolist())
    return MatchProblem(
        x.times.tolist(), x.xi, y.times.tolist(), y.xi, D,
        EndRule(px, threshold=t, soft=True, clip=t),
        EndRule(py, threshold=t, soft=True, clip=t),
    )


def _global_problem(x: StepPath, y: StepPath, t: float, sp: StateSpace) -> MatchProblem:
    """Problem for the S^Delta-valued paths, which sit at DELTA after xi forever."""

    def extend(z: StepPath) -> tuple[list[float], list[object]]:
        times = z.times.tolist()
        vals: list[object] = list(z.values)
        if math.isfinite(z.xi):
            times.append(z.xi)
            vals.append(DELTA)
        return times, vals

    tx, vx = extend(x)
    ty, vy = extend(y)
    D = [[sp.dist(a, b) for b in vy] for a in vx]
    inf_x = (math.inf,) * len(tx)
    inf_y = (math.inf,) * len(ty)
    return MatchProblem(
        tx, math.inf, ty, math.inf, D,
        EndRule(inf_x, threshold=t, soft=True, clip=t),
        EndRule(inf_y, threshold=t, soft=True, clip=t),
    )


def _upper_start(prob: MatchProblem, t: float) -> float:
    # Stopping at the origin is always admissible.
    return max(min(prob.rule_x.penalty[0], t), min(prob.rule_y.penalty[0], t))


def _search(prob: MatchProblem, t: float, capped: bool, tol: float) -> float:
    def ok(eps: float) -> bool:
        c = math.exp(eps) if capped else math.inf
        return feasible(prob, eps, c)

    if ok(0.0):
        return 0.0
    hi = _upper_start(prob, t)
    lo = 0.0
    probe = hi / 1024.0
    while probe < hi:
        if ok(probe):
            hi = probe
            break
        lo = probe
        probe *= 4.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def search_level(prob: MatchProblem, capped: bool, tol: float = DEFAULT_TOL,
                 ceiling: float = 1e6) -> float:
    """Least feasible level of an arbitrary matching problem, ``inf`` above ``ceiling``."""

    def ok(eps: float) -> bool:
        return feasible(prob, eps, math.exp(min(eps, 700.0)) if capped else math.inf)

    if ok(0.0):
        return 0.0
    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > ceiling:
            return math.inf
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def witness_points(prob: MatchProblem, level: float, capped: bool,
                   tol: float = DEFAULT_TOL) -> list[tuple[float, float]]:
    """Corner points of a curve feasible at ``level`` (nudged up if rounding bites)."""
    eps = level
    for _ in range(60):
        ok, pts = feasible(prob, eps, math.exp(min(eps, 700.0)) if capped else math.inf,
                           witness=True)
        if ok:
            return pts
        eps = eps * 2.0 + tol
    raise RuntimeError("no witness found above a feasible level")


def rho_tilde(x: StepPath, y: StepPath, t: float, K: CompactSet,
              space: StateSpace | None = None, tol: float = DEFAULT_TOL) -> float:
    """Deviation-only distance ``rho_tilde_{t,K}(x, y)``.

    Parameters
    ----------
    x, y : StepPath
    t : float
        Horizon, ``>= 0``.
    K : CompactSet
    space : StateSpace, optional
        Defaults to the truncated Euclidean metric.
    tol : float
        Absolute bisection tolerance; the result is an upper bound within
        ``tol`` of the exact value.

    Returns
    -------
    float

    Examples
    --------
    >>> from localskorokhod.statespace import Ball
    >>> x = StepPath([0.0, 1.0], [0.0, 1.0])
    >>> y = StepPath([0.0, 1.1], [0.0, 1.0])
    >>> round(rho_tilde(x, y, 3.0, Ball([0.0], 50.0)), 8)
    0.1
    """
    _check_pair(x, y, t)
    sp = _space(x, space)
    return _search(_problem(x, y, t, K, sp), t, False, tol)


def rho(x: StepPath, y: StepPath, t: float, K: CompactSet,
        space: StateSpace | None = None, tol: float = DEFAULT_TOL) -> float:
    """Distance ``rho_{t,K}(x, y)`` with the log-slope penalty on warps.

    The infimum runs over piecewise-linear warps; optimal curves bend only
    where they cross jump times, so this is the infimum over all
    bi-Lipschitz warps.
    """
    _check_pair(x, y, t)
    sp = _space(x, space)
    return _search(_problem(x, y, t, K, sp), t, True, tol)


def global_rho(x: StepPath, y: StepPath, t: float, space: StateSpace | None = None,
               tol: float = DEFAULT_TOL) -> float:
    """``rho_{t, S^Delta}`` between the paths seen as S^Delta-valued and never exploding."""
    _check_pair(x, y, t)
    sp = _space(x, space)
    return _search(_global_problem(x, y, t, sp), t, True, tol)


@dataclass(frozen=True)
class Witness:
    """A warp and stop time certifying an upper bound on ``rho``."""

    value: float
    warp: TimeWarp
    stop: float


def rho_witness(x: StepPath, y: StepPath, t: float, K: CompactSet,
                space: StateSpace | None = None, tol: float = DEFAULT_TOL,
                capped: bool = True) -> Witness:
    """Optimal level together with a warp and stop time attaining it (up to ``tol``)."""
    _check_pair(x, y, t)
    sp = _space(x, space)
    prob = _problem(x, y, t, K, sp)
    value = _search(prob, t, capped, tol)
    pts = witness_points(prob, value, capped, tol)
    return Witness(value, warp_from_points(pts), pts[-1][0])


def warp_from_points(pts: list[tuple[float, float]]) -> TimeWarp:
    """Piecewise-linear warp through matched corner points, slope 1 afterwards."""
    bps = [(0.0, 0.0)]
    for s, u in pts:
        if s > bps[-1][0] and u > bps[-1][1]:
            bps.append((s, u))
    return TimeWarp(bps)


def warp_objective(x: StepPath, y: StepPath, lam: TimeWarp, t1: float, t: float,
                   K: CompactSet, space: StateSpace | None = None, log_slope: bool = True) -> float:
    """Exact cost of a given warp and stop time in the ``rho`` (or ``rho_tilde``) objective."""
    sp = _space(x, space)
    t2 = lam(t1)
    if t1 > x.xi or t2 > y.xi:
        return math.inf
    cost = max(sup_distance(x, y, lam, t1, sp), warp_deviation(lam, t1))
    if log_slope:
        cost = max(cost, warp_log_slope(lam, t1))
    cost = max(cost, _penalty(x, t1, t, K, sp), _penalty(y, t2, t, K, sp))
    return cost


def sup_distance(x: StepPath, y: StepPath, lam: TimeWarp, t1: float,
                 space: StateSpace | None = None, closed: bool = False) -> float:
    """``sup_{s < t1} d(x_s, y_{lambda(s)})`` (``s <= t1`` if ``closed``), exactly.

    The composite is a step function whose pieces start at jump times of
    ``x`` or at preimages of jump times of ``y``, so those knots suffice.
    """
    sp = _space(x, space)
    t2 = lam(t1)
    inv = lam.inverse()
    knots = {0.0}
    knots.update(s for s in x.times.tolist() if s < t1)
    knots.update(inv(s) for s in y.times.tolist() if s < t2)
    if closed:
        knots.add(t1)
    sup = 0.0
    for s in sorted(knots):
        if s > t1 or (s == t1 and not closed):
            break
        sup = max(sup, sp.dist(x(s), y(lam(s))))
    return sup


def _penalty(z: StepPath, s: float, t: float, K: CompactSet, sp: StateSpace) -> float:
    if s >= z.xi:
        return 0.0
    v = z(s)
    margin = float(sp.dist_to_complement(np.reshape(v, (1, -1)), K)[0])
    return min(margin, max(t - s, 0.0))


def local_metric(x: StepPath, y: StepPath, exhaustion: Exhaustion, n_terms: int,
                 space: StateSpace | None = None, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Bracket ``[lower, upper]`` for ``sum_n 2^-n min(rho_{n, K_n}(x, y), 1)``.

    Terms ``n = 0, ..., n_terms - 1`` are summed exactly; the remaining terms
    add at most ``2^(-n_terms + 1)``.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    _check_pair(x, y, 0.0)
    sp = _space(x, space)
    total = 0.0
    for n in range(n_terms):
        prob = _problem(x, y, float(n), exhaustion(n), sp)
        if not feasible(prob, 1.0, math.e):
            term = 1.0
        else:
            term = _search(prob, float(n), True, tol)
        total += 2.0 ** (-n) * min(term, 1.0)
    return total, total + 2.0 ** (-n_terms + 1)


def global_metric(x: StepPath, y: StepPath, n_terms: int, space: StateSpace | None = None,
                  tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Bracket for ``sum_n 2^-n min(rho_{n, S^Delta}(x, y), 1)`` on S^Delta-valued paths."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    _check_pair(x, y, 0.0)
    sp = _space(x, space)
    total = 0.0
    for n in range(n_terms):
        prob = _global_problem(x, y, float(n), sp)
        if not feasible(prob, 1.0, math.e):
            term = 1.0
        else:
            term = _search(prob, float(n), True, tol)
        total += 2.0 ** (-n) * min(term, 1.0)
    return total, total + 2.0 ** (-n_terms + 1)
