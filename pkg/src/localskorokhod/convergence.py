"""Finite-sample diagnostics for convergence of a sequence of step paths.

A step path has finitely many values, so its range before explosion is
always relatively compact.  Two regimes follow:

* ``xi(x) < inf``: each ``x^k`` must be matched to ``x`` up to ``xi(x)``
  itself, and at the matched time ``x^k`` must be close to the cemetery in
  the chordal metric of ``S^Delta``.
* ``xi(x) = inf``: for every horizon ``t`` the match must cover ``[0, t]``
  while ``x^k`` is still alive at the matched time.

For every index and horizon the report gives the least level at which such
a match exists with a slope cap (``Lambda`` form) and without one
(``Lambda~`` form), together with the exact terms of one optimal capped
warp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .matching import EndRule, MatchProblem
from .metrics import DEFAULT_TOL, search_level, sup_distance, warp_from_points, witness_points
from .paths import StepPath
from .statespace import DELTA, StateSpace
from .warps import TimeWarp, warp_deviation, warp_log_slope

__all__ = [
    "ConvergenceRow",
    "ConvergenceReport",
    "convergence_witness",
]


@dataclass(frozen=True)
class ConvergenceRow:
    """Terms for index ``k`` at horizon ``t`` (``t = xi(x)`` in the explosive regime).

    Attributes
    ----------
    level : float
        Least level for slope-capped warps.
    level_tilde : float
        Least level for uncapped warps.
    warp : TimeWarp or None
        A capped warp attaining ``level`` (None when ``level`` is infinite).
    sup_distance, deviation, log_slope : float
        Exact terms of ``warp`` on the relevant window.
    delta_distance : float or None
        Chordal distance from ``x^k`` at the matched time to the cemetery
        (explosive regime only).
    """

    k: int
    t: float
    level: float
    level_tilde: float
    warp: TimeWarp | None
    sup_distance: float
    deviation: float
    log_slope: float
    delta_distance: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    regime: str
    tol: float
    tail: int
    rows: tuple[ConvergenceRow, ...] = field(repr=False)
    converges_lambda: bool
    converges_tilde: bool

    @property
    def verdict(self) -> str:
        return "converges" if self.converges_lambda and self.converges_tilde else "diverges"


def _explosive_problem(x: StepPath, y: StepPath, sp: StateSpace) -> MatchProblem:
    sphere = StateSpace(x.dim, "chordal")
    D = sp.pairwise(x.values, y.values).tolist()
    to_delta = tuple(float(sphere.dist(w, DELTA)) for w in y.values)
    return MatchProblem(
        x.times.tolist(), x.xi, y.times.tolist(), y.xi, D,
        EndRule((math.inf,) * x.n_segments, at_xi=True),
        EndRule(to_delta, at_xi=True),
    )


def _alive_problem(x: StepPath, y: StepPath, t1: float, sp: StateSpace) -> MatchProblem:
    D = sp.pairwise(x.values, y.values).tolist()
    return MatchProblem(
        x.times.tolist(), x.xi, y.times.tolist(), y.xi, D,
        EndRule((math.inf,) * x.n_segments, threshold=t1, soft=False, clip=t1, at_xi=False),
        EndRule((0.0,) * y.n_segments, at_xi=False),
    )


def _past(x: StepPath, t: float) -> float:
    """A time just after ``t`` with no jump of ``x`` in between."""
    later = [s for s in x.times.tolist() if s > t]
    gap = (later[0] - t) if later else 1.0
    return t + min(gap / 2.0, 1e-6 * max(1.0, t))


def _row(k: int, t: float, x: StepPath, y: StepPath, prob: MatchProblem, t1: float,
         closed: bool, explosive: bool, sp: StateSpace, tol: float) -> ConvergenceRow:
    level = search_level(prob, True, tol)
    level_tilde = search_level(prob, False, tol)
    if not math.isfinite(level):
        return ConvergenceRow(k, t, level, level_tilde, None, math.inf, math.inf, math.inf,
                              math.inf if explosive else None)
    lam = warp_from_points(witness_points(prob, level, True, tol))
    window = t1 if explosive else t
    sup = sup_distance(x, y, lam, window, sp, closed=closed)
    dd = None
    if explosive:
        sphere = StateSpace(x.dim, "chordal")
        dd = float(sphere.dist(y(lam(t1)), DELTA))
    return ConvergenceRow(k, t, level, level_tilde, lam, sup, warp_deviation(lam, window),
                          warp_log_slope(lam, window), dd)


def convergence_witness(xs: Sequence[StepPath], x: StepPath, ts: Sequence[float] = (),
                        tol: float = 1e-3, space: StateSpace | None = None,
                        tail: int | None = None, search_tol: float = DEFAULT_TOL) -> ConvergenceReport:
    """Match every ``x^k`` against ``x`` and judge convergence on the tail.

    Parameters
    ----------
    xs : sequence of StepPath
        The sequence ``x^1, x^2, ...``.
    x : StepPath
        Candidate limit.
    ts : sequence of float
        Horizons to test when ``xi(x) = inf``; ignored otherwise.
    tol : float
        Levels at or below ``tol`` count as small.
    space : StateSpace, optional
    tail : int, optional
        Number of final indices that must all be small; defaults to half
        the sequence, rounded up.

    Returns
    -------
    ConvergenceReport
        ``converges_lambda`` and ``converges_tilde`` hold when every tail
        row has the corresponding level ``<= tol``.

    Examples
    --------
    >>> x = StepPath([0.0, 1.0], [[0.0], [1.0]])
    >>> xs = [StepPath([0.0, 1.0 + 1.0 / k], [[0.0], [1.0]]) for k in range(1, 200)]
    >>> convergence_witness(xs, x, ts=[2.0], tol=0.02).verdict
    'converges'
    """
    if not xs:
        raise ValueError("xs must be nonempty")
    if any(z.dim != x.dim for z in xs):
        raise ValueError("all paths must share the dimension of x")
    sp = space if space is not None else StateSpace(x.dim)
    explosive = math.isfinite(x.xi)
    if not explosive:
        if not ts:
            raise ValueError("ts must be nonempty when x does not explode")
        if any(not (0.0 <= t < math.inf) for t in ts):
            raise ValueError("horizons must be finite and >= 0")
    n = len(xs)
    tail = (n + 1) // 2 if tail is None else tail
    if not 1 <= tail <= n:
        raise ValueError("tail must lie in [1, len(xs)]")
    rows: list[ConvergenceRow] = []
    for k, y in enumerate(xs):
        if explosive:
            rows.append(_row(k, x.xi, x, y, _explosive_problem(x, y, sp), x.xi,
                             False, True, sp, search_tol))
            continue
        for t in ts:
            t1 = _past(x, t)
            rows.append(_row(k, t, x, y, _alive_problem(x, y, t1, sp), t1,
                             True, False, sp, search_tol))
    late = [r for r in rows if r.k >= n - tail]
    return ConvergenceReport(
        "explosive" if explosive else "alive", tol, tail, tuple(rows),
        all(r.level <= tol for r in late), all(r.level_tilde <= tol for r in late),
    )
