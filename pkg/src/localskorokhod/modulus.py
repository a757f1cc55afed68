"""Moduli of continuity for step paths.

``omega_prime(x, t, K, delta)`` is the smallest achievable maximal
oscillation over subdivisions ``0 = t_0 < ... < t_N <= xi`` whose pieces
are longer than ``delta`` and whose last point leaves ``[0, t] x K``
(``t_N > t``, ``x_{t_N}`` outside ``K``, or ``t_N = xi``).

Cuts are floats and a piece ``[a, b)`` is admissible when ``b > a + delta``
in floating point.  A cut forced by the mesh alone sits one ulp past
``a + delta``, so a jump exactly ``delta`` after a cut cannot be isolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .paths import StepPath
from .statespace import CompactSet, StateSpace

__all__ = [
    "OmegaResult",
    "omega_prime",
    "omega_prime_subdivision",
    "omega_prime_below",
    "omega_prime_oracle",
    "subdivision_cost",
    "omega_double_prime",
    "omega_plain",
]


@dataclass(frozen=True)
class OmegaResult:
    """Optimal value and one subdivision attaining it (empty when infeasible)."""

    value: float
    subdivision: tuple[float, ...]


def _default_space(x: StepPath, space: StateSpace | None) -> StateSpace:
    return space if space is not None else StateSpace(x.dim)


class _Layout:
    """Segment data shared by the feasibility checks."""

    def __init__(self, x: StepPath, K: CompactSet, space: StateSpace) -> None:
        if K.dim != x.dim:
            raise ValueError("compact set and path have different dimensions")
        self.m = x.n_segments
        self.starts = x.times.tolist()
        self.ends = x.segment_ends().tolist()
        self.xi = x.xi
        self.inside = K.contains_many(x.values).tolist()
        self.dist = space.pairwise(x.values, x.values)

    def reach(self, eps: float, strict: bool) -> list[int]:
        """``k(j)``: the largest k with all values j..k pairwise within eps."""
        m, D = self.m, self.dist
        out = [0] * m
        k = 0
        for j in range(m):
            k = max(k, j)
            while k + 1 < m:
                col = D[j:k + 1, k + 1]
                worst = float(col.max())
                if (worst < eps) if strict else (worst <= eps):
                    k += 1
                else:
                    break
            out[j] = k
        return out


def _first_cut(lo: float, start: float) -> float:
    """Earliest float cut past ``lo`` inside a segment beginning at ``start``."""
    return start if start > lo else math.nextafter(lo, math.inf)


def _terminal(lay: _Layout, p: float, j: int, k: int, t: float, delta: float) -> float | None:
    """A terminal time for a last piece starting at ``p`` in segment ``j``, or None."""
    lo = p + delta
    ek = lay.ends[k]
    if k == lay.m - 1 and math.isfinite(lay.xi) and lo < lay.xi:
        return lay.xi
    base = max(lo, t)
    if base < ek:
        # Cutting at the next jump keeps the piece inside segments j..k.
        return ek if math.isfinite(ek) else base + 1.0
    for jj in range(j, k + 1):
        if not lay.inside[jj]:
            pos = _first_cut(lo, lay.starts[jj])
            if pos < lay.ends[jj]:
                return pos
    if k + 1 < lay.m and not lay.inside[k + 1] and lay.starts[k + 1] > lo:
        return lay.starts[k + 1]
    return None


def _feasible(lay: _Layout, t: float, delta: float, eps: float, strict: bool,
              want_path: bool = False) -> tuple[bool, tuple[float, ...]]:
    m = lay.m
    reach = lay.reach(eps, strict)
    pos = [math.inf] * m
    parent = [-1] * m
    pos[0] = 0.0
    for j in range(m):
        p = pos[j]
        if p == math.inf:
            continue
        k = reach[j]
        end = _terminal(lay, p, j, k, t, delta)
        if end is not None:
            if not want_path:
                return True, ()
            chain = [end]
            jj = j
            while jj >= 0:
                chain.append(pos[jj])
                jj = parent[jj]
            return True, tuple(reversed(chain))
        lo = p + delta
        for jj in range(j + 1, k + 1):
            q = _first_cut(lo, lay.starts[jj])
            if q < lay.ends[jj] and q < pos[jj]:
                pos[jj] = q
                parent[jj] = j
        if k + 1 < m and lay.starts[k + 1] > lo and lay.starts[k + 1] < pos[k + 1]:
            pos[k + 1] = lay.starts[k + 1]
            parent[k + 1] = j
    return False, ()


def omega_prime_subdivision(x: StepPath, t: float, K: CompactSet, delta: float,
                            space: StateSpace | None = None) -> OmegaResult:
    """Exact modulus with a subdivision attaining it.

    Parameters
    ----------
    x : StepPath
    t : float
        Time horizon, ``>= 0``.
    K : CompactSet
        Closed set the subdivision must leave.
    delta : float
        Pieces must be longer than ``delta``, ``> 0``.
    space : StateSpace, optional
        Metric; defaults to the truncated Euclidean metric.

    Returns
    -------
    OmegaResult
        ``value = inf`` with an empty subdivision when no admissible
        subdivision exists.

    Notes
    -----
    Feasibility at a level ``eps`` is a forward sweep over segments that
    keeps the earliest reachable cut inside each segment; the optimum is the
    least feasible level among the pairwise value distances.
    """
    if not delta > 0.0:
        raise ValueError("delta must be > 0")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    sp = _default_space(x, space)
    if not K.contains(x.values[0]):
        return OmegaResult(0.0, (0.0,))
    lay = _Layout(x, K, sp)
    cands = np.unique(np.concatenate([[0.0], lay.dist[np.triu_indices(lay.m, 1)]]))
    if not _feasible(lay, t, delta, float(cands[-1]), False)[0]:
        return OmegaResult(math.inf, ())
    lo, hi = -1, len(cands) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _feasible(lay, t, delta, float(cands[mid]), False)[0]:
            hi = mid
        else:
            lo = mid
    value = float(cands[hi])
    _, sub = _feasible(lay, t, delta, value, False, want_path=True)
    return OmegaResult(value, sub)


def omega_prime(x: StepPath, t: float, K: CompactSet, delta: float,
                space: StateSpace | None = None) -> float:
    """Modulus ``omega'_{t,K,x}(delta)``; ``inf`` if no admissible subdivision exists.

    Examples
    --------
    >>> from localskorokhod.statespace import Box
    >>> x = StepPath([0.0, 1.0], [0.0, 2.0])
    >>> omega_prime(x, 2.0, Box([-5.0], [5.0]), 1.5, StateSpace(1, "chordal")) > 0
    True
    >>> omega_prime(x, 2.0, Box([-5.0], [5.0]), 0.5)
    0.0
    """
    return omega_prime_subdivision(x, t, K, delta, space).value


def omega_prime_below(x: StepPath, t: float, K: CompactSet, delta: float, threshold: float,
                      space: StateSpace | None = None) -> bool:
    """Whether ``omega'_{t,K,x}(delta) < threshold``, decided by one strict sweep."""
    if not delta > 0.0:
        raise ValueError("delta must be > 0")
    sp = _default_space(x, space)
    if not K.contains(x.values[0]):
        return threshold > 0.0
    lay = _Layout(x, K, sp)
    return _feasible(lay, t, delta, threshold, True)[0]


def subdivision_cost(x: StepPath, t: float, K: CompactSet, delta: float,
                     times: Sequence[float], space: StateSpace | None = None) -> float:
    """Maximal oscillation of ``x`` over the pieces of ``times``.

    Returns ``inf`` when ``times`` violates the mesh, ordering or exit rules.
    """
    sp = _default_space(x, space)
    ts = [float(s) for s in times]
    if not ts or ts[0] != 0.0:
        return math.inf
    # Same float predicate as the sweep: b > a + delta.
    if any(not b > a + delta for a, b in zip(ts, ts[1:])):
        return math.inf
    last = ts[-1]
    if last > x.xi:
        return math.inf
    if not (last > t or last == x.xi or not K.contains(x.values[x.segment_index(last)])):
        return math.inf
    starts = x.times
    ends = x.segment_ends()
    worst = 0.0
    for a, b in zip(ts, ts[1:]):
        idx = np.nonzero((starts < b) & (ends > a))[0]
        vals = x.values[idx]
        if len(vals) > 1:
            worst = max(worst, float(sp.pairwise(vals, vals).max()))
    return worst


def omega_prime_oracle(x: StepPath, t: float, K: CompactSet, delta: float, n_restarts: int,
                       seed: int | None = None, space: StateSpace | None = None) -> float:
    """Randomized upper bound on ``omega'`` from sampled admissible subdivisions.

    Each restart walks forward from 0, choosing the next cut among the
    float just past ``c + delta``, later jump times, ``xi``, a point just
    past ``t`` and a uniform random point, preferring the next jump time
    half of the time.
    Every admissible prefix is scored with
    :func:`subdivision_cost`.  The best subdivision then gets local moves
    that resample a suffix.

    Parameters
    ----------
    n_restarts : int
        Number of independent walks, ``>= 1``.
    seed : int, optional
        Seed for :func:`numpy.random.default_rng`.
    """
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    if not delta > 0.0:
        raise ValueError("delta must be > 0")
    sp = _default_space(x, space)
    if not K.contains(x.values[0]):
        return 0.0
    rng = np.random.default_rng(seed)
    jumps = x.times[1:].tolist()
    nxt = [s for s in jumps if s > t] + ([x.xi] if math.isfinite(x.xi) else [])
    after_t = t + ((min(nxt) - t) / 2.0 if nxt else 0.5)
    span = (min(x.xi, t + 1.0) if math.isfinite(x.xi) else t + 1.0)

    def is_terminal(c: float) -> bool:
        return c > t or c == x.xi or not K.contains(x.values[x.segment_index(c)])

    def walk(prefix: list[float]) -> tuple[float, list[float]]:
        best, best_sub = math.inf, []
        cuts = list(prefix)
        while True:
            c = cuts[-1]
            if len(cuts) > 1 and is_terminal(c):
                cost = subdivision_cost(x, t, K, delta, cuts, sp)
                if cost < best:
                    best, best_sub = cost, list(cuts)
                if c > t or c == x.xi or rng.random() < 0.5:
                    return best, best_sub
            lo = c + delta
            if lo >= x.xi:
                return best, best_sub
            first = math.nextafter(lo, math.inf)
            options = [first] + [s for s in jumps if s > lo]
            if math.isfinite(x.xi):
                options.append(x.xi)
            if after_t < x.xi:
                options.append(max(first, after_t))
            options.append(first + float(rng.random()) * max(span - first, delta))
            options = [o for o in options if o <= x.xi and (o < x.xi or math.isfinite(o))]
            if not options:
                return best, best_sub
            nearest = [s for s in jumps if s > lo]
            if nearest and rng.random() < 0.5:
                cuts.append(nearest[0])
            else:
                cuts.append(options[int(rng.integers(len(options)))])

    best, best_sub = math.inf, []
    for _ in range(n_restarts):
        cost, sub = walk([0.0])
        if cost < best:
            best, best_sub = cost, sub
    for _ in range(n_restarts):
        if len(best_sub) < 2:
            break
        keep = int(rng.integers(1, len(best_sub)))
        cost, sub = walk(best_sub[:keep])
        if cost < best:
            best, best_sub = cost, sub
    return best


def omega_plain(x: StepPath, delta: float, space: StateSpace | None = None) -> float:
    """``sup d(x_{s1}, x_{s2})`` over ``s1 <= s2 <= s1 + delta`` in ``[0, xi)``.

    Segments ``i < k`` hold a valid pair exactly when ``t_k - t_{i+1} < delta``.
    """
    if not delta > 0.0:
        raise ValueError("delta must be > 0")
    sp = _default_space(x, space)
    D = sp.pairwise(x.values, x.values)
    starts = x.times.tolist()
    m = x.n_segments
    best = 0.0
    for i in range(m - 1):
        for k in range(i + 1, m):
            if starts[k] - starts[i + 1] >= delta:
                break
            best = max(best, float(D[i, k]))
    return best


def omega_double_prime(x: StepPath, delta: float, space: StateSpace | None = None) -> float:
    """``sup min(d(x_{s1}, x_{s2}), d(x_{s2}, x_{s3}))`` over ``s1 <= s2 <= s3 <= s1 + delta``.

    Only triples of distinct segments ``i < j < k`` with
    ``t_k - t_{i+1} < delta`` contribute; otherwise one side of the min is 0.
    """
    if not delta > 0.0:
        raise ValueError("delta must be > 0")
    sp = _default_space(x, space)
    D = sp.pairwise(x.values, x.values)
    starts = x.times.tolist()
    m = x.n_segments
    best = 0.0
    for i in range(m - 2):
        for k in range(i + 2, m):
            if starts[k] - starts[i + 1] >= delta:
                break
            mids = np.minimum(D[i, i + 1:k], D[i + 1:k, k])
            best = max(best, float(mids.max()))
    return best
