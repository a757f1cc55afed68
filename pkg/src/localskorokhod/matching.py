"""Monotone matching of two step paths at a fixed tolerance.

The matching plane has the time of ``x`` on the horizontal axis (``sigma``)
and the time of ``y`` on the vertical axis (``tau``).  Cell ``(i, j)`` is
``[a_i, a_{i+1}] x [b_j, b_{j+1}]`` and is free at level ``eps`` when
``d(v_i, w_j) <= eps``.  A warp is a monotone curve from the origin that
stays in free cells, inside the band ``|sigma - tau| <= eps``, and (for the
slope-capped variant) has slopes in ``[1/c, c]``.  Reachable parts of the
cell boundaries are unions of intervals, propagated cell by cell.

A column ``i = m_x`` (and row ``j = m_y``) stands for the explosion time of
``x`` (of ``y``) when it is finite; curves may stop on it but never cross it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "EndRule",
    "MatchProblem",
    "feasible",
]

_TOL = 1e-12


@dataclass(frozen=True)
class EndRule:
    """Where a curve may stop, seen from one of the two paths.

    A stop at time ``s`` inside segment ``i`` is allowed when
    ``penalty[i] <= eps``, or when ``s >= threshold`` (``threshold - eps``
    if ``soft``), and in any case ``s <= clip``.  A stop exactly at the
    explosion time is allowed iff ``at_xi``.
    """

    penalty: tuple[float, ...]
    threshold: float = math.inf
    soft: bool = True
    clip: float = math.inf
    at_xi: bool = True


@dataclass
class MatchProblem:
    """Segment starts, explosion times and distance matrix of a path pair."""

    sx: list[float]
    xi_x: float
    sy: list[float]
    xi_y: float
    dist: list[list[float]]
    rule_x: EndRule
    rule_y: EndRule
    mx: int = field(init=False)
    my: int = field(init=False)

    def __post_init__(self) -> None:
        self.mx = len(self.sx)
        self.my = len(self.sy)
        if len(self.rule_x.penalty) != self.mx or len(self.rule_y.penalty) != self.my:
            raise ValueError("end rules must carry one penalty per segment")

    def col(self, i: int) -> tuple[float, float]:
        if i < self.mx - 1:
            return self.sx[i], self.sx[i + 1]
        if i == self.mx - 1:
            return self.sx[i], self.xi_x
        return self.xi_x, math.inf

    def row(self, j: int) -> tuple[float, float]:
        if j < self.my - 1:
            return self.sy[j], self.sy[j + 1]
        if j == self.my - 1:
            return self.sy[j], self.xi_y
        return self.xi_y, math.inf


def _div(d: float, c: float) -> float:
    return 0.0 if c == math.inf else d / c


def _mul(c: float, d: float) -> float:
    return 0.0 if d == 0.0 else c * d


def _tol(*vals: float) -> float:
    scale = 1.0
    for v in vals:
        a = v if v >= 0.0 else -v
        if scale < a < math.inf:
            scale = a
    return _TOL * scale


def _tol2(a: float, b: float) -> float:
    # Two-argument fast path of _tol.
    a = a if a >= 0.0 else -a
    b = b if b >= 0.0 else -b
    scale = 1.0
    if scale < a < math.inf:
        scale = a
    if scale < b < math.inf:
        scale = b
    return _TOL * scale


def _merge(parts: list[tuple]) -> list[tuple[float, float]]:
    if len(parts) <= 1:
        return [(p[0], p[1]) for p in parts]
    spans = sorted((p[0], p[1]) for p in parts)
    out: list[list[float]] = []
    for lo, hi in spans:
        if out and lo <= out[-1][1] + _tol2(lo, 0.0):
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def _pieces(rule: EndRule, k: int, m: int, lo: float, hi: float, eps: float) -> list[tuple[float, float]]:
    """Stopping times allowed in ``[lo, hi]`` for segment ``k`` (``k == m``: at xi)."""
    hi = min(hi, rule.clip)
    if lo > hi:
        return []
    if k == m:
        return [(lo, lo)] if rule.at_xi else []
    if rule.penalty[k] <= eps:
        return [(lo, hi)]
    thr = rule.threshold - eps if rule.soft else rule.threshold
    if thr <= hi:
        return [(max(lo, thr), hi)]
    return []


def _solve(s_lo: float, s_hi: float, lowers: list[tuple[float, float]],
           uppers: list[tuple[float, float]]) -> Optional[tuple[float, float]]:
    """Range of ``sigma`` in ``[s_lo, s_hi]`` admitting ``tau`` with all constraints.

    Constraints are ``tau >= a*sigma + b`` (lowers) and ``tau <= a*sigma + b``
    (uppers); the admissible set is convex, so pairwise comparisons suffice.
    """
    lo, hi = s_lo, s_hi
    for al, bl in lowers:
        for au, bu in uppers:
            da = al - au
            db = bu - bl
            tol = _tol(bl, bu, al * s_lo if math.isfinite(s_lo) else 0.0)
            if da == 0.0:
                if db < -tol:
                    return None
            elif da > 0.0:
                hi = min(hi, (db + tol) / da)
            else:
                lo = max(lo, (db + tol) / da)
    if lo > hi + _tol(lo, hi):
        return None
    return lo, max(lo, hi)


def _tau_range(sigma: float, lowers: list[tuple[float, float]],
               uppers: list[tuple[float, float]]) -> tuple[float, float]:
    lo = max(a * sigma + b for a, b in lowers)
    hi = min(a * sigma + b for a, b in uppers)
    return lo, max(lo, hi)


class _Cell:
    __slots__ = ("left", "bottom", "lm", "bm")

    def __init__(self) -> None:
        self.left: list[tuple] = []
        self.bottom: list[tuple] = []
        self.lm: list[tuple[float, float]] = []
        self.bm: list[tuple[float, float]] = []


def feasible(prob: MatchProblem, eps: float, c: float, witness: bool = False):
    """Decide whether a curve of cost ``<= eps`` exists.

    Parameters
    ----------
    prob : MatchProblem
    eps : float
        Tolerance level, ``>= 0``.
    c : float
        Slope cap ``>= 1``; ``inf`` removes the slope constraint.
    witness : bool
        Also return the curve as a list of ``(sigma, tau)`` points.

    Returns
    -------
    bool or (bool, list)
        Feasibility, and the witness curve when requested (``None`` when
        infeasible).
    """
    mx, my = prob.mx, prob.my
    hx = prob.rule_x.clip
    hy = prob.rule_y.clip
    cells: dict[tuple[int, int], _Cell] = {}
    heap: list[tuple[int, int]] = []

    def cell(i: int, j: int) -> _Cell:
        key = (i, j)
        got = cells.get(key)
        if got is None:
            got = _Cell()
            cells[key] = got
            heapq.heappush(heap, key)
        return got

    cell(0, 0).left.append((0.0, 0.0, None))
    while heap:
        i, j = heapq.heappop(heap)
        cur = cells[(i, j)]
        A0, A1 = prob.col(i)
        B0, B1 = prob.row(j)
        if A0 > hx or B0 > hy:
            continue
        cur.lm = _merge(cur.left)
        cur.bm = _merge(cur.bottom)
        virtual = i == mx or j == my
        free = (not virtual) and prob.dist[i][j] <= eps
        end = _end_check(prob, i, j, cur, eps, c, free, A0, A1, B0, B1)
        if end is not None:
            if not witness:
                return True
            return True, _backtrack(prob, cells, (i, j), end, eps, c)
        if not free:
            continue
        _propagate(prob, cell, i, j, cur, eps, c, A0, A1, B0, B1, hx, hy, witness)
    return (False, None) if witness else False


def _entry_lines(kind: str, lo: float, hi: float, A0: float, B0: float, c: float,
                 free: bool) -> tuple[float, float, list, list]:
    """Sigma bounds and tau lines of the region reachable from one entry."""
    lowers: list[tuple[float, float]] = []
    uppers: list[tuple[float, float]] = []
    if kind == "L":
        if not free:
            return A0, A0, [(0.0, lo)], [(0.0, hi)]
        lowers.append((_div(1.0, c), lo - _div(A0, c)))
        if c != math.inf:
            uppers.append((c, hi - c * A0))
        return A0, math.inf, lowers, uppers
    if not free:
        return lo, hi, [(0.0, B0)], [(0.0, B0)]
    lowers.append((0.0, B0))
    lowers.append((_div(1.0, c), B0 - _div(hi, c)))
    if c != math.inf:
        uppers.append((c, B0 - c * lo))
    return lo, math.inf, lowers, uppers


def _end_check(prob: MatchProblem, i: int, j: int, cur: _Cell, eps: float, c: float, free: bool,
               A0: float, A1: float, B0: float, B1: float):
    xs = _pieces(prob.rule_x, i, prob.mx, A0, A1, eps)
    if not xs:
        return None
    ys = _pieces(prob.rule_y, j, prob.my, B0, B1, eps)
    if not ys:
        return None
    entries = [("L", k, lo, hi) for k, (lo, hi) in enumerate(cur.lm)]
    entries += [("B", k, lo, hi) for k, (lo, hi) in enumerate(cur.bm)]
    for kind, k, lo, hi in entries:
        s_lo, s_hi, lowers, uppers = _entry_lines(kind, lo, hi, A0, B0, c, free)
        lowers = lowers + [(1.0, -eps)]
        uppers = uppers + [(1.0, eps)]
        for p_lo, p_hi in xs:
            for q_lo, q_hi in ys:
                lw = lowers + [(0.0, q_lo)]
                up = uppers + [(0.0, q_hi)] if math.isfinite(q_hi) else uppers
                got = _solve(max(s_lo, p_lo), min(s_hi, p_hi), lw, up)
                if got is not None:
                    sig = 0.5 * (got[0] + got[1])
                    t_lo, t_hi = _tau_range(sig, lw, up)
                    return kind, k, sig, 0.5 * (t_lo + min(t_hi, t_lo + 1.0))
    return None


def _clip_interval(lo: float, hi: float, base_lo: float, base_hi: float):
    if base_lo > lo:
        lo = base_lo
    if base_hi < hi:
        hi = base_hi
    if lo > hi:
        if lo - hi > _tol2(lo, hi):
            return None
        lo = hi = min(max(hi, base_lo), base_hi)
    return lo, hi


def _propagate(prob, cell, i, j, cur, eps, c, A0, A1, B0, B1, hx, hy, witness) -> None:
    mx, my = prob.mx, prob.my
    corner = False
    if math.isfinite(A1) and A1 <= hx:
        dA = A1 - A0
        base_lo, base_hi = max(B0, A1 - eps), min(B1, A1 + eps, hy)
        outs = []
        for k, (L, H) in enumerate(cur.lm):
            outs.append((L + _div(dA, c), H + _mul(c, dA), "L", k))
        for k, (M, N) in enumerate(cur.bm):
            outs.append((B0 + _div(max(A1 - N, 0.0), c), B0 + _mul(c, A1 - M), "B", k))
        target = None
        for lo, hi, kind, k in outs:
            got = _clip_interval(lo, hi, base_lo, base_hi)
            if got is None:
                continue
            lo, hi = got
            if hi >= B1:
                corner = True
            if lo < B1:
                if target is None:
                    target = cell(i + 1, j)
                target.left.append((lo, hi, (i, j, kind, k) if witness else None))
    if math.isfinite(B1) and B1 <= hy:
        dB = B1 - B0
        base_lo, base_hi = max(A0, B1 - eps), min(A1, B1 + eps, hx)
        outs = []
        for k, (L, H) in enumerate(cur.lm):
            outs.append((A0 + _div(B1 - H, c), A0 + _mul(c, B1 - L), "L", k))
        for k, (M, N) in enumerate(cur.bm):
            outs.append((M + _div(dB, c), N + _mul(c, dB), "B", k))
        target = None
        for lo, hi, kind, k in outs:
            got = _clip_interval(lo, hi, base_lo, base_hi)
            if got is None:
                continue
            lo, hi = got
            if hi >= A1:
                corner = True
            if lo < A1:
                if target is None:
                    target = cell(i, j + 1)
                target.bottom.append((lo, hi, (i, j, kind, k) if witness else None))
    if corner and math.isfinite(A1) and math.isfinite(B1) and A1 <= hx and B1 <= hy \
            and abs(A1 - B1) <= eps + _tol2(A1, B1):
        diag = cell(i + 1, j + 1)
        diag.left.append((B1, B1, (i, j, "C", -1) if witness else None))


def _backtrack(prob: MatchProblem, cells, key, end, eps: float, c: float) -> list[tuple[float, float]]:
    kind, k, sig, tau = end
    points = [(sig, tau)]
    i, j = key
    while True:
        cur = cells[(i, j)]
        A0, _ = prob.col(i)
        B0, _ = prob.row(j)
        lo, hi = (cur.lm if kind == "L" else cur.bm)[k]
        ps, pt = points[-1]
        if kind == "L":
            a = pt - _mul(c, ps - A0)
            b = pt - _div(ps - A0, c)
            q = _pick(lo, hi, a, b)
            q_pt = (A0, q)
            parts = cur.left
        else:
            a = ps - _mul(c, pt - B0)
            b = ps - _div(pt - B0, c)
            q = _pick(lo, hi, a, b)
            q_pt = (q, B0)
            parts = cur.bottom
        points.append(q_pt)
        src = _find_part(parts, q)
        if src is None:
            break
        si, sj, skind, sk = src
        if skind == "C":
            # The entry is the top-right corner of the diagonal predecessor.
            i, j = si, sj
            kind, k, q2 = _corner_source(prob, cells, si, sj, c)
            points.append(q2)
            continue
        i, j, kind, k = si, sj, skind, sk
    points.reverse()
    out: list[tuple[float, float]] = []
    for s, t in points:
        if not out or (s > out[-1][0] and t > out[-1][1]):
            out.append((s, t))
    return out


def _corner_source(prob: MatchProblem, cells, i: int, j: int, c: float):
    """Entry of cell ``(i, j)`` from which its top-right corner is reachable."""
    cur = cells[(i, j)]
    A0, A1 = prob.col(i)
    B0, B1 = prob.row(j)
    best = None
    for kind, spans in (("L", cur.lm), ("B", cur.bm)):
        for k, (lo, hi) in enumerate(spans):
            if kind == "L":
                a = B1 - _mul(c, A1 - A0)
                b = B1 - _div(A1 - A0, c)
            else:
                a = A1 - _mul(c, B1 - B0)
                b = A1 - _div(B1 - B0, c)
            gap = max(a - hi, lo - b, 0.0)
            if best is None or gap < best[0]:
                best = (gap, kind, k)
    _, kind, k = best
    return kind, k, (A1, B1)


def _pick(lo: float, hi: float, a: float, b: float) -> float:
    lo2, hi2 = max(lo, a), min(hi, b)
    if lo2 <= hi2:
        return 0.5 * (lo2 + hi2)
    # Rounding left an empty window; take the nearest admissible point.
    return min(max(0.5 * (a + b), lo), hi)


def _find_part(parts: list[tuple], q: float):
    best = None
    for lo, hi, src in parts:
        gap = max(lo - q, q - hi, 0.0)
        if best is None or gap < best[0]:
            best = (gap, src)
    return None if best is None else best[1]
