"""Piecewise-linear time warps, increasing bijections of [0, inf)."""

from __future__ import annotations

import bisect
import math
from typing import Sequence

import numpy as np

__all__ = [
    "TimeWarp",
    "warp_deviation",
    "warp_log_slope",
]


class TimeWarp:
    """Piecewise-linear increasing bijection with slope 1 after the last breakpoint.

    Parameters
    ----------
    breakpoints : sequence of (u, lambda(u))
        Must start at ``(0, 0)`` and be strictly increasing in both
        coordinates.  A lone ``(0, 0)`` is the identity.

    Raises
    ------
    ValueError
        If the breakpoints do not define a finite-slope increasing bijection.
    """

    __slots__ = ("_u", "_v")

    def __init__(self, breakpoints: Sequence[tuple[float, float]] = ((0.0, 0.0),)) -> None:
        pts = [(float(a), float(b)) for a, b in breakpoints]
        if not pts or pts[0] != (0.0, 0.0):
            raise ValueError("a warp must start at (0, 0)")
        for (a0, b0), (a1, b1) in zip(pts, pts[1:]):
            if not (a1 > a0 and b1 > b0):
                raise ValueError("warp breakpoints must be strictly increasing in both coordinates")
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in pts):
            raise ValueError("warp breakpoints must be finite")
        self._u = [a for a, _ in pts]
        self._v = [b for _, b in pts]

    @classmethod
    def identity(cls) -> "TimeWarp":
        return cls()

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self._u, self._v))

    def __call__(self, s: float) -> float:
        return _interp(self._u, self._v, s)

    def inverse(self) -> "TimeWarp":
        return TimeWarp(list(zip(self._v, self._u)))

    def slopes(self) -> list[float]:
        """Slopes of the finite pieces, the trailing slope 1 excluded."""
        return [(v1 - v0) / (u1 - u0)
                for u0, u1, v0, v1 in zip(self._u, self._u[1:], self._v, self._v[1:])]

    def compose(self, inner: "TimeWarp") -> "TimeWarp":
        """The warp ``s -> self(inner(s))``."""
        knots = set(inner._u)
        knots.update(inner.inverse()(u) for u in self._u)
        us = sorted(knots)
        return TimeWarp([(u, self(inner(u))) for u in us])

    def deviation(self, t: float) -> float:
        return warp_deviation(self, t)

    def log_slope(self, t: float) -> float:
        return warp_log_slope(self, t)

    def __repr__(self) -> str:
        return f"TimeWarp({self.breakpoints!r})"


def _interp(xs: list[float], ys: list[float], s: float) -> float:
    if s < 0.0:
        raise ValueError("warps are defined on [0, inf)")
    if s >= xs[-1]:
        return ys[-1] + (s - xs[-1])
    k = bisect.bisect_right(xs, s) - 1
    x0, x1, y0, y1 = xs[k], xs[k + 1], ys[k], ys[k + 1]
    if s == x0:
        return y0
    return y0 + (y1 - y0) * (s - x0) / (x1 - x0)


def warp_deviation(lam: TimeWarp, t: float) -> float:
    """``sup_{0 <= s <= t} |lambda(s) - s|``, attained at a breakpoint or at ``t``.

    Examples
    --------
    >>> round(warp_deviation(TimeWarp([(0, 0), (1, 1.2)]), 2.0), 12)
    0.2
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    best = abs(lam(t) - t)
    for u, v in zip(lam._u, lam._v):
        if u > t:
            break
        best = max(best, abs(v - u))
    return best


def warp_log_slope(lam: TimeWarp, t: float) -> float:
    """Essential sup of ``|log lambda'(s)|`` over ``[0, t]``.

    Only pieces that meet ``[0, t]`` in a set of positive length count, so
    the value at ``t = 0`` is 0.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    best = 0.0
    for k, slope in enumerate(lam.slopes()):
        if lam._u[k] >= t:
            break
        best = max(best, abs(math.log(slope)))
    return best


def warp_from_arrays(u: np.ndarray, v: np.ndarray) -> TimeWarp:
    return TimeWarp(list(zip(np.asarray(u).tolist(), np.asarray(v).tolist())))
