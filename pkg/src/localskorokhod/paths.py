"""Finite-jump cadlag paths with an explosion time.

A :class:`StepPath` holds values ``v_0, ..., v_{m-1}`` on the segments
``[t_i, t_{i+1})`` with ``t_m = xi``.  At and after ``xi`` the path sits at
the cemetery :data:`~localskorokhod.statespace.DELTA`.  ``xi = inf`` means the
last value is held forever.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable, Sequence

import numpy as np

from .statespace import DELTA, CompactSet, Point

__all__ = [
    "StepPath",
    "evaluate",
    "left_limit",
    "exit_time",
    "truncate_at_exit",
]


class StepPath:
    """Immutable step path ``(t_i, v_i)_{i<m}`` with explosion time ``xi``.

    Parameters
    ----------
    times : sequence of float
        Jump times with ``times[0] == 0``, strictly increasing, all ``< xi``.
    values : array_like
        ``m`` by ``dim`` array (a 1-d array is read as ``dim = 1``).
    xi : float, optional
        Explosion time in ``(0, inf]``.

    Raises
    ------
    ValueError
        If any of the ordering or finiteness invariants fail.

    Examples
    --------
    >>> x = StepPath([0.0, 1.0], [0.0, 2.0])
    >>> float(x(1.0)[0]), float(x.left_limit(1.0)[0])
    (2.0, 0.0)
    """

    __slots__ = ("_times", "_values", "_xi", "_time_list")

    def __init__(self, times: Sequence[float], values: Sequence[Sequence[float]] | np.ndarray,
                 xi: float = math.inf) -> None:
        t = np.array(times, dtype=float).reshape(-1)
        v = np.array(values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError("values must be an m by dim array")
        if t.shape[0] == 0:
            raise ValueError("a path needs at least one segment")
        if v.shape[0] != t.shape[0]:
            raise ValueError(f"{t.shape[0]} times but {v.shape[0]} values")
        xi = float(xi)
        if not xi > 0.0 or math.isnan(xi):
            raise ValueError("xi must lie in (0, inf]")
        if t[0] != 0.0:
            raise ValueError("the first jump time must be 0")
        if not np.all(np.isfinite(t)):
            raise ValueError("jump times must be finite")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("jump times must be strictly increasing")
        if t[-1] >= xi:
            raise ValueError("all jump times must be < xi")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        t.flags.writeable = False
        v.flags.writeable = False
        self._times = t
        self._values = v
        self._xi = xi
        self._time_list = t.tolist()

    @classmethod
    def constant(cls, value: Sequence[float] | float, xi: float = math.inf) -> "StepPath":
        return cls([0.0], np.atleast_1d(np.asarray(value, dtype=float)).reshape(1, -1), xi)

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def xi(self) -> float:
        return self._xi

    @property
    def dim(self) -> int:
        return int(self._values.shape[1])

    @property
    def n_segments(self) -> int:
        return int(self._times.shape[0])

    @property
    def n_jumps(self) -> int:
        return self.n_segments - 1

    def segment_ends(self) -> np.ndarray:
        """Right end of every segment, the last one being ``xi``."""
        return np.append(self._times[1:], self._xi)

    def segment_index(self, t: float) -> int:
        """Index of the segment containing ``t``, or ``-1`` if ``t >= xi``."""
        if t < 0.0:
            raise ValueError("time must be >= 0")
        if t >= self._xi:
            return -1
        return bisect.bisect_right(self._time_list, t) - 1

    def __call__(self, t: float) -> Point:
        return evaluate(self, t)

    def left_limit(self, t: float) -> Point:
        return left_limit(self, t)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepPath):
            return NotImplemented
        return (self._xi == other._xi and np.array_equal(self._times, other._times)
                and np.array_equal(self._values, other._values))

    def __hash__(self) -> int:
        return hash((self._xi, self._times.tobytes(), self._values.tobytes()))

    def __repr__(self) -> str:
        xi = "inf" if math.isinf(self._xi) else repr(self._xi)
        return f"StepPath(m={self.n_segments}, dim={self.dim}, xi={xi})"

    def with_xi(self, xi: float) -> "StepPath":
        return StepPath(self._times, self._values, xi)

    def restricted(self, n_segments: int, xi: float) -> "StepPath":
        """The first ``n_segments`` segments, exploding at ``xi``."""
        return StepPath(self._times[:n_segments], self._values[:n_segments], xi)

    def jumps(self) -> Iterable[tuple[float, np.ndarray]]:
        for i in range(self.n_segments):
            yield float(self._times[i]), self._values[i]


def evaluate(path: StepPath, t: float) -> Point:
    """Value ``x_t``: the segment value at ``t``, or DELTA once ``t >= xi``.

    Parameters
    ----------
    path : StepPath
    t : float
        Time ``>= 0``.

    Returns
    -------
    numpy.ndarray or Cemetery
        A copy of the segment value, or :data:`DELTA`.
    """
    i = path.segment_index(t)
    if i < 0:
        return DELTA
    return path.values[i].copy()


def left_limit(path: StepPath, t: float) -> Point:
    """Left limit ``x_{t-}`` for ``t > 0``.

    At ``t == xi`` this is the last segment value; beyond ``xi`` it is DELTA.
    """
    if not t > 0.0:
        raise ValueError("left limits are defined for t > 0")
    if t > path.xi:
        return DELTA
    i = bisect.bisect_left(path._time_list, t) - 1
    return path.values[i].copy()


def exit_time(path: StepPath, U: CompactSet | None) -> float:
    """First time the path or its left limit leaves the open set ``U``.

    Parameters
    ----------
    path : StepPath
    U : CompactSet or None
        ``U`` is read as the interior of the given set; ``None`` is the whole
        space, for which the exit time is ``xi``.

    Returns
    -------
    float
        The exit time capped at ``xi``.  The cemetery is never in ``U``.
    """
    if U is None:
        return path.xi
    for i in range(path.n_segments):
        # Left limits at jump times are earlier segment values, already checked.
        if not U.interior_contains(path.values[i]):
            return float(path.times[i])
    return path.xi


def truncate_at_exit(path: StepPath, K: CompactSet, t: float) -> StepPath:
    """Cut the path when ``(s, x_s)`` first leaves ``[0, t] x K``.

    The exit from ``K`` at a jump time ``s <= t`` becomes the new explosion
    time.  A path that starts outside ``K`` is returned unchanged, since a
    zero explosion time is not representable.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    inside = K.contains_many(path.values)
    for i in range(1, path.n_segments):
        s = float(path.times[i])
        if s > t:
            break
        if not inside[i]:
            return path.restricted(i, s)
    return path
