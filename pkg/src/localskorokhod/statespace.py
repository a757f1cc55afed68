"""State space R^d, its one-point compactification, and compact sets.

Points of the state space are 1-d float arrays of length ``dim``.  The
cemetery point added at infinity is the singleton :data:`DELTA`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "DELTA",
    "Cemetery",
    "Point",
    "StateSpace",
    "CompactSet",
    "Ball",
    "Box",
    "WholeSpace",
    "Exhaustion",
    "chordal_radius_to_norm",
]

MetricKind = Literal["euclidean-truncated", "chordal"]
METRIC_KINDS: tuple[str, ...] = ("euclidean-truncated", "chordal")


class Cemetery:
    """The point at infinity. Use the module singleton :data:`DELTA`."""

    _instance: "Cemetery | None" = None

    def __new__(cls) -> "Cemetery":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DELTA"

    def __reduce__(self) -> str:
        return "DELTA"


DELTA = Cemetery()

Point = Union[np.ndarray, Cemetery]


def _as_point(a: Sequence[float] | np.ndarray, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=float).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"point has {arr.shape[0]} coordinates, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def _stereo(points: np.ndarray) -> np.ndarray:
    # Inverse stereographic projection onto the unit sphere, north pole = DELTA.
    sq = np.einsum("ij,ij->i", points, points)
    out = np.empty((points.shape[0], points.shape[1] + 1))
    out[:, :-1] = 2.0 * points / (1.0 + sq)[:, None]
    out[:, -1] = (sq - 1.0) / (sq + 1.0)
    return out


def _cap_distance(p: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    """Chordal distance from sphere points ``p`` to the cap ``{w.z >= b}``.

    Points already in the cap get 0.
    """
    norm = float(np.linalg.norm(w))
    n = w / norm
    h = min(max(b / norm, -1.0), 1.0)
    # atan2 keeps full precision near the poles of n, where arccos does not.
    along = p @ n
    across = np.linalg.norm(p - along[:, None] * n[None, :], axis=1)
    alpha = np.arctan2(across, along)
    beta = math.acos(h)
    gap = np.maximum(alpha - beta, 0.0)
    return 2.0 * np.sin(gap / 2.0)


def chordal_radius_to_norm(r: float) -> float:
    """Euclidean radius of ``{a : d(a, DELTA) >= r}`` under the chordal metric.

    Parameters
    ----------
    r : float
        Chordal radius in ``(0, 2]``.

    Returns
    -------
    float
        ``sqrt(4 / r**2 - 1)``, the norm at which ``2 / sqrt(1 + |a|^2) = r``.
    """
    if not 0.0 < r <= 2.0:
        raise ValueError("chordal radius must lie in (0, 2]")
    return math.sqrt(max(4.0 / (r * r) - 1.0, 0.0))


class CompactSet:
    """Base class for compact subsets of R^d (and of its compactification)."""

    dim: int

    def contains(self, a: np.ndarray) -> bool:
        raise NotImplementedError

    def interior_contains(self, a: np.ndarray) -> bool:
        raise NotImplementedError

    def euclidean_margin(self, points: np.ndarray) -> np.ndarray:
        """Euclidean distance from each row of ``points`` to the complement."""
        raise NotImplementedError

    def chordal_margin(self, points: np.ndarray) -> np.ndarray:
        """Chordal distance from each row of ``points`` to the complement in S^Delta."""
        raise NotImplementedError

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.contains(p) for p in points], dtype=bool)


@dataclass(frozen=True)
class Ball(CompactSet):
    """Closed Euclidean ball ``{a : |a - center| <= radius}``."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(-1))
        if not c or not all(math.isfinite(v) for v in c):
            raise ValueError("ball center must be a finite nonempty vector")
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise ValueError("ball radius must be finite and >= 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:  # type: ignore[override]
        return len(self.center)

    def _offsets(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.linalg.norm(pts - np.asarray(self.center), axis=1)

    def contains(self, a: np.ndarray) -> bool:
        return bool(self._offsets(a)[0] <= self.radius)

    def interior_contains(self, a: np.ndarray) -> bool:
        return bool(self._offsets(a)[0] < self.radius)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return self._offsets(points) <= self.radius

    def euclidean_margin(self, points: np.ndarray) -> np.ndarray:
        return np.maximum(self.radius - self._offsets(points), 0.0)

    def chordal_margin(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if self.radius == 0.0:
            return np.zeros(pts.shape[0])
        c = np.asarray(self.center)
        cc = float(c @ c)
        r2 = self.radius**2
        # The ball maps to the sphere region {w.z <= b}; its complement is the cap {w.z >= b}.
        w = np.concatenate([-2.0 * c, [1.0 - cc + r2]])
        b = -(1.0 + cc - r2)
        out = _cap_distance(_stereo(pts), w, b)
        out[self._offsets(pts) >= self.radius] = 0.0
        return out


@dataclass(frozen=True)
class Box(CompactSet):
    """Closed axis-aligned box ``prod_i [lo_i, hi_i]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in np.asarray(self.lo, dtype=float).reshape(-1))
        hi = tuple(float(v) for v in np.asarray(self.hi, dtype=float).reshape(-1))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be nonempty and of equal length")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValueError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box requires lo <= hi coordinatewise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return len(self.lo)

    def _slack(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.minimum(pts - np.asarray(self.lo), np.asarray(self.hi) - pts).min(axis=1)

    def contains(self, a: np.ndarray) -> bool:
        return bool(self._slack(a)[0] >= 0.0)

    def interior_contains(self, a: np.ndarray) -> bool:
        return bool(self._slack(a)[0] > 0.0)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return self._slack(points) >= 0.0

    def euclidean_margin(self, points: np.ndarray) -> np.ndarray:
        return np.maximum(self._slack(points), 0.0)

    def chordal_margin(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        p = _stereo(pts)
        d = self.dim
        best = np.full(pts.shape[0], np.inf)
        for i in range(d):
            # {x_i >= hi} and {x_i <= lo} are spherical caps.
            w = np.zeros(d + 1)
            w[i], w[d] = 1.0, self.hi[i]
            best = np.minimum(best, _cap_distance(p, w, self.hi[i]))
            w = np.zeros(d + 1)
            w[i], w[d] = -1.0, -self.lo[i]
            best = np.minimum(best, _cap_distance(p, w, -self.lo[i]))
        best[self._slack(pts) <= 0.0] = 0.0
        return best


@dataclass(frozen=True)
class WholeSpace(CompactSet):
    """All of S^Delta, whose complement is empty (distance +inf)."""

    dim: int  # type: ignore[misc]

    def contains(self, a: np.ndarray) -> bool:
        return True

    def interior_contains(self, a: np.ndarray) -> bool:
        return True

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return np.ones(np.asarray(points).reshape(-1, self.dim).shape[0], dtype=bool)

    def euclidean_margin(self, points: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(points).reshape(-1, self.dim).shape[0], np.inf)

    def chordal_margin(self, points: np.ndarray) -> np.ndarray:
        return self.euclidean_margin(points)


@dataclass(frozen=True)
class StateSpace:
    """R^d with a metric and the induced metric on S^Delta.

    Parameters
    ----------
    dim : int
        Dimension ``d >= 1``.
    metric_kind : {"euclidean-truncated", "chordal"}
        ``min(|a - b|, 1)``, or the chord length between the images of
        ``a`` and ``b`` on the unit sphere of R^(d+1).  For the truncated
        metric the cemetery sits at distance 1 from every point.
    """

    dim: int
    metric_kind: str = "euclidean-truncated"
    _chordal: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            raise ValueError("dim must be a positive integer")
        if self.metric_kind not in METRIC_KINDS:
            raise ValueError(f"metric_kind must be one of {METRIC_KINDS}, got {self.metric_kind!r}")
        object.__setattr__(self, "_chordal", self.metric_kind == "chordal")

    @property
    def diameter(self) -> float:
        return 2.0 if self._chordal else 1.0

    def point(self, coords: Sequence[float]) -> np.ndarray:
        """Validate and return coordinates as a point of S."""
        return _as_point(coords, self.dim)

    def dist(self, a: Point, b: Point) -> float:
        """Distance on S^Delta between two points."""
        if a is DELTA and b is DELTA:
            return 0.0
        if a is DELTA:
            return float(self.dist_to_delta(np.asarray(b).reshape(1, -1))[0])
        if b is DELTA:
            return float(self.dist_to_delta(np.asarray(a).reshape(1, -1))[0])
        return float(self.pairwise(np.reshape(a, (1, -1)), np.reshape(b, (1, -1)))[0, 0])

    def pairwise(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Distance matrix between rows of ``A`` and rows of ``B``."""
        A = np.asarray(A, dtype=float).reshape(-1, self.dim)
        B = np.asarray(B, dtype=float).reshape(-1, self.dim)
        diff = cdist(A, B)
        if self._chordal:
            na = np.sqrt(1.0 + np.einsum("ij,ij->i", A, A))
            nb = np.sqrt(1.0 + np.einsum("ij,ij->i", B, B))
            return np.minimum(2.0 * diff / (na[:, None] * nb[None, :]), 2.0)
        return np.minimum(diff, 1.0)

    def dist_to_delta(self, A: np.ndarray) -> np.ndarray:
        """Distance from each row of ``A`` to the cemetery."""
        A = np.asarray(A, dtype=float).reshape(-1, self.dim)
        if self._chordal:
            return 2.0 / np.sqrt(1.0 + np.einsum("ij,ij->i", A, A))
        return np.ones(A.shape[0])

    def dist_to_complement(self, A: np.ndarray, K: CompactSet) -> np.ndarray:
        """``d(a, K^c)`` for each row of ``A``; zero off the interior of ``K``."""
        A = np.asarray(A, dtype=float).reshape(-1, self.dim)
        if self._chordal:
            return K.chordal_margin(A)
        return np.minimum(K.euclidean_margin(A), 1.0)


@dataclass(frozen=True)
class Exhaustion:
    """Increasing compacts ``K_n = B(center, base * growth**n)``.

    Parameters
    ----------
    dim : int
        Dimension of the ambient space.
    base : float
        Radius of ``K_0``.
    growth : float
        Ratio between consecutive radii, ``> 1``.
    """

    dim: int
    base: float = 1.0
    growth: float = 2.0
    center: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not (self.base > 0.0 and math.isfinite(self.base)):
            raise ValueError("base radius must be positive and finite")
        if not (self.growth > 1.0 and math.isfinite(self.growth)):
            raise ValueError("growth must exceed 1")
        if self.center is not None and len(self.center) != self.dim:
            raise ValueError("center has the wrong dimension")

    def __call__(self, n: int) -> Ball:
        if n < 0:
            raise ValueError("exhaustion index must be >= 0")
        center = self.center if self.center is not None else (0.0,) * self.dim
        return Ball(center, self.base * self.growth**n)
