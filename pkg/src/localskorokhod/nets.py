"""Finite nets of grid-constant paths approximating a given path.

``E(R, delta, N)`` is the set of paths that are constant with values in the
finite set ``R`` (or dead) on every cell ``[k delta, (k + 1) delta)`` and
explode no later than ``N delta``.  :func:`approximate_by_net` picks a
member close to ``x`` in ``rho_tilde_{N delta, K}``: it snaps an optimal
modulus subdivision down to the grid and every value to a nearest point of
``R``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .modulus import omega_prime_subdivision
from .paths import StepPath
from .statespace import Ball, Box, CompactSet, StateSpace

__all__ = [
    "in_net",
    "covering_radius",
    "net_bound",
    "approximate_by_net",
]


def _as_points(R: Sequence[Sequence[float]] | np.ndarray, dim: int) -> np.ndarray:
    pts = np.asarray(R, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim == 1 else pts.reshape(1, -1)
    if pts.size == 0 or pts.shape[1] != dim:
        raise ValueError("R must be a nonempty set of points of the path dimension")
    if not np.all(np.isfinite(pts)):
        raise ValueError("R must contain finite points")
    return pts


def _check(delta: float, N: int) -> None:
    if not delta > 0.0 or not math.isfinite(delta):
        raise ValueError("delta must be a finite number > 0")
    if int(N) != N or N < 1:
        raise ValueError("N must be an integer >= 1")


def _cell(s: float, delta: float) -> int:
    """``floor(s / delta)``, robust to ``s`` being a float multiple of ``delta``."""
    k = math.floor(s / delta)
    if (k + 1) * delta <= s:
        k += 1
    elif k * delta > s:
        k -= 1
    return k


def in_net(x: StepPath, R: Sequence[Sequence[float]] | np.ndarray, delta: float, N: int,
           atol: float = 0.0) -> bool:
    """Whether ``x`` belongs to ``E(R, delta, N)``.

    Jump times must be multiples of ``delta`` (within ``atol``) and every
    value must be a point of ``R`` (within ``atol``).
    """
    _check(delta, N)
    pts = _as_points(R, x.dim)
    if x.xi > N * delta + atol:
        return False
    for s in x.times.tolist()[1:]:
        k = round(s / delta)
        if abs(k * delta - s) > atol:
            return False
    for v in x.values:
        if float(np.min(np.max(np.abs(pts - v), axis=1))) > atol:
            return False
    return True


def covering_radius(K: CompactSet, R: Sequence[Sequence[float]] | np.ndarray,
                    space: StateSpace | None = None, n_samples: int = 4096,
                    seed: int = 0, extra: np.ndarray | None = None) -> float:
    """``sup_{a in K} d(a, R)``.

    Exact for one-dimensional balls and boxes, where the farthest point is
    an endpoint of ``K`` or a midpoint between consecutive points of ``R``.
    In higher dimension it is the maximum over ``n_samples`` seeded points
    of ``K`` (plus ``extra``), which can only under-estimate the supremum.
    """
    dim = K.dim
    sp = space if space is not None else StateSpace(dim)
    pts = _as_points(R, dim)
    if dim == 1 and isinstance(K, (Ball, Box)):
        if isinstance(K, Ball):
            lo, hi = K.center[0] - K.radius, K.center[0] + K.radius
        else:
            lo, hi = K.lo[0], K.hi[0]
        r = np.sort(pts[:, 0])
        cands = [lo, hi]
        if sp.metric_kind == "chordal":
            # Chordal distance is monotone in the angle 2 arctan(a) on the circle.
            th = 2.0 * np.arctan(r)
            mids = [0.5 * (a + b) for a, b in zip(th, th[1:])]
            mids.append(0.5 * (th[-1] + th[0]) + math.pi)
            for m in mids:
                m = (m + math.pi) % (2.0 * math.pi) - math.pi
                if abs(m) < math.pi:
                    cands.append(math.tan(0.5 * m))
        else:
            cands += [0.5 * (a + b) for a, b in zip(r, r[1:])]
        cand = np.array([[c] for c in cands if lo <= c <= hi])
    else:
        rng = np.random.default_rng(seed)
        cand = _sample(K, rng, n_samples)
        if extra is not None and len(extra):
            ex = np.asarray(extra, dtype=float).reshape(-1, dim)
            cand = np.vstack([cand, ex[K.contains_many(ex)]])
    return float(sp.pairwise(cand, pts).min(axis=1).max())


def _sample(K: CompactSet, rng: np.random.Generator, n: int) -> np.ndarray:
    if isinstance(K, Ball):
        c = np.asarray(K.center, dtype=float)
        g = rng.normal(size=(n, K.dim))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        rad = K.radius * rng.random((n, 1)) ** (1.0 / K.dim)
        # Half the samples sit on the sphere, where the supremum often lives.
        rad[: n // 2] = K.radius
        return c + g * rad
    if isinstance(K, Box):
        lo, hi = np.asarray(K.lo, dtype=float), np.asarray(K.hi, dtype=float)
        return lo + (hi - lo) * rng.random((n, K.dim))
    raise ValueError(f"cannot sample from {type(K).__name__}")


def net_bound(x: StepPath, R: Sequence[Sequence[float]] | np.ndarray, delta: float, N: int,
              K: CompactSet, space: StateSpace | None = None, radius: float | None = None) -> float:
    """``(sup_{a in K} d(a, R) + omega'_{N delta, K, x}(delta)) v delta``."""
    _check(delta, N)
    sp = space if space is not None else StateSpace(x.dim)
    if radius is None:
        radius = covering_radius(K, R, sp, extra=x.values)
    om = omega_prime_subdivision(x, N * delta, K, delta, sp).value
    return max(radius + om, delta)


def approximate_by_net(x: StepPath, R: Sequence[Sequence[float]] | np.ndarray, delta: float,
                       N: int, K: CompactSet, space: StateSpace | None = None) -> StepPath | None:
    """A member of ``E(R, delta, N)`` within the net bound of ``x`` in ``rho_tilde_{N delta, K}``.

    Parameters
    ----------
    x : StepPath
    R : array_like, shape (n, dim)
        Finite nonempty set of values.
    delta : float
        Grid step, ``> 0``.
    N : int
        Number of grid cells, ``>= 1``.
    K : CompactSet
        The compact of the distance ``rho_tilde_{N delta, K}``.
    space : StateSpace, optional

    Returns
    -------
    StepPath or None
        ``None`` stands for the path that is dead from time 0, which is the
        answer when ``x_0`` is not interior to ``K``; its distance to ``x``
        is 0.  A path already in the net is returned unchanged.

    Notes
    -----
    Let ``t*`` be the first time ``x`` is at or past ``N delta``, outside
    the interior of ``K``, or exploded.  The cuts ``t_i < t*`` of an optimal
    subdivision for ``omega'_{N delta, K, x}(delta)`` move down to the grid
    and the explosion of the result moves up to ``ceil(t* / delta) delta``.
    """
    _check(delta, N)
    sp = space if space is not None else StateSpace(x.dim)
    pts = _as_points(R, x.dim)
    if in_net(x, pts, delta, N):
        return x
    horizon = N * delta
    if not K.interior_contains(x.values[0]):
        return None
    t_star = min(horizon, x.xi)
    for s, v in zip(x.times.tolist()[1:], x.values[1:]):
        if s >= t_star:
            break
        if not K.interior_contains(v):
            t_star = s
            break
    sub = omega_prime_subdivision(x, horizon, K, delta, sp).subdivision
    if not sub:
        # No admissible subdivision: the bound is infinite, any member will do.
        sub = tuple(x.times.tolist())
    cuts = [s for s in sub if s < t_star]
    end_cell = math.ceil(t_star / delta - 1e-12)
    cells: list[int] = []
    values: list[np.ndarray] = []
    for s in cuts:
        k = _cell(s, delta)
        if cells and k <= cells[-1]:
            continue
        if k >= end_cell:
            break
        v = x(s)
        near = pts[int(np.argmin(sp.pairwise(np.reshape(v, (1, -1)), pts)[0]))]
        cells.append(k)
        values.append(near)
    if end_cell <= cells[-1]:
        end_cell = cells[-1] + 1
    return StepPath([k * delta for k in cells], np.array(values), end_cell * delta)
