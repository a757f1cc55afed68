from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localskorokhod.errors import PathFormatError
from localskorokhod.metrics import rho_tilde
from localskorokhod.modulus import omega_prime
from localskorokhod.paths import StepPath, evaluate, exit_time, left_limit, truncate_at_exit
from localskorokhod.serialization import (
    dumps_path,
    load_path,
    loads_path,
    path_from_dict,
    path_to_dict,
    render_csv,
    save_path,
)
from localskorokhod.statespace import (
    DELTA,
    Ball,
    Box,
    Exhaustion,
    StateSpace,
    chordal_radius_to_norm,
)
from oracles import random_path

coords = st.floats(-50.0, 50.0, allow_nan=False)


def _jump_path() -> StepPath:
    return StepPath([0.0, 1.0], [0.0, 2.0])


# -- evaluation ---------------------------------------------------------------


def test_constant_path_evaluates_to_its_value() -> None:
    x = StepPath.constant([1.5, -2.0])
    assert np.array_equal(evaluate(x, 5.0), [1.5, -2.0])


def test_evaluate_is_right_continuous_at_jump() -> None:
    assert evaluate(_jump_path(), 1.0)[0] == 2.0


def test_evaluate_at_explosion_is_cemetery() -> None:
    x = StepPath.constant(0.0, xi=1.0)
    assert evaluate(x, 1.0) is DELTA
    assert evaluate(x, 7.0) is DELTA


def test_left_limit_examples() -> None:
    x = _jump_path()
    assert left_limit(x, 1.0)[0] == 0.0
    assert left_limit(x, 0.5)[0] == 0.0
    assert left_limit(StepPath.constant(3.0, xi=2.0), 2.0)[0] == 3.0
    assert left_limit(StepPath.constant(3.0, xi=2.0), 2.5) is DELTA


def test_left_limit_rejects_time_zero() -> None:
    with pytest.raises(ValueError):
        left_limit(_jump_path(), 0.0)


def test_evaluate_rejects_negative_time() -> None:
    with pytest.raises(ValueError):
        evaluate(_jump_path(), -1.0)


@pytest.mark.parametrize(
    "times, values, xi",
    [
        ([0.5], [1.0], math.inf),
        ([0.0, 1.0, 1.0], [1.0, 2.0, 3.0], math.inf),
        ([0.0, 2.0], [1.0, 2.0], 2.0),
        ([0.0], [1.0], 0.0),
        ([0.0], [math.nan], math.inf),
        ([0.0, 1.0], [1.0], math.inf),
        ([], [], math.inf),
    ],
)
def test_invalid_paths_are_rejected(times: list[float], values: list[float], xi: float) -> None:
    with pytest.raises(ValueError):
        StepPath(times, values, xi)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 4.0), st.floats(1e-9, 1.0))
def test_right_continuity_and_left_limits(seed: int, t: float, frac: float) -> None:
    x = random_path(np.random.default_rng(seed), 2, 5)
    if t >= x.xi:
        assert evaluate(x, t) is DELTA
        return
    i = x.segment_index(t)
    right_end = x.segment_ends()[i]
    h = frac * min(right_end - t, 1.0) * 0.5
    assert np.array_equal(evaluate(x, t + h), evaluate(x, t))
    if t > 0.0:
        prev = x.times[i] if x.times[i] < t else (x.times[i - 1] if i > 0 else 0.0)
        h = 0.5 * frac * (t - prev)
        if h > 0.0 and t - h > 0.0:
            assert np.array_equal(left_limit(x, t), evaluate(x, t - h))


# -- exit times and truncation ------------------------------------------------


def test_exit_time_examples() -> None:
    assert exit_time(StepPath.constant(0.0, xi=3.0), Ball((0.0,), 1.0)) == 3.0
    assert exit_time(StepPath([0.0, 1.0], [0.0, 5.0]), Ball((0.0,), 2.0)) == 1.0
    assert exit_time(StepPath.constant(0.0), Ball((3.0,), 1.0)) == 0.0
    assert exit_time(StepPath.constant(0.0), None) == math.inf


def test_exit_time_uses_open_interior() -> None:
    x = StepPath([0.0, 1.0], [0.0, 2.0])
    assert exit_time(x, Ball((0.0,), 2.0)) == 1.0
    assert exit_time(x, Box((-1.0,), (2.0,))) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 3.0), st.floats(0.0, 3.0))
def test_exit_time_monotone_in_region(seed: int, r: float, extra: float) -> None:
    x = random_path(np.random.default_rng(seed), 2, 5)
    small, big = Ball((0.0, 0.0), r), Ball((0.0, 0.0), r + extra)
    assert exit_time(x, small) <= exit_time(x, big)


def test_truncate_inside_is_unchanged() -> None:
    x = StepPath([0.0, 1.0], [0.0, 1.0])
    assert truncate_at_exit(x, Ball((0.0,), 2.0), 5.0) == x


def test_truncate_cuts_at_exit_jump() -> None:
    x = StepPath([0.0, 1.0], [0.0, 10.0])
    K = Ball((0.0,), 2.0)
    y = truncate_at_exit(x, K, 5.0)
    assert y == StepPath([0.0], [0.0], 1.0)
    assert rho_tilde(x, y, 5.0, K) == 0.0


def test_truncate_exploded_path_is_unchanged() -> None:
    x = StepPath.constant(0.5, xi=0.5)
    assert truncate_at_exit(x, Ball((0.0,), 2.0), 3.0) == x


def test_truncate_ignores_exits_after_horizon() -> None:
    x = StepPath([0.0, 4.0], [0.0, 10.0])
    assert truncate_at_exit(x, Ball((0.0,), 2.0), 3.0) == x


def test_truncation_preserves_distance_and_modulus() -> None:
    sp = StateSpace(1)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        x = random_path(rng, 1, 5, scale=2.0)
        K = Ball((0.0,), float(rng.uniform(0.5, 3.0)))
        t = float(rng.uniform(0.5, 3.5))
        y = truncate_at_exit(x, K, t)
        assert rho_tilde(x, y, t, K, sp) <= 1e-9
        for delta in (0.05, 0.3, 1.1):
            a = omega_prime(x, t, K, delta, sp)
            b = omega_prime(y, t, K, delta, sp)
            # A cut shorter than the mesh leaves no admissible subdivision.
            assert b == a or (math.isinf(b) and y.xi < x.xi)


# -- state space --------------------------------------------------------------


def _metric_axioms(sp: StateSpace, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> None:
    dab, dba = sp.dist(a, b), sp.dist(b, a)
    assert abs(dab - dba) <= 1e-12
    assert sp.dist(a, a) <= 1e-12
    assert sp.dist(a, c) <= dab + sp.dist(b, c) + 1e-12
    assert 0.0 <= dab <= sp.diameter + 1e-12
    if dab <= 1e-12:
        assert np.allclose(a, b, atol=1e-6)


@settings(max_examples=300, deadline=None)
@given(st.lists(coords, min_size=9, max_size=9), st.sampled_from(["chordal", "euclidean-truncated"]))
def test_point_metric_axioms(vals: list[float], kind: str) -> None:
    sp = StateSpace(3, kind)
    a, b, c = (np.array(vals[i:i + 3]) for i in (0, 3, 6))
    _metric_axioms(sp, a, b, c)
    for p in (a, b):
        assert sp.dist(p, DELTA) == sp.dist(DELTA, p)
        assert sp.dist(a, b) <= sp.dist(a, DELTA) + sp.dist(DELTA, b) + 1e-12


def test_chordal_distance_to_cemetery_vanishes_at_infinity() -> None:
    sp = StateSpace(2, "chordal")
    d = [sp.dist(np.array([r, 0.0]), DELTA) for r in (1.0, 10.0, 1e3, 1e6)]
    assert all(u > v for u, v in zip(d, d[1:]))
    assert d[-1] < 1e-5
    assert sp.dist(np.zeros(2), DELTA) == pytest.approx(2.0)


def test_chordal_radius_formula_inverts_distance() -> None:
    sp = StateSpace(1, "chordal")
    for r in (0.1, 0.5, 1.0, 1.9):
        R = chordal_radius_to_norm(r)
        assert sp.dist(np.array([R]), DELTA) == pytest.approx(r, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(coords, min_size=4, max_size=4), st.floats(0.1, 20.0))
def test_distance_to_complement_is_lipschitz(vals: list[float], r: float) -> None:
    for kind in ("chordal", "euclidean-truncated"):
        sp = StateSpace(2, kind)
        for K in (Ball((0.0, 0.0), r), Box((-r, -r / 2), (r, r))):
            a, b = np.array(vals[:2]), np.array(vals[2:])
            da, db = sp.dist_to_complement(np.vstack([a, b]), K)
            assert abs(da - db) <= sp.dist(a, b) + 1e-9
            assert (da == 0.0) == (not K.interior_contains(a))


def test_exhaustion_is_increasing_and_covers() -> None:
    ex = Exhaustion(2)
    for n in range(8):
        assert ex(n).radius == 2.0**n
        assert ex(n).radius < ex(n + 1).radius
    assert ex(10).contains(np.array([700.0, 700.0]))
    with pytest.raises(ValueError):
        Exhaustion(2, growth=1.0)


def test_statespace_rejects_bad_arguments() -> None:
    with pytest.raises(ValueError):
        StateSpace(0)
    with pytest.raises(ValueError):
        StateSpace(1, "manhattan")


# -- serialization ------------------------------------------------------------


def test_json_round_trip_is_byte_identical(tmp_path) -> None:
    for seed in range(50):
        x = random_path(np.random.default_rng(seed), 2, 5)
        f = tmp_path / f"p{seed}.json"
        save_path(x, f)
        text = f.read_text()
        y = load_path(f)
        assert y == x
        save_path(y, f)
        assert f.read_text() == text
        assert loads_path(dumps_path(x)) == x


def test_null_xi_means_infinite() -> None:
    x = path_from_dict({"dim": 1, "jumps": [{"t": 0, "v": [1]}], "xi": None})
    assert math.isinf(x.xi)
    assert path_to_dict(x)["xi"] is None


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ({"dim": 1, "jumps": [{"t": 0, "v": [1]}, {"t": 0, "v": [2]}]}, "jumps[1].t"),
        ({"dim": 1, "jumps": [{"t": 1, "v": [1]}]}, "jumps[0].t"),
        ({"dim": 2, "jumps": [{"t": 0, "v": [1]}]}, "jumps[0].v"),
        ({"dim": 1, "jumps": [{"t": 0, "v": ["a"]}]}, "jumps[0].v[0]"),
        ({"dim": 1, "jumps": [{"t": 0, "v": [1]}], "xi": -1}, "xi"),
        ({"dim": 1, "jumps": [{"t": 0, "v": [1]}, {"t": 2, "v": [1]}], "xi": 1}, "jumps[1].t"),
        ({"dim": 1, "jumps": []}, "jumps"),
        ({"dim": 1, "jumps": [{"t": 0, "v": [1]}], "extra": 1}, "unknown"),
        ({"jumps": [{"t": 0, "v": [1]}]}, "dim"),
    ],
)
def test_loader_errors_name_the_field(obj: dict, fragment: str) -> None:
    with pytest.raises(PathFormatError) as info:
        loads_path(json.dumps(obj), "f.json")
    assert fragment in str(info.value)
    assert "f.json" in str(info.value)


def test_loader_reports_json_position() -> None:
    with pytest.raises(PathFormatError, match="line 2"):
        loads_path('{"dim": 1,\n "jumps": [}', "bad.json")


def test_missing_file_is_named(tmp_path) -> None:
    with pytest.raises(PathFormatError, match="nope.json"):
        load_path(tmp_path / "nope.json")


def test_render_csv_formats_rows() -> None:
    text = render_csv(["a", "b"], [(1, 0.5), ("x", math.inf)])
    assert text.splitlines()[0] == "a,b"
    assert len(text.splitlines()) == 3


def test_chordal_ball_margin_is_accurate_near_the_center() -> None:
    sp = StateSpace(2, "chordal")
    a, b = np.array([1e-9, 0.0]), np.array([1.0, 0.0])
    da, db = sp.dist_to_complement(np.vstack([a, b]), Ball((0.0, 0.0), 1.0))
    assert db == 0.0
    assert da <= sp.dist(a, b) + 1e-15
