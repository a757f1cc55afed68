from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from analytic import changed_value, sampled_base, sampled_changed, turn_time
from localskorokhod.errors import NotRelativelyCompactError
from localskorokhod.metrics import local_metric
from localskorokhod.paths import StepPath
from localskorokhod.sim import OdeSpec, ode_path
from localskorokhod.statespace import Ball, Exhaustion
from localskorokhod.tightness import accumulating_family
from localskorokhod.timechange import (
    GFunction,
    GProfile,
    b_conditions,
    build_regularizing_g,
    clock,
    compare_sequence,
    compose_check,
    globalize,
    in_continuity_set,
    time_change,
)
from generators import dyadic_path, power_of_two_rate
from oracles import random_path
from sequences import make_case

IDENTITY = GFunction.constant(1.0)
LINEAR = GFunction.from_expr("abs(a0)", 1)


# -- clock --------------------------------------------------------------------


def test_identity_clock() -> None:
    x = StepPath([0.0, 1.0, 2.5], [0.0, 1.0, 2.0])
    c = clock(IDENTITY, x)
    for s in (0.0, 0.3, 1.0, 2.7, 9.0):
        assert c.A(s) == s
        assert c.tau(s) == s
    assert c.hits_infinity


def test_clock_hand_integration() -> None:
    c = clock(LINEAR, StepPath([0.0, 1.0], [1.0, 2.0], xi=2.0))
    assert c.slopes == (Fraction(1), Fraction(1, 2))
    assert c.A(Fraction(2)) == Fraction(3, 2)
    assert c.total == Fraction(3, 2)
    assert c.tau_inf == 2.0


def test_clock_stops_at_zero_set() -> None:
    c = clock(LINEAR, StepPath([0.0, 1.0], [1.0, 0.0]))
    assert c.tau_inf == 1.0
    assert c.zero_hit_index == 1
    assert c.A(1.0) == 1.0
    assert c.A(1.5) == math.inf
    assert c.tau(math.inf) == 1.0


def test_clock_rejects_negative_rate() -> None:
    g = GFunction(lambda a: float(a[0]), label="raw")
    with pytest.raises(ValueError, match="must be finite and >= 0"):
        clock(g, StepPath([0.0, 1.0], [1.0, -1.0]))


def test_clock_rejects_undeclared_zero() -> None:
    g = GFunction(lambda a: max(float(a[0]), 0.0), label="raw")
    with pytest.raises(ValueError, match="zero set"):
        clock(g, StepPath([0.0, 1.0], [1.0, -1.0]))


def test_clock_inverse_is_exact() -> None:
    for seed in range(200):
        rng = np.random.default_rng(seed)
        x = dyadic_path(rng, int(rng.integers(1, 6)))
        g = GFunction(lambda a: 1.0 + abs(float(a[0])) / 3.0, label="1+|a|/3")
        c = clock(g, x)
        end = c.tau_inf if math.isfinite(c.tau_inf) else float(x.times[-1]) + 2.0
        for _ in range(10):
            s = Fraction(int(rng.integers(0, 10**6)), 10**6) * Fraction(end)
            if math.isinf(c.tau_inf) or s < Fraction(c.tau_inf):
                assert c.tau(c.A(s)) == s


# -- time change --------------------------------------------------------------


def test_uniform_speed_up() -> None:
    x = StepPath([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    y = time_change(GFunction.constant(2.0), x)
    assert y.times.tolist() == [0.0, 0.5, 1.0]
    assert np.array_equal(y.values, x.values)
    assert math.isinf(y.xi)


def test_absorption_at_zero_set() -> None:
    y = time_change(LINEAR, StepPath([0.0, 1.0], [1.0, 0.0]))
    assert y == StepPath([0.0, 1.0], [1.0, 0.0])


def test_identity_rate_keeps_explosion() -> None:
    x = StepPath([0.0, 0.5], [1.0, 3.0], xi=2.0)
    assert time_change(IDENTITY, x) == x


def test_zero_rate_at_start_freezes() -> None:
    y = time_change(LINEAR, StepPath([0.0, 1.0], [0.0, 5.0], xi=3.0))
    assert y == StepPath.constant(0.0)


def test_explosion_time_is_clock_total() -> None:
    x = StepPath([0.0, 1.0], [1.0, 2.0], xi=2.0)
    y = time_change(LINEAR, x)
    assert y.xi == 1.5
    assert y.times.tolist() == [0.0, 1.0]


def test_bounded_rate_preserves_infinite_lifetime() -> None:
    bump = GFunction(lambda a: 0.25 + math.exp(-float(np.dot(a, a))), bound=1.25, label="bump")
    for seed in range(300):
        rng = np.random.default_rng(seed)
        x = random_path(rng, 2, 5, explode_prob=0.0)
        for g in (bump, GFunction.constant(0.5), GFunction.coordinate(0, shift=0.0)):
            y = time_change(g, x)
            assert math.isinf(y.xi)


def test_output_is_valid_path_for_locally_bounded_rates() -> None:
    g = GFunction.from_expr("1 + r*r", 2)
    for seed in range(100):
        x = random_path(np.random.default_rng(seed), 2, 5)
        y = time_change(g, x)
        assert isinstance(y, StepPath)
        assert y.n_segments == x.n_segments


def test_compose_trivial_rates() -> None:
    x = StepPath([0.0, 1.0], [0.0, 1.0], xi=2.5)
    assert compose_check(IDENTITY, IDENTITY, x, rtol=0.0)


def test_compose_is_exact_on_dyadic_instances() -> None:
    for seed in range(300):
        rng = np.random.default_rng(seed)
        x = dyadic_path(rng, int(rng.integers(1, 5)))
        assert compose_check(power_of_two_rate(rng), power_of_two_rate(rng), x, rtol=0.0)


def test_compose_with_absorbing_inner_rate() -> None:
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = random_path(rng, 1, 3)
        g2 = GFunction.coordinate(0, shift=float(rng.normal()))
        g1 = GFunction.from_expr("1 + a0*a0", 1)
        assert compose_check(g1, g2, x)
        assert compose_check(g2, g1, x)


def test_rate_product_zero_set_is_union() -> None:
    g = GFunction.coordinate(0, shift=0.0) * GFunction.coordinate(0, shift=1.0, scale=2.0)
    assert g.is_zero(np.array([0.5]))
    assert not g.is_zero(np.array([1.5]))
    assert g.checked(np.array([2.0])) == pytest.approx(2.0 * 2.0)


# -- continuity set -----------------------------------------------------------


def test_positive_rate_is_in_continuity_set() -> None:
    for seed in range(50):
        x = random_path(np.random.default_rng(seed), 1, 4)
        assert in_continuity_set(GFunction.from_expr("1 + a0*a0", 1), x)


def test_jump_into_zero_set_is_in_continuity_set() -> None:
    b = b_conditions(LINEAR, StepPath([0.0, 1.0], [1.0, 0.0]))
    assert b.divergent_after_stop and b.left_limit_frozen and b.holds


def test_step_paths_cannot_violate_the_left_limit_condition() -> None:
    # The left limit at the stopping time is an earlier segment value, where
    # the rate is positive, so the condition holds for any step path.
    g = GFunction.coordinate(0, shift=0.5)
    assert in_continuity_set(g, StepPath([0.0, 1.0], [1.0, 0.5]))
    for seed in range(300):
        rng = np.random.default_rng(seed)
        x = random_path(rng, 1, 5)
        assert in_continuity_set(GFunction.coordinate(0, shift=float(rng.normal())), x)


def test_same_zero_set_and_smaller_rate_stays_in_continuity_set() -> None:
    for seed in range(40):
        case = make_case(seed)
        assert in_continuity_set(case.g, case.x)
        h = GFunction(lambda a, f=case.g.func: 0.5 * f(a) * math.exp(-float(a[0]) ** 2),
                      case.g.is_zero, label="h")
        assert in_continuity_set(h, case.x)


def test_continuity_along_sequences_in_continuity_set() -> None:
    ex = Exhaustion(1)
    for seed in range(8):
        case = make_case(seed)
        gx = time_change(case.g, case.x)
        ups = [local_metric(time_change(case.g_k(k), case.x_k(k)), gx, ex, 12)[1]
               for k in (5, 50)]
        assert ups[1] < ups[0]
        assert ups[1] < 1e-3


def test_closed_form_matches_discretized_time_change() -> None:
    g = GFunction.from_expr("sqrt(abs(a0))", 1)
    for c in (0.0, 0.05):
        y = time_change(g, sampled_base(c, 1e-3, 8.0))
        assert math.isinf(y.xi)
        for t in np.linspace(0.0, 3.0, 31):
            assert abs(y(float(t))[0] - changed_value(c, float(t))) < 0.02
    assert turn_time(0.0) == 2.0


def test_outside_continuity_set_distance_stays_large() -> None:
    ex = Exhaustion(1)
    limit = sampled_changed(0.0, 0.05, 10.0)
    for k in (50, 1000):
        before = local_metric(sampled_base(1.0 / k, 0.05, 10.0), sampled_base(0.0, 0.05, 10.0), ex, 8)
        after = local_metric(sampled_changed(1.0 / k, 0.05, 10.0), limit, ex, 8)
        assert before[1] < 0.05
        assert after[0] >= 0.1


# -- regularizing rate --------------------------------------------------------


def test_regularizing_rate_for_constant_path() -> None:
    x = StepPath.constant(0.3)
    prof = build_regularizing_g([x], n_max=6)
    g = prof.as_gfunction()
    assert g(np.array([0.3])) > 0.0
    assert in_continuity_set(g, x)


def test_regularizing_etas_nonincreasing_and_profile_bound() -> None:
    D = [ode_path(OdeSpec("intro", (x0,), base_step=0.05, max_increment=0.2)) for x0 in (1.0, 2.5, 3.0)]
    prof = build_regularizing_g(D, n_max=8)
    assert len(prof.etas) == 9
    assert all(b <= a for a, b in zip(prof.etas, prof.etas[1:]))
    rng = np.random.default_rng(0)
    for a in rng.normal(0.0, 30.0, (500, 1)):
        m = prof.margin(a)
        for n in range(9):
            if m <= 2.0**-n:
                assert prof(a) <= 2.0**-n * prof.etas[n] + 1e-15


def test_regularized_explosive_paths_have_left_limits_at_explosion() -> None:
    D = [ode_path(OdeSpec("intro", (x0,), base_step=0.05, max_increment=0.2)) for x0 in (2.5, 3.0, 4.0)]
    assert all(math.isfinite(x.xi) for x in D)
    g = build_regularizing_g(D, n_max=10).normalized().as_gfunction()
    for x in D:
        y, rep = globalize(x, g)
        assert rep.in_local and rep.in_global
        assert math.isfinite(y.xi)
        assert rep.explosion_from_U is True
        assert y.left_limit(y.xi) is not None


def test_regularizing_rate_zero_set_is_U() -> None:
    U = Ball((0.0,), 2.0)
    prof = build_regularizing_g([StepPath([0.0, 1.0], [0.0, 1.0])], U=U, n_max=5)
    assert prof.in_U(np.array([1.9])) and prof(np.array([1.9])) > 0.0
    assert prof(np.array([2.0])) == 0.0 and prof(np.array([-3.0])) == 0.0


def test_regularizing_rate_rejects_accumulating_jumps() -> None:
    with pytest.raises(NotRelativelyCompactError):
        build_regularizing_g(accumulating_family(50), n_max=2, j_max=4)


def test_profile_serialization_round_trip() -> None:
    prof = build_regularizing_g([StepPath([0.0, 1.0], [0.0, 1.0])], U=Ball((0.5,), 3.0), n_max=4)
    back = GProfile.from_dict(prof.to_dict())
    assert back == prof
    g = GFunction.from_spec({"kind": "radial-profile", **prof.to_dict()}, 1)
    assert g(np.array([0.7])) == prof(np.array([0.7]))


def test_profile_validation() -> None:
    with pytest.raises(ValueError):
        GProfile(1, ((0.5, 1.0), (0.25, 2.0)))
    with pytest.raises(ValueError):
        GProfile(1, ((0.5, 1.0),), center=(0.0,))


def test_globalize_identity() -> None:
    x = StepPath([0.0, 1.0], [0.0, 1.0])
    y, rep = globalize(x, IDENTITY)
    assert y == x
    assert rep.in_local and rep.in_global and rep.explosion_from_U is None


def _climb(k: int, back: bool) -> StepPath:
    times = [0.0] + [1.0 - 2.0**-j for j in range(1, k + 1)]
    vals = [0.0] + [10.0**j for j in range(k)]
    if back:
        return StepPath(times + [1.0], [[v] for v in vals + [0.0]])
    return StepPath(times, [[v] for v in vals], xi=1.0)


def test_time_change_restores_global_convergence() -> None:
    x = _climb(10, back=False)
    xs = [_climb(k, back=True) for k in range(2, 7)]
    g = build_regularizing_g(xs + [x], n_max=10).normalized().as_gfunction()
    rows = compare_sequence(xs, x, g, n_terms=8)
    assert all(r["global_before"] >= 0.4 for r in rows)
    assert rows[-1]["local_before"] <= 2.0**-6
    assert rows[-1]["global_after"] <= 2.0**-6
    assert rows[-1]["global_after"] < rows[0]["global_after"]


# -- rate mappings ------------------------------------------------------------


@pytest.mark.parametrize(
    "mapping, point, value",
    [
        ({"kind": "constant", "value": 2.5}, [1.0], 2.5),
        ({"kind": "coordinate", "index": 0, "shift": 1.0, "scale": 3.0}, [2.0], 3.0),
        ({"kind": "expr", "expr": "sqrt(a0*a0 + 1)"}, [0.0], 1.0),
        ({"kind": "expr", "expr": "max(r - 1, 0)"}, [3.0], 2.0),
    ],
)
def test_rate_from_mapping(mapping: dict, point: list[float], value: float) -> None:
    assert GFunction.from_spec(mapping, 1)(np.array(point)) == pytest.approx(value)


@pytest.mark.parametrize(
    "mapping",
    [
        {"kind": "bogus"},
        {"kind": "constant", "value": -1.0},
        {"kind": "constant", "extra": 1},
        {"kind": "coordinate", "index": 3},
        {"kind": "expr", "expr": "__import__('os')"},
        {"kind": "expr", "expr": "a0 +"},
        {"kind": "expr", "expr": "a7"},
    ],
)
def test_rate_mapping_errors(mapping: dict) -> None:
    with pytest.raises(ValueError):
        GFunction.from_spec(mapping, 1)
