"""``localsko`` command-line interface.

Exit codes: 0 on success, 2 on bad input or configuration, 3 when an
internal consistency check fails.  Outputs go to stdout, or atomically to
the file named by ``--out``.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np

from .config import Config, RegionConfig, load_config
from .errors import ConfigError, InvariantViolation, PathFormatError
from .metrics import local_metric, rho, rho_tilde
from .modulus import omega_prime
from .serialization import atomic_write_text, dumps_path, load_path, render_csv
from .sim import DEMO_SPEC, JumpSpec, OdeSpec, continuity_demo, levy_step_path, ode_path, straddling_pair
from .statespace import Ball, CompactSet
from .tightness import (EnsembleSampler, accumulating_family, aldous_statistic, compactness_report,
                        half_width, refinement_family, tightness_statistic)
from .timechange import GFunction, time_change

__all__ = ["main"]

EXIT_INPUT = 2
EXIT_INVARIANT = 3


class _Ctx:
    def __init__(self, config: Config, seed: int, jobs: int, out: str | None) -> None:
        self.config = config
        self.seed = seed
        self.jobs = jobs
        self.out = out

    def emit(self, text: str) -> None:
        if self.out is None:
            click.echo(text, nl=False)
            return
        target = Path(self.out)
        if self.config.output_dir is not None and not target.is_absolute():
            target = Path(self.config.output_dir) / target
        atomic_write_text(target, text)


def _guard(fn: Callable[..., None]) -> Callable[..., None]:
    @functools.wraps(fn)
    def run(*args: Any, **kwargs: Any) -> None:
        try:
            fn(*args, **kwargs)
        except InvariantViolation as exc:
            click.echo(f"internal check failed: {exc}", err=True)
            sys.exit(EXIT_INVARIANT)
        except (ConfigError, PathFormatError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return run


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ValueError(f"{what}: empty list")
    return vals


def _region(radius: float, center: str | None, dim: int) -> CompactSet:
    c = _floats(center, "--center") if center else [0.0] * dim
    if len(c) != dim:
        raise ValueError("--center has the wrong dimension")
    return Ball(tuple(c), radius)


def _json_arg(text: str, what: str) -> Any:
    """Inline JSON, or ``@file`` to read it from a file."""
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{what}: cannot read {text[1:]} ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


@click.group()
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None,
              help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Seed; overrides the config.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes for Monte-Carlo loops.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the result here instead of stdout.")
@click.pass_context
def main(ctx: click.Context, config_file: str | None, seed: int | None, jobs: int,
         out: str | None) -> None:
    """Distances, moduli, time changes and tightness diagnostics for step paths."""
    try:
        cfg = load_config(config_file)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    ctx.obj = _Ctx(cfg, cfg.seed if seed is None else seed, jobs, out)


@main.command()
@click.argument("path_a", type=click.Path(dir_okay=False))
@click.argument("path_b", type=click.Path(dir_okay=False))
@click.option("--t", "t", type=float, required=True, help="Time horizon.")
@click.option("--radius", type=float, default=10.0, show_default=True, help="Radius of K.")
@click.option("--center", default=None, help="Center of K, comma-separated (default origin).")
@click.option("--n-terms", type=click.IntRange(min=1), default=None, help="Terms of the local metric.")
@click.pass_obj
@_guard
def dist(obj: _Ctx, path_a: str, path_b: str, t: float, radius: float, center: str | None,
         n_terms: int | None) -> None:
    """Distances rho_tilde, rho and the local-metric bracket between two path files."""
    x, y = load_path(path_a), load_path(path_b)
    if x.dim != y.dim:
        raise ValueError("the two paths have different dimensions")
    cfg = obj.config
    K = _region(radius, center, x.dim)
    sp = cfg.space(x.dim)
    tol = cfg.tolerances.bisection
    rt = rho_tilde(x, y, t, K, sp, tol)
    r = rho(x, y, t, K, sp, tol)
    lo, hi = local_metric(x, y, cfg.exhaustion_for(x.dim), n_terms or cfg.n_terms, sp, tol)
    if rt > r + 2 * tol or lo > hi:
        raise InvariantViolation(f"distance ordering broken: rho_tilde={rt!r} rho={r!r}")
    obj.emit(_json({"rho_tilde": rt, "rho": r, "local_lower": lo, "local_upper": hi}))


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--t", "t", type=float, required=True, help="Time horizon.")
@click.option("--radius", type=float, default=10.0, show_default=True, help="Radius of K.")
@click.option("--center", default=None, help="Center of K, comma-separated (default origin).")
@click.option("--deltas", required=True, help="Comma-separated grid of delta values.")
@click.pass_obj
@_guard
def omega(obj: _Ctx, path: str, t: float, radius: float, center: str | None, deltas: str) -> None:
    """The modulus curve delta -> omega'_{t,K,x}(delta) as CSV."""
    x = load_path(path)
    grid = _floats(deltas, "--deltas")
    K = _region(radius, center, x.dim)
    sp = obj.config.space(x.dim)
    vals = [omega_prime(x, t, K, d, sp) for d in grid]
    order = sorted(range(len(grid)), key=lambda k: grid[k])
    if any(vals[a] > vals[b] for a, b in zip(order, order[1:])):
        raise InvariantViolation("modulus curve is not monotone in delta")
    obj.emit(render_csv(("delta", "omega_prime"), zip(grid, vals)))


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--g", "gspec", required=True,
              help='Rate function as JSON (or @file), e.g. \'{"kind": "constant", "value": 2}\'.')
@click.pass_obj
@_guard
def timechange(obj: _Ctx, path: str, gspec: str) -> None:
    """Time-change a path file by a rate function; prints the new path."""
    x = load_path(path)
    spec = _json_arg(gspec, "--g")
    if not isinstance(spec, dict):
        raise ConfigError("--g: expected a JSON object")
    g = GFunction.from_spec(spec, x.dim)
    y = time_change(g, x)
    if g.bound is not None and math.isinf(x.xi) and not math.isinf(y.xi):
        raise InvariantViolation("a bounded rate produced an explosion")
    obj.emit(dumps_path(y))


@main.command()
@click.pass_obj
@_guard
def compactness(obj: _Ctx) -> None:
    """Modulus curves of a path family (config section 'compactness') as CSV."""
    cc = obj.config.compactness
    if cc is None:
        raise ConfigError("config has no 'compactness' section")
    if cc.family == "accumulating":
        D = accumulating_family(cc.n_max)
    elif cc.family == "refinement":
        f = GFunction.from_expr(cc.f_expr, 1).func
        D = refinement_family(lambda s: f(np.array([s])), cc.m_max)
    else:
        if not cc.paths:
            raise ConfigError("compactness.paths: need at least one path file")
        D = [load_path(p) for p in cc.paths]
    dim = D[0].dim
    Ks = [r.build() for r in cc.regions]
    curves = compactness_report(D, cc.t_list, Ks, cc.delta_grid, obj.config.tolerances.compact,
                                obj.config.space(dim))
    rows = []
    for c in curves:
        for d, v in zip(c.deltas, c.values):
            rows.append((c.t, c.region, d, v, c.verdict))
    obj.emit(render_csv(("t", "region", "delta", "sup_omega_prime", "verdict"), rows))


@main.command()
@click.pass_obj
@_guard
def tight(obj: _Ctx) -> None:
    """Monte-Carlo tightness statistics (config section 'tight') as CSV.

    With ``statistic = both`` the sampler labels are prefixed by
    ``omega/`` or ``alpha/``.
    """
    tc = obj.config.tight
    if tc is None:
        raise ConfigError("config has no 'tight' section")
    samplers = [EnsembleSampler.from_dict(s) for s in tc.samplers]
    region = tc.region.build() if tc.region is not None else None
    rows: list[tuple] = []
    dim = _sampler_dim(samplers)
    sp = obj.config.space(dim)
    reports = []
    if tc.statistic in ("omega", "both"):
        K = region if region is not None else _whole_ball(dim)
        reports.append(("omega/", tightness_statistic(samplers, tc.t, K, tc.epsilon, tc.delta_grid,
                                                      tc.n_mc, obj.seed, sp, obj.jobs)))
    if tc.statistic in ("aldous", "both"):
        reports.append(("alpha/", aldous_statistic(samplers, tc.epsilon, tc.t, region, tc.delta_grid,
                                                   tc.n_mc, obj.seed, sp, obj.jobs)))
    for prefix, rep in reports:
        for r in rep.rows:
            if not 0.0 <= r.estimate <= 1.0 or r.half_width != half_width(r.estimate, r.n_mc):
                raise InvariantViolation(f"bad estimate row {r!r}")
            label = (prefix if tc.statistic == "both" else "") + r.sampler_label
            rows.append((label, r.epsilon, r.t, r.region, r.delta, r.estimate, r.half_width, r.n_mc))
    header = ("sampler_label", "epsilon", "t", "region", "delta", "estimate", "half_width", "n_mc")
    obj.emit(render_csv(header, rows))


def _sampler_dim(samplers: list[EnsembleSampler]) -> int:
    for s in samplers:
        if s.kind == "levy":
            return len(s.params.get("x0", [0.0]))
        if s.kind == "fixed":
            return int(s.params["path"]["dim"])
    return 1


def _whole_ball(dim: int) -> CompactSet:
    # Stands in for "K contains every value" when no region is configured.
    return RegionConfig(kind="ball", center=[0.0] * dim, radius=1e12).build()


@main.command()
@click.argument("kind", type=click.Choice(["ode", "levy"]))
@click.argument("spec", type=click.Path(dir_okay=False))
@click.pass_obj
@_guard
def simulate(obj: _Ctx, kind: str, spec: str) -> None:
    """Generate a path from an ODE or jump spec file; prints the path."""
    data = _json_arg("@" + spec, "spec")
    if not isinstance(data, dict):
        raise ConfigError(f"{spec}: expected a JSON object")
    try:
        path = ode_path(OdeSpec.from_dict(data)) if kind == "ode" else \
            levy_step_path(JumpSpec.from_dict(data), obj.seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{spec}: {exc}") from None
    obj.emit(dumps_path(path))


@main.command()
@click.pass_obj
@_guard
def demo(obj: _Ctx) -> None:
    """Local versus global distances of explosive ODE paths (config section 'demo') as CSV."""
    from .config import DemoConfig

    dc = obj.config.demo if obj.config.demo is not None else DemoConfig()
    spec = DEMO_SPEC if dc.ode is None else OdeSpec.from_dict({"x0": [2.0], **dc.ode})
    x0s = dc.x0_list if dc.x0_list is not None else list(straddling_pair(spec, obj.seed, dc.gap))
    rep = continuity_demo(x0s, spec, None, dc.n_terms, dc.t_rho, obj.config.exhaustion_for(1),
                          dc.n_max, dc.tol)
    obj.emit(rep.to_csv())


if __name__ == "__main__":  # pragma: no cover
    main()
