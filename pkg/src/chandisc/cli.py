"""Config-driven command-line front end.

Every command reads a JSON config (validated against the packaged schema),
runs the requested computation and writes its results into one run
directory: a config snapshot, a manifest (version, seed, optional
timestamp), and the result files described in docs/formats.md.  With a fixed
seed and --no-timestamp the emitted files are byte-identical across runs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import datetime
import importlib.resources
import json
import math
import sys
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import __version__, serialize
from .divergences import LN2, channel_divergence
from .errors import ChandiscError, ConfigError, ExcessiveCensoringError
from .optimize import OptimizerConfig
from .quantum import (
    DensityMatrix,
    amplitude_damping_channel,
    bernoulli_replacer,
    classical_channel,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    replacer_channel,
    validate_channel_pair,
)
from .regions import adaptive_region, containment, region_chain
from .sim import EXPECTATION, SimulationPlan, check_constraint, run_trials, sweep_budgets
from .strategies import build_non_adaptive, build_sprt, lift_to_blocks

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def _schema() -> dict:
    text = importlib.resources.files("chandisc").joinpath("config_schema.json").read_text()
    return json.loads(text)


def load_config(path: str | None, overrides: dict) -> dict:
    if path is None:
        raise ConfigError("--config is required")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected by schema: {exc.message}") from exc
    cfg.setdefault("seed", 0)
    cfg.setdefault("log_base", "e")
    cfg.setdefault("out", "run")
    return cfg


_ZOO = {
    "identity": lambda p: identity_channel(int(p.get("dim", 2))),
    "depolarizing": lambda p: depolarizing_channel(float(p["p"])),
    "amplitudeDamping": lambda p: amplitude_damping_channel(float(p["gamma"])),
    "dephasing": lambda p: dephasing_channel(float(p["p"])),
    "bernoulliReplacer": lambda p: bernoulli_replacer(float(p["q"])),
    "replacer": lambda p: replacer_channel(
        DensityMatrix(serialize.matrix_from_json(p["sigma"])),
        int(p["in_dim"]) if "in_dim" in p else None,
    ),
    "classical": lambda p: classical_channel(np.asarray(p["stochastic"], dtype=float)),
}


def build_channel(spec: dict):
    if "file" in spec:
        path = Path(spec["file"])
        if not path.is_file():
            raise ConfigError(f"channel file not found: {spec['file']}")
        return serialize.channel_from_json(json.loads(path.read_text()))
    name = spec["name"]
    params = spec.get("params", {})
    try:
        return _ZOO[name](params)
    except KeyError as exc:
        raise ConfigError(f"channel {name!r} missing parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for channel {name!r}: {exc}") from exc


def build_pair(cfg: dict):
    return build_channel(cfg["channels"]["n0"]), build_channel(cfg["channels"]["n1"])


def optimizer_config(cfg: dict) -> OptimizerConfig:
    opt = dict(cfg.get("optimizer", {}))
    opt.setdefault("seed", cfg.get("seed", 0))
    return OptimizerConfig(**opt)


def _convert(value: float, log_base: str) -> float:
    return value / LN2 if log_base == "2" else value


# ---------------------------------------------------------------------------
# run directory
# ---------------------------------------------------------------------------


def start_run(cfg: dict, command: str, no_timestamp: bool) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    # the output path is implied by the directory itself; omitting it keeps
    # replayed run directories byte-identical
    snapshot = {k: v for k, v in cfg.items() if k != "out"}
    (out / "config_snapshot.json").write_text(serialize.dumps(snapshot))
    manifest = {"version": __version__, "seed": cfg["seed"], "command": command}
    if not no_timestamp:
        manifest["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    (out / "manifest.json").write_text(serialize.dumps(manifest))
    return out


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="JSON experiment config (see docs/formats.md for keys).")
@click.option("--seed", type=int, default=None, help="Master RNG seed; overrides the config key.")
@click.option("--out", type=str, default=None, help="Run directory; overrides the config key.")
@click.option("--log-base", type=click.Choice(["e", "2"]), default=None, help="Report divergences in nats (e) or bits (2).")
@click.option("--no-timestamp", is_flag=True, help="Omit the timestamp from the manifest (byte-identical replays).")
@click.pass_context
def main(ctx, config_path, seed, out, log_base, no_timestamp):
    """Sequential discrimination of quantum channels: divergences, SPRT
    simulation, and error-exponent regions.

    Config keys: channels.n0/.n1 (zoo name + params, or a channel JSON
    file), seed, log_base, out, optimizer (restarts, max_iters, tolerances,
    pvm_restarts, seed), divergence (kinds, alpha, l), simulate (mode, n, l,
    tau, trials, constraint, epsilon), sweep (budgets, trials, constraint,
    epsilon), regions (which, l_max, alpha_grid, samples, slack).
    """
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["overrides"] = {"seed": seed, "out": out, "log_base": log_base}
    ctx.obj["no_timestamp"] = no_timestamp


def _load(ctx) -> dict:
    return load_config(ctx.obj["config_path"], ctx.obj["overrides"])


def _run_command(ctx, command: str, fn) -> None:
    try:
        cfg = _load(ctx)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        fn(cfg, start_run(cfg, command, ctx.obj["no_timestamp"]))
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ExcessiveCensoringError as exc:
        click.echo(f"simulation failed: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except ChandiscError as exc:
        click.echo(f"{command} failed: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


@main.command()
@click.pass_context
def divergence(ctx):
    """Compute the requested channel divergences and their witnesses."""

    def run(cfg, out):
        n0, n1 = build_pair(cfg)
        opts = cfg.get("divergence", {})
        kinds = opts.get("kinds", ["relative", "measured", "max"])
        alphas = opts.get("alpha", [2.0])
        base = cfg["log_base"]
        unit = "bits" if base == "2" else "nats"
        ocfg = optimizer_config(cfg)
        rows = []
        for kind in kinds:
            for alpha in alphas if kind == "renyi" else [None]:
                dv = channel_divergence(n0, n1, kind=kind, alpha=alpha, cfg=ocfg)
                row = {
                    "kind": kind,
                    "value": serialize._num_to_json(_convert(dv.value, base)),
                    "unit": unit,
                    "is_lower_bound": dv.is_lower_bound,
                    "is_finite": dv.is_finite,
                }
                if alpha is not None:
                    row["alpha"] = alpha
                if dv.witness is not None and getattr(dv.witness, "input_vector", None) is not None:
                    row["witness_input"] = serialize.vector_to_json(dv.witness.input_vector)
                    povm = getattr(dv.witness, "povm", None)
                    if povm is not None:
                        row["witness_povm"] = serialize.povm_to_json(povm)
                rows.append(row)
                label = f"{kind}" + (f"(alpha={alpha})" if alpha is not None else "")
                shown = "inf" if not dv.is_finite else f"{_convert(dv.value, base):.6f}"
                flag = " (lower bound)" if dv.is_lower_bound else ""
                click.echo(f"{label}: {shown} {unit}{flag}")
        (out / "divergences.json").write_text(serialize.dumps({"rows": rows}))

    _run_command(ctx, "divergence", run)


def _build_strategy(cfg, ocfg):
    n0, n1 = build_pair(cfg)
    opts = cfg.get("simulate", {})
    mode = opts.get("mode", "adaptive")
    n = opts.get("n", 400)
    tau = opts.get("tau")
    if mode == "adaptive":
        return build_sprt(n0, n1, n, tau, ocfg)
    if mode == "block":
        return lift_to_blocks(n0, n1, opts.get("l", 2), n, tau, ocfg)
    # non-adaptive: play the measured-divergence witness arm of the 0-vs-1
    # direction at every step
    dv = channel_divergence(n0, n1, kind="measured", cfg=ocfg)
    return build_non_adaptive(n0, n1, dv.witness.input_state, dv.witness.povm, n, tau)


@main.command()
@click.pass_context
def simulate(ctx):
    """Build a strategy, run Monte-Carlo trials and write the summary.

    Exits 0 whether or not the stopping-time constraint holds; the
    constraint report records the outcome."""

    def run(cfg, out):
        opts = cfg.get("simulate", {})
        ocfg = optimizer_config(cfg)
        strategy = _build_strategy(cfg, ocfg)
        plan = SimulationPlan(
            strategy=strategy,
            trials=opts.get("trials", 1000),
            base_seed=cfg["seed"],
            constraint=opts.get("constraint", EXPECTATION),
            epsilon=opts.get("epsilon", 0.05),
            step_cap_factor=opts.get("step_cap_factor", 20),
        )
        summary = run_trials(plan)
        report = check_constraint(summary, plan)
        (out / "strategy.json").write_text(serialize.dumps(serialize.strategy_to_json(strategy)))
        (out / "summary.csv").write_text(serialize.summary_to_csv(summary))
        (out / "constraint_report.json").write_text(
            serialize.dumps(
                {
                    "constraint": report.constraint,
                    "passed": report.passed,
                    "margins": report.margins,
                    "detail": report.detail,
                }
            )
        )
        status = "satisfied" if report.passed else "violated"
        click.echo(
            f"alpha_hat={summary.alpha_hat:.3e} beta_hat={summary.beta_hat:.3e} "
            f"constraint {status} ({report.detail})"
        )

    _run_command(ctx, "simulate", run)


@main.command()
@click.pass_context
def sweep(ctx):
    """Re-run one strategy over a list of budgets for convergence curves."""

    def run(cfg, out):
        opts = cfg.get("sweep", {})
        budgets = opts.get("budgets", [100, 200, 400, 800])
        ocfg = optimizer_config(cfg)
        strategy = _build_strategy(cfg, ocfg)
        records = sweep_budgets(
            strategy,
            budgets,
            trials=opts.get("trials", 1000),
            base_seed=cfg["seed"],
            constraint=opts.get("constraint", EXPECTATION),
            epsilon=opts.get("epsilon", 0.05),
        )
        (out / "sweep.csv").write_text(serialize.sweep_to_csv(records))
        for rec in records:
            click.echo(
                f"n={rec.n} exponents=({rec.exponent_alpha:.4f}, {rec.exponent_beta:.4f}) "
                f"bounds=({rec.bound_exponent_alpha:.4f}, {rec.bound_exponent_beta:.4f}) "
                f"constraint_passed={rec.report.passed}"
            )

    _run_command(ctx, "sweep", run)


@main.command()
@click.pass_context
def regions(ctx):
    """Compute the requested exponent regions and the containment matrix."""

    def run(cfg, out):
        n0, n1 = build_pair(cfg)
        opts = cfg.get("regions", {})
        which = opts.get("which", ["nonAdaptive", "adaptive", "converse"])
        l_max = opts.get("l_max", 2)
        ocfg = optimizer_config(cfg)
        named = []
        containments = {}
        if set(which) == {"adaptive"}:
            # rectangle-only: no sampling or hull computation
            for l in range(1, l_max + 1):
                named.append((f"adaptive_l{l}", adaptive_region(n0, n1, l=l, cfg=ocfg)))
        else:
            chain = region_chain(
                n0,
                n1,
                cfg=ocfg,
                l_max=l_max,
                alpha_grid=tuple(opts.get("alpha_grid", [1.05, 1.1, 1.5])),
                samples=opts.get("samples", 512),
                slack=opts.get("slack", 1e-3),
            )
            if "nonAdaptive" in which:
                named.append(("nonAdaptive", chain.non_adaptive))
            if "adaptive" in which:
                for l, region in sorted(chain.adaptive.items()):
                    named.append((f"adaptive_l{l}", region))
            if "converse" in which:
                named.append(("converse", chain.converse))
            containments = chain.containments
        for name, region in named:
            (out / f"region_{name}.csv").write_text(serialize.region_to_csv(region, name))
            (out / f"region_{name}.json").write_text(
                serialize.dumps(serialize.region_to_json(region))
            )
        (out / "regions_long.csv").write_text(serialize.regions_long_csv(named))
        matrix = {
            key: {"contained": rep.contained, "violations": rep.violations, "slack": rep.slack}
            for key, rep in containments.items()
        }
        (out / "containment_matrix.json").write_text(serialize.dumps(matrix))
        for key, rep in containments.items():
            click.echo(f"{key}: {'holds' if rep.contained else 'VIOLATED'}")
        for name, region in named:
            click.echo(f"{name}: {len(region.frontier)} frontier vertices")

    _run_command(ctx, "regions", run)


@main.command()
@click.pass_context
def validate(ctx):
    """Validate the config and report finiteness of the channel pair."""

    def run(cfg, out):
        n0, n1 = build_pair(cfg)
        report = validate_channel_pair(n0, n1)
        doc = {
            "finite_01": report.finite_01,
            "finite_10": report.finite_10,
            "both_finite": report.both_finite,
            "max_div_01": serialize._num_to_json(report.max_div_01),
            "max_div_10": serialize._num_to_json(report.max_div_10),
        }
        (out / "finiteness.json").write_text(serialize.dumps(doc))
        click.echo(
            f"config valid; max-divergence finite 0||1: {report.finite_01}, "
            f"1||0: {report.finite_10}"
        )

    _run_command(ctx, "validate", run)


if __name__ == "__main__":
    main()
