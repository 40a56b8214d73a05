"""Command-line surface: verify, tradeoff, solve, scan, learn, catalog.

Exit codes: 0 verified/success, 1 checked-and-false, 2 usage/input error,
3 internal solver failure. Reports go to stdout as JSON; diagnostics go to
stderr. Randomized commands take an explicit --seed (default 0), which is
recorded in their outputs.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import catalog, serialize
from .core import CorrelatedStrategy, StrategyProfile
from .equilibrium import (
    scan_ne_ser_grid,
    solve_ce_esr,
    tradeoff_game,
    verify_ce_esr,
    verify_ce_ser_multi,
    verify_ce_ser_single,
    verify_ne_esr,
    verify_ne_ser,
)
from .errors import MonfgError, SolverError
from .learning import ExperimentConfig, SignalMode, run_experiment, write_metrics
from .optim import OptConfig

EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class CliInputError(click.ClickException):
    exit_code = EXIT_INPUT


def _fail_input(message: str) -> "CliInputError":
    return CliInputError(message)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _fail_input(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise _fail_input(f"{path} is not valid JSON: {exc}")


def _resolve_game(spec: str):
    try:
        entry = catalog.get(spec)
    except MonfgError:
        entry = None
    if entry is not None:
        if entry.kind != "game":
            raise _fail_input(f"catalog entry {spec!r} is a {entry.kind}, not a game")
        return entry.payload
    try:
        return serialize.game_from_dict(_load_json(spec))
    except MonfgError as exc:
        raise _fail_input(f"game {spec!r}: {exc}")


def _resolve_utilities(spec: str):
    try:
        entry = catalog.get(spec)
    except MonfgError:
        entry = None
    if entry is not None:
        if entry.kind != "utility_pair":
            raise _fail_input(
                f"catalog entry {spec!r} is a {entry.kind}, not a utility_pair"
            )
        return entry.payload
    data = _load_json(spec)
    if not isinstance(data, list):
        raise _fail_input(f"utilities file {spec!r} must hold a JSON list")
    try:
        return serialize.utilities_from_list(data)
    except (MonfgError, KeyError) as exc:
        raise _fail_input(f"utilities {spec!r}: {exc}")


def _resolve_profile(spec: str) -> StrategyProfile:
    try:
        entry = catalog.get(spec)
    except MonfgError:
        entry = None
    if entry is not None:
        if entry.kind != "profile":
            raise _fail_input(f"catalog entry {spec!r} is a {entry.kind}, not a profile")
        return entry.payload
    try:
        return serialize.profile_from_list(_load_json(spec))
    except MonfgError as exc:
        raise _fail_input(f"strategy profile {spec!r}: {exc}")


def _resolve_correlated(spec: str) -> CorrelatedStrategy:
    try:
        entry = catalog.get(spec)
    except MonfgError:
        entry = None
    if entry is not None:
        if entry.kind != "correlated_strategy":
            raise _fail_input(
                f"catalog entry {spec!r} is a {entry.kind}, not a correlated_strategy"
            )
        return entry.payload
    try:
        return serialize.correlated_from_list(_load_json(spec))
    except MonfgError as exc:
        raise _fail_input(f"correlated strategy {spec!r}: {exc}")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MONFG_THREADS", "1")))
    except ValueError:
        return 1


@click.group()
def main() -> None:
    """Analyze multi-objective normal-form games under ESR and SER."""


def entrypoint() -> None:
    """Console-script wrapper enforcing the exit-code contract."""
    try:
        main(standalone_mode=True)
    except MonfgError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except Exception as exc:
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)


@main.command()
@click.option("--game", "game_spec", required=True, help="Catalog name or game JSON path.")
@click.option("--utilities", "util_spec", required=True, help="Catalog name or utilities JSON path.")
@click.option("--candidate", required=True, help="Catalog name or strategy JSON path.")
@click.option(
    "--concept",
    required=True,
    type=click.Choice(["ne-esr", "ne-ser", "ce-esr", "ce-ser-single", "ce-ser-multi"]),
)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Optimizer seed (ne-ser).")
def verify(game_spec, util_spec, candidate, concept, tol, seed) -> None:
    """Check a candidate strategy against an equilibrium concept."""
    game = _resolve_game(game_spec)
    utilities = _resolve_utilities(util_spec)
    try:
        if concept in ("ne-esr", "ne-ser"):
            profile = _resolve_profile(candidate)
            if concept == "ne-esr":
                report = verify_ne_esr(game, utilities, profile, tol)
            else:
                report = verify_ne_ser(
                    game, utilities, profile, tol, OptConfig(seed=seed)
                )
        else:
            sigma = _resolve_correlated(candidate)
            checker = {
                "ce-esr": verify_ce_esr,
                "ce-ser-single": verify_ce_ser_single,
                "ce-ser-multi": verify_ce_ser_multi,
            }[concept]
            report = checker(game, utilities, sigma, tol)
    except MonfgError as exc:
        raise _fail_input(str(exc))
    click.echo(json.dumps(serialize.report_to_dict(report), indent=2))
    if not report.verdict:
        sys.exit(EXIT_FALSE)


@main.command()
@click.option("--game", "game_spec", required=True)
@click.option("--utilities", "util_spec", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def tradeoff(game_spec, util_spec, out_path) -> None:
    """Write the scalarised single-objective trade-off game."""
    game = _resolve_game(game_spec)
    utilities = _resolve_utilities(util_spec)
    try:
        reduced = tradeoff_game(game, utilities)
    except MonfgError as exc:
        raise _fail_input(str(exc))
    with open(out_path, "w") as fh:
        json.dump(serialize.game_to_dict(reduced), fh, indent=2)
        fh.write("\n")
    click.echo(json.dumps({"written": str(out_path), "objectives": 1}))


@main.command()
@click.option("--game", "game_spec", required=True)
@click.option("--utilities", "util_spec", required=True)
@click.option("--concept", default="ce-esr", type=click.Choice(["ce-esr"]), show_default=True)
@click.option("--objective", default="feasible", show_default=True,
              help="feasible | max-sum | max-player=K (1-based player index)")
@click.option("--out", "out_path", required=True, type=click.Path())
def solve(game_spec, util_spec, concept, objective, out_path) -> None:
    """Compute a correlated equilibrium under ESR by linear programming."""
    game = _resolve_game(game_spec)
    utilities = _resolve_utilities(util_spec)
    player = None
    if objective == "feasible":
        obj = "feasible"
    elif objective == "max-sum":
        obj = "max_sum"
    elif objective.startswith("max-player="):
        obj = "max_player"
        try:
            player = int(objective.split("=", 1)[1]) - 1
        except ValueError:
            raise _fail_input(f"bad player index in objective {objective!r}")
        if not 0 <= player < game.num_players:
            raise _fail_input(f"player index out of range in objective {objective!r}")
    else:
        raise _fail_input(f"unknown objective {objective!r}")
    try:
        sigma = solve_ce_esr(game, utilities, obj, player)
    except SolverError as exc:
        click.echo(f"internal solver failure: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    except MonfgError as exc:
        raise _fail_input(str(exc))
    with open(out_path, "w") as fh:
        json.dump(serialize.correlated_to_list(sigma), fh)
        fh.write("\n")
    report = verify_ce_esr(game, utilities, sigma, tol=1e-7)
    values = [
        p.value_at_candidate for p in report.players
    ]
    click.echo(json.dumps({
        "written": str(out_path),
        "objective": objective,
        "verified": report.verdict,
        "expected_scalarised_payoffs": values,
    }))


@main.command()
@click.option("--game", "game_spec", required=True)
@click.option("--utilities", "util_spec", required=True)
@click.option("--resolution", required=True, type=int)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--max-profiles", default=2_000_000, show_default=True)
@click.option("--threads", default=None, type=int,
              help="Unused by the serial scan; accepted for interface parity.")
def scan(game_spec, util_spec, resolution, tol, out_path, seed, max_profiles, threads) -> None:
    """Grid-scan the joint strategy simplex for approximate SER equilibria."""
    game = _resolve_game(game_spec)
    utilities = _resolve_utilities(util_spec)
    try:
        result = scan_ne_ser_grid(
            game, utilities, resolution, tol,
            opt=OptConfig(seed=seed), max_profiles=max_profiles,
        )
    except MonfgError as exc:
        raise _fail_input(str(exc))
    payload = serialize.scan_to_dict(result)
    payload["seed"] = seed
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    click.echo(json.dumps({
        "written": str(out_path),
        "min_max_gain": result.min_max_gain,
        "num_approx_equilibria": len(result.approx_equilibria),
    }))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--threads", default=None, type=int,
              help="Worker processes for trials (default MONFG_THREADS or 1).")
def learn(config_path, out_dir, threads) -> None:
    """Run a learning experiment and write its metric files."""
    data = _load_json(config_path)
    if not isinstance(data, dict):
        raise _fail_input("experiment config must be a JSON object")
    try:
        mode = SignalMode(data.get("signal_mode", "none"))
    except ValueError:
        raise _fail_input(f"unknown signal_mode {data.get('signal_mode')!r}")
    if "game" not in data or "utilities" not in data:
        raise _fail_input("experiment config needs 'game' and 'utilities' fields")
    game = _resolve_game(data["game"])
    utilities = _resolve_utilities(data["utilities"])
    sigma = None
    if data.get("correlated_strategy") is not None:
        sigma = _resolve_correlated(data["correlated_strategy"])
    opt_data = data.get("opt", {})
    try:
        opt = OptConfig(
            num_starts=int(opt_data.get("num_starts", 6)),
            max_iters=int(opt_data.get("max_iters", 150)),
            step_init=float(opt_data.get("step_init", 0.2)),
            eps_opt=float(opt_data.get("eps_opt", 1e-7)),
            seed=int(opt_data.get("seed", 0)),
        )
        cfg = ExperimentConfig(
            game=game,
            utilities=utilities,
            signal_mode=mode,
            correlated_strategy=sigma,
            trials=int(data.get("trials", 100)),
            episodes=int(data.get("episodes", 10_000)),
            follow_episodes=int(
                data.get("follow_episodes", 0 if mode is SignalMode.NONE else 500)
            ),
            alpha=float(data.get("alpha", 0.05)),
            epsilon_initial=float(data.get("epsilon_initial", 0.1)),
            epsilon_decay=float(data.get("epsilon_decay", 0.999)),
            base_seed=int(data.get("base_seed", 0)),
            opt=opt,
        )
    except (MonfgError, ValueError) as exc:
        raise _fail_input(f"experiment config: {exc}")
    workers = threads if threads is not None else _default_threads()
    metrics = run_experiment(cfg, workers=max(1, workers))
    write_metrics(metrics, out_dir)
    click.echo(json.dumps({
        "written": str(out_dir),
        "final_mean_scalarised_payoffs": [float(x) for x in metrics.final_payoff_means],
        "convergence_fraction": metrics.convergence_fraction,
    }))


@main.group(name="catalog")
def catalog_group() -> None:
    """List or export the built-in games, utilities, and strategies."""


@catalog_group.command(name="list")
def catalog_list() -> None:
    for entry in catalog.list_entries():
        click.echo(f"{entry.name}\t{entry.kind}\t{entry.provenance}")


def _entry_payload_dict(entry):
    if entry.kind == "game":
        return serialize.game_to_dict(entry.payload)
    if entry.kind == "utility_pair":
        return serialize.utilities_to_list(entry.payload)
    if entry.kind == "profile":
        return serialize.profile_to_list(entry.payload)
    if entry.kind == "correlated_strategy":
        return serialize.correlated_to_list(entry.payload)
    raise _fail_input(f"cannot export catalog kind {entry.kind!r}")


@catalog_group.command(name="show")
@click.argument("name")
@click.option("--out", "out_path", default=None, type=click.Path())
def catalog_show(name, out_path) -> None:
    try:
        entry = catalog.get(name)
    except MonfgError as exc:
        raise _fail_input(str(exc))
    payload = _entry_payload_dict(entry)
    text = json.dumps(payload, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
        click.echo(json.dumps({"written": str(out_path), "kind": entry.kind}))
    else:
        click.echo(text)


if __name__ == "__main__":
    entrypoint()
