"""Command-line interface: stream replay, simulations, and baselines.

Exit codes: 0 completed, 1 error (including usage errors), 2 stop
signal (the running e-value crossed 1/alpha). Results go to stdout as
JSON; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click

from .baselines import ContingencyTable, fisher_exact_one_sided, gd_expectation_check
from .core import BlockDesign, DEFAULT_GAMMA
from .errors import EvstreamError
from .process import EvidenceProcess, model_from_config, parse_observation
from .restricted import DEFAULT_GRID_PRECISION
from .sim import (
    SimConfig,
    SimResult,
    default_type1_models,
    estimate_growth,
    simulate_power,
    simulate_swepis,
    simulate_type1,
    swepis_config,
)


def _model_config_from_flags(gamma, divergence, delta, control_rate, grid_precision):
    if delta is not None and divergence is None:
        raise click.UsageError("--delta requires --divergence")
    if divergence is not None and delta is None:
        raise click.UsageError("--divergence requires --delta")
    if control_rate is not None and divergence is None:
        raise click.UsageError("--control-rate requires --divergence and --delta")
    if divergence is None:
        return {"type": "beta", "gamma": gamma}
    config = {
        "type": "restricted",
        "divergence": divergence,
        "delta": delta,
        "grid_precision": grid_precision,
        "alpha": gamma,
        "beta": gamma,
    }
    if control_rate is not None:
        config["control_rate"] = control_rate
    return config


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True))


@click.group()
def cli() -> None:
    """Anytime-valid two-sample tests for Bernoulli streams."""


@cli.command()
@click.option("--na", type=int, default=1, show_default=True, help="a-outcomes per block")
@click.option("--nb", type=int, default=1, show_default=True, help="b-outcomes per block")
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--divergence", type=click.Choice(["difference", "log-odds"]), default=None)
@click.option("--delta", type=float, default=None)
@click.option("--control-rate", type=float, default=None)
@click.option("--grid-precision", type=float, default=DEFAULT_GRID_PRECISION, show_default=True)
@click.option("--stream", type=click.File("r"), default="-", help="JSONL observations (default stdin)")
def run(na, nb, gamma, alpha, divergence, delta, control_rate, grid_precision, stream):
    """Stream observations through an evidence process.

    Reads one JSON object per line: {"group": "a"|"b", "y": 0|1}. Prints
    a JSON line per completed block and a final decision; exits 2 as a
    stop signal when the e-value reaches 1/alpha.
    """
    config = _model_config_from_flags(
        gamma, divergence, delta, control_rate, grid_precision
    )
    design = BlockDesign(na, nb)
    process = EvidenceProcess.start(design, model_from_config(config))
    rejected = False
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        group, y = parse_observation(line, lineno)
        before = process.blocks_completed
        process = process.observe(group, y)
        for j, log_e in process.trajectory[before:]:
            _echo_json({"block": j, "log_e": log_e, "e_value": math.exp(log_e)})
        if process.decide(alpha).reject:
            rejected = True
            break
    decision = process.decide(alpha)
    _echo_json(
        {
            "final": {
                "e_value": decision.e_value,
                "log_e": process.log_e,
                "blocks_completed": process.blocks_completed,
                "pending": {
                    "a": len(process.pending_a),
                    "b": len(process.pending_b),
                },
                "alpha": alpha,
                "threshold": decision.threshold,
                "reject": decision.reject,
            },
            "stopped": rejected,
        }
    )
    if rejected:
        sys.exit(2)


@cli.group()
def simulate() -> None:
    """Seeded Monte-Carlo experiments; writes CSV/JSON artifacts."""


def _write_and_summarize(result: SimResult, out: str) -> None:
    paths = result.write(out)
    _echo_json(
        {
            "scenario": result.scenario,
            "files": [str(p) for p in paths],
            "variants": [v.summary() for v in result.variants],
        }
    )


@simulate.command("type1")
@click.option("--theta", type=float, default=0.1, show_default=True, help="shared null rate")
@click.option("--m", type=int, default=1000, show_default=True)
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--grid-precision", type=float, default=DEFAULT_GRID_PRECISION, show_default=True)
@click.option("--fisher/--no-fisher", default=True, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON SimConfig overriding the flags")
@click.option("--out", type=click.Path(file_okay=False), default="sim-results", show_default=True)
def simulate_type1_cmd(theta, m, reps, seed, alpha, grid_precision, fisher, config_path, out):
    """Cumulative rejection rates on null streams under optional stopping."""
    if config_path:
        config = SimConfig.from_dict(json.loads(Path(config_path).read_text()))
    else:
        config = SimConfig(
            scenario="type1",
            replications=reps,
            max_blocks=m,
            alpha=alpha,
            design=BlockDesign(1, 1),
            generator=(theta, theta),
            models=default_type1_models(grid_precision),
            seed=seed,
            include_fisher=fisher,
        )
    _write_and_summarize(simulate_type1(config), out)


@simulate.command("swepis")
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--grid-precision", type=float, default=DEFAULT_GRID_PRECISION, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="sim-results", show_default=True)
def simulate_swepis_cmd(reps, seed, alpha, grid_precision, out):
    """Permutation replay of the stopped stillbirth trial."""
    config = swepis_config(
        replications=reps, seed=seed, alpha=alpha, grid_precision=grid_precision
    )
    _write_and_summarize(simulate_swepis(config), out)


@simulate.command("power")
@click.option("--theta-a", type=float, default=0.1, show_default=True)
@click.option("--delta", type=float, default=0.3, show_default=True, help="rate difference of the generator")
@click.option("--target-power", type=float, default=0.8, show_default=True)
@click.option("--theta-a-grid", type=str, default=None, help="comma-separated control rates for the worst case")
@click.option("--m", type=int, default=1000, show_default=True, help="block budget ceiling")
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="sim-results", show_default=True)
def simulate_power_cmd(theta_a, delta, target_power, theta_a_grid, m, reps, seed, alpha, gamma, out):
    """Worst-case and expected sample sizes for a power target."""
    config = SimConfig(
        scenario="power",
        replications=reps,
        max_blocks=m,
        alpha=alpha,
        design=BlockDesign(1, 1),
        generator=(theta_a, theta_a + delta),
        models=[{"type": "beta", "gamma": gamma}],
        seed=seed,
    )
    grid = None
    if theta_a_grid:
        grid = [float(v) for v in theta_a_grid.split(",") if v.strip()]
    result = simulate_power(config, target_power=target_power, theta_a_grid=grid)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "power.json").write_text(json.dumps(result.to_dict(), sort_keys=True))
    _echo_json(result.to_dict())


@simulate.command("growth")
@click.option("--theta-a", type=float, required=True)
@click.option("--theta-b", type=float, required=True)
@click.option("--m", type=int, default=100, show_default=True)
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--divergence", type=click.Choice(["difference", "log-odds"]), default=None)
@click.option("--delta", type=float, default=None)
@click.option("--control-rate", type=float, default=None)
@click.option("--grid-precision", type=float, default=DEFAULT_GRID_PRECISION, show_default=True)
def simulate_growth_cmd(theta_a, theta_b, m, reps, seed, gamma, divergence, delta, control_rate, grid_precision):
    """Expected log e-value growth under a fixed true pair."""
    config = _model_config_from_flags(
        gamma, divergence, delta, control_rate, grid_precision
    )
    estimate = estimate_growth(
        config, (theta_a, theta_b), BlockDesign(1, 1), m, reps, seed
    )
    _echo_json(estimate.to_dict())


@cli.command()
@click.argument("n_a1", type=int)
@click.argument("n_a0", type=int)
@click.argument("n_b1", type=int)
@click.argument("n_b0", type=int)
def fisher(n_a1, n_a0, n_b1, n_b0):
    """One-sided exact-test p for a 2x2 table (direction: b has more events)."""
    p = fisher_exact_one_sided(ContingencyTable(n_a1, n_a0, n_b1, n_b0))
    _echo_json({"p": p})


@cli.command("gd-check")
@click.option("--scheme", type=click.Choice(["poisson", "indep-multinomial"]), required=True)
@click.option("--rate", type=float, default=1.0, show_default=True, help="poisson cell rate")
@click.option("--truncation", type=int, default=50, show_default=True)
@click.option("--theta", type=float, default=0.5, show_default=True)
@click.option("--na", type=int, default=10, show_default=True)
@click.option("--nb", type=int, default=10, show_default=True)
def gd_check(scheme, rate, truncation, theta, na, nb):
    """Null expectation of a default contingency Bayes factor.

    Values above 1 demonstrate that the Bayes factor is not an e-variable.
    """
    if scheme == "poisson":
        check = gd_expectation_check("poisson", rates=rate, truncation=truncation)
    else:
        check = gd_expectation_check(
            "indep_multinomial", theta=theta, n_a=na, n_b=nb
        )
    _echo_json(
        {
            "scheme": scheme,
            "value": check.value,
            "remainder_bound": check.remainder_bound,
            "exceeds_one": check.value > 1.0,
        }
    )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None, help="default: $EVSTREAM_PORT or 8710")
@click.option("--persist", type=click.Path(file_okay=False), default=None, help="directory for per-session observation logs")
@click.option("--ui-origin", default=None, help="CORS origin (default: $EVSTREAM_UI_ORIGIN or *)")
def serve(host, port, persist, ui_origin):
    """Run the live monitoring HTTP service."""
    import os

    import uvicorn

    from .service import create_app

    if port is None:
        port = int(os.environ.get("EVSTREAM_PORT", "8710"))
    if ui_origin is None:
        ui_origin = os.environ.get("EVSTREAM_UI_ORIGIN", "*")
    uvicorn.run(create_app(persist_dir=persist, ui_origin=ui_origin), host=host, port=port)


def main(argv=None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except EvstreamError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
