"""CLI entry point for lattice relay experiments.

Thin application shell: create the CLI group, register one generated
command per usecase, and write each response as a JSON or CSV
artifact. No computation lives here.

Invocation: latticeway <command> [options]
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any

import click

from bin.cli.config import Config
from bin.cli.di import Container
from bin.cli.dtos import (
    ArtifactOptions,
    ChainRequest,
    ExperimentConfig,
    GapCheckRequest,
    GapCheckResponse,
    RatesRequest,
    RatesResponse,
    RunRequest,
    SimulateRequest,
    SimulateResponse,
    TransformDemoRequest,
    TransformDemoResponse,
)
from bin.cli.infrastructure.csv_artifacts import render_csv
from bin.cli.infrastructure.json_store import dumps_model, write_text
from bin.cli.introspect import StructuredError, generate_command
from latticeway.exceptions import DomainError


@click.group()
@click.option("-v", "--verbose", count=True, help="Log to stderr (-vv for debug).")
@click.pass_context
def cli(ctx: click.Context, verbose: int) -> None:
    """Lattice coding experiments for two-way relay lines."""
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
    try:
        config = Config.from_environ(os.environ)
    except DomainError as e:
        raise StructuredError.from_domain(e) from e
    ctx.obj = Container(config)


# ---------------------------------------------------------------------------
# Artifact output
# ---------------------------------------------------------------------------


def _target(request: ArtifactOptions, default_format: str) -> tuple[str | None, str]:
    """Flags first, then the config file's output section."""
    output = ExperimentConfig().output
    if request.config:
        di = click.get_current_context().obj
        data = di.config_source.load(Path(request.config))
        output = ExperimentConfig.model_validate(data).output
    out = request.out or output.out
    fmt = request.format or output.format or default_format
    return out, fmt


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text(Path(out), text)
    else:
        click.echo(text, nl=False)


# CSV columns for one-row summaries. Order is part of the artifact format.
RATES_COLUMNS = (
    "r_achievable",
    "binding",
    "r_outer",
    "gap",
    "multiplier_n",
    "multiplier_m",
    "pattern_13",
    "pattern_24",
    "p1",
    "p2",
    "p3",
    "p4",
    "half_duplex_rate",
)
GAP_CHECK_COLUMNS = ("trials", "seed", "low", "high", "bound", "max_gap", "violations")
SIMULATE_COLUMNS = (
    "command",
    "relays",
    "layout",
    "duplex",
    "dimension",
    "prime",
    "blocks",
    "trials",
    "seed",
    "delivered_a",
    "delivered_b",
    "errors_a",
    "errors_b",
    "attempts",
    "block_errors",
    "error_rate_a",
    "error_rate_a_low",
    "error_rate_a_high",
    "error_rate_b",
    "error_rate_b_low",
    "error_rate_b_high",
    "throughput_a",
    "throughput_b",
    "predicted_rate",
    "delay_blocks",
)
TRANSFORM_COLUMNS = (
    "w_a",
    "w_b",
    "x_a",
    "x_b",
    "decoded",
    "multiplied",
    "reduced",
    "output",
    "message",
)


def _rates_csv(resp: RatesResponse) -> str:
    r = resp.report
    row = (
        r.r_achievable, r.binding, r.r_outer, r.gap, r.multiplier_n, r.multiplier_m,
        r.pattern_13, r.pattern_24, *r.truncated_powers, resp.half_duplex_rate,
    )
    return render_csv(RATES_COLUMNS, [row])


def _gap_check_csv(resp: GapCheckResponse) -> str:
    a = resp.audit
    return render_csv(
        GAP_CHECK_COLUMNS,
        [(a.trials, a.seed, a.low, a.high, a.bound, a.max_gap, a.violations)],
    )


def _simulate_csv(resp: SimulateResponse) -> str:
    mc, plan = resp.result, resp.plan
    agg = mc.aggregate
    row = (
        resp.command, plan.relays, plan.layout, agg.duplex, plan.dimension,
        plan.prime, plan.blocks, mc.trials, mc.seed,
        agg.delivered_a, agg.delivered_b, agg.errors_a, agg.errors_b,
        agg.attempts, agg.block_errors,
        mc.error_rate_a.rate, mc.error_rate_a.low, mc.error_rate_a.high,
        mc.error_rate_b.rate, mc.error_rate_b.low, mc.error_rate_b.high,
        agg.throughput_a, agg.throughput_b, resp.predicted_rate, resp.delay_blocks,
    )
    return render_csv(SIMULATE_COLUMNS, [row])


def _transform_csv(resp: TransformDemoResponse) -> str:
    return render_csv(
        TRANSFORM_COLUMNS,
        (
            (r.w_a, r.w_b, r.x_a, r.x_b, r.decoded, r.multiplied, r.reduced, r.output, r.message)
            for r in resp.rows
        ),
    )


_CSV_WRITERS = {
    RatesResponse: _rates_csv,
    GapCheckResponse: _gap_check_csv,
    SimulateResponse: _simulate_csv,
    TransformDemoResponse: _transform_csv,
}


def _format_report(resp: Any, request: ArtifactOptions) -> None:
    default = "csv" if isinstance(resp, TransformDemoResponse) else "json"
    out, fmt = _target(request, default)
    text = _CSV_WRITERS[type(resp)](resp) if fmt == "csv" else dumps_model(resp)
    _emit(text, out)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


_COMMANDS = (
    ("rates", RatesRequest, "rates_usecase"),
    ("gap-check", GapCheckRequest, "gap_check_usecase"),
    ("simulate", SimulateRequest, "simulate_usecase"),
    ("chain", ChainRequest, "chain_usecase"),
    ("transform-demo", TransformDemoRequest, "transform_demo_usecase"),
    ("run", RunRequest, "run_usecase"),
)

for _name, _request_model, _usecase_attr in _COMMANDS:
    cli.add_command(
        generate_command(
            name=_name,
            request_model=_request_model,
            usecase_attr=_usecase_attr,
            format_output=_format_report,
        )
    )


if __name__ == "__main__":
    cli()
