"""Usecase implementations for the experiment commands.

Each usecase has an execute(request) -> response method satisfying
the UseCase protocol. The config source, trace sink and process
settings are injected via constructor. Flags in the request override
values from the config file.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from pydantic import BaseModel, ValidationError

from bin.cli.dtos import (
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
    TransformRow,
)
from bin.cli.introspect import describe_validation_error
from latticeway.exceptions import ConfigError, EnumerationBoundError
from latticeway.field_codec import phi_inverse
from latticeway.lattice_core import CodePoint, LatticeSpec
from latticeway.netsim import (
    Duplex,
    NetworkConfig,
    TraceRow,
    monte_carlo,
    plan_protocol,
    simulate,
)
from latticeway.ports import ConfigSource, TraceSink
from latticeway.rates import chain_rate, gap_audit, half_duplex_rate, optimize_truncated
from latticeway.scheme import decode_sum, encode, redistribution_steps, sum_candidates
from latticeway.usecase import UseCase

logger = logging.getLogger(__name__)


def format_point(point: CodePoint) -> str:
    """"3/2" in one dimension, "(1/2, -1)" otherwise."""
    values = [str(v) for v in point.values()]
    return values[0] if len(values) == 1 else f"({', '.join(values)})"


def _validated(model: type[BaseModel], data: Any) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(describe_validation_error(e)) from e


def load_experiment(
    source: ConfigSource, path: str | None, command: str
) -> ExperimentConfig:
    """Read and validate the config file; a missing path gives defaults."""
    data = source.load(Path(path)) if path else {}
    experiment = _validated(ExperimentConfig, data)
    if experiment.command is not None and experiment.command != command:
        raise ConfigError(
            f"config is for command {experiment.command!r}, invoked {command!r}"
        )
    return experiment


class RatesUseCase:
    """Optimize truncated powers for a four-node line and compare to the outer bound."""

    def __init__(self, source: ConfigSource) -> None:
        self._source = source

    def execute(self, request: RatesRequest) -> RatesResponse:
        experiment = load_experiment(self._source, request.config, "rates")
        network = experiment.network
        if network.nodes != 4:
            raise ConfigError(
                f"rates needs a four-node network, got {network.nodes}; use chain"
            )
        if any(n <= 0 for n in network.noise):
            raise ConfigError("rates needs positive noise variances")
        report = optimize_truncated(network.powers, network.noise)
        logger.info("rates: R=%.6g outer=%.6g", report.r_achievable, report.r_outer)
        return RatesResponse(report=report, half_duplex_rate=half_duplex_rate(report))


class GapCheckUseCase:
    """Randomized audit of the achievable-vs-outer gap."""

    def __init__(self, source: ConfigSource) -> None:
        self._source = source

    def execute(self, request: GapCheckRequest) -> GapCheckResponse:
        experiment = load_experiment(self._source, request.config, "gap-check")
        section = experiment.gap_check
        if section.low >= section.high:
            raise ConfigError("gap_check.low must be below gap_check.high")
        audit = gap_audit(
            trials=request.trials if request.trials is not None else section.trials,
            seed=request.seed if request.seed is not None else section.seed,
            low=section.low,
            high=section.high,
        )
        return GapCheckResponse(audit=audit)


class SimulateUseCase:
    """Plan the protocol for the configured line and run seeded Monte Carlo trials.

    The trace, when requested, follows the first trial's seed.
    """

    def __init__(
        self,
        source: ConfigSource,
        trace_sink: TraceSink,
        threads: int,
        enumeration_bound: int,
        command: str = "simulate",
    ) -> None:
        self._source = source
        self._trace_sink = trace_sink
        self._threads = threads
        self._bound = enumeration_bound
        self._command = command

    def execute(self, request: SimulateRequest | ChainRequest) -> SimulateResponse:
        experiment = load_experiment(self._source, request.config, self._command)
        network = experiment.network
        if request.noise is not None:
            network = _validated(
                NetworkConfig,
                {
                    "powers": network.powers,
                    "noise": [request.noise] * network.nodes,
                    "duplex": network.duplex,
                },
            )
        sim = experiment.simulation
        seed = request.seed if request.seed is not None else sim.seed
        trials = request.trials if request.trials is not None else sim.trials
        plan = plan_protocol(
            network,
            sim.r_sym,
            request.dim if request.dim is not None else sim.dimension,
            request.blocks if request.blocks is not None else sim.blocks,
            coarse_scale=str(sim.coarse_scale),
            generator_seed=sim.generator_seed,
            rate_a=sim.rate_a,
            rate_b=sim.rate_b,
            truncate=sim.truncate,
            enumeration_bound=self._bound,
        )
        logger.info(
            "%s: %d relays, %s layout, prime %d, %d trials",
            self._command, plan.relays, plan.layout, plan.prime, trials,
        )
        result = monte_carlo(plan, network, trials, seed, threads=self._threads)

        trace_path = request.trace or experiment.output.trace
        if trace_path:
            rows: list[TraceRow] = []
            simulate(plan, network, seed, trace=rows)
            self._trace_sink.write(Path(trace_path), rows)

        predicted = None
        if all(n > 0 for n in network.noise):
            predicted = chain_rate(plan.truncated_powers, network.noise)
            if network.duplex is Duplex.HALF:
                predicted *= 0.5
        return SimulateResponse(
            command=self._command,
            plan=plan,
            result=result,
            delay_blocks=plan.relays,
            predicted_rate=predicted,
        )


class TransformDemoUseCase:
    """Enumerate every message pair through decode-the-sum and the transform.

    Upper sender at N·p, lower at p; the relay decodes the sum modulo
    N·p·Λ, multiplies by N, reduces and rescales to N·p.
    """

    def __init__(self, source: ConfigSource, enumeration_bound: int) -> None:
        self._source = source
        self._bound = enumeration_bound

    def execute(self, request: TransformDemoRequest) -> TransformDemoResponse:
        experiment = load_experiment(self._source, request.config, "transform-demo")
        t = experiment.transform
        spec = _validated(
            LatticeSpec,
            {
                "dimension": len(t.generator),
                "prime": t.prime,
                "coarse_scale": t.coarse_scale,
                "generator": t.generator,
            },
        )
        if t.prime**2 > self._bound:
            raise EnumerationBoundError(
                f"enumeration bound exceeded: {t.prime ** 2} pairs > {self._bound}"
            )
        n, p = t.multiplier, t.p
        upper = n * p
        rows = []
        outputs: Counter[str] = Counter()
        for w_a, w_b in itertools.product(range(t.prime), repeat=2):
            x_a = encode(w_a, upper, spec)
            x_b = encode(w_b, p, spec)
            decoded = decode_sum((x_a + x_b).real(), n, p, spec)
            multiplied, reduced, output = redistribution_steps(decoded, n, upper, spec)
            outputs[format_point(output)] += 1
            rows.append(
                TransformRow(
                    w_a=w_a,
                    w_b=w_b,
                    x_a=format_point(x_a),
                    x_b=format_point(x_b),
                    decoded=format_point(decoded.point),
                    multiplied=format_point(multiplied),
                    reduced=format_point(reduced),
                    output=format_point(output),
                    message=phi_inverse(output, upper, spec).value,
                )
            )
        candidates = sorted(sum_candidates(n, p, spec), key=lambda c: c.values())
        return TransformDemoResponse(
            parameters=t,
            candidates=[format_point(c) for c in candidates],
            output_counts=dict(sorted(outputs.items(), key=lambda kv: _sort_key(kv[0]))),
            rows=rows,
        )


def _sort_key(label: str) -> tuple:
    return tuple(Fraction(x) for x in label.strip("()").split(", "))


class RunUseCase:
    """Dispatch to the usecase named by the config file's command field."""

    def __init__(
        self,
        source: ConfigSource,
        usecases: Mapping[str, tuple[UseCase[Any, BaseModel], type[BaseModel]]],
    ) -> None:
        self._source = source
        self._usecases = usecases

    def execute(self, request: RunRequest) -> BaseModel:
        if not request.config:
            raise ConfigError("run needs --config")
        data = self._source.load(Path(request.config))
        command = _validated(ExperimentConfig, data).command
        if command is None:
            raise ConfigError("config has no 'command' field")
        usecase, request_model = self._usecases[command]
        fields = request_model.model_fields.keys()
        inner = request_model.model_validate(
            {k: v for k, v in request.model_dump().items() if k in fields}
        )
        logger.info("run: dispatching to %s", command)
        return usecase.execute(inner)
