"""Request and response DTOs for the experiment usecases.

DTOs are the contract between the application layer (CLI) and the
usecases. Each command has a FooRequest and FooResponse pair; the
request docstring is the command's --help text. ExperimentConfig is
the schema of the JSON/YAML configuration file every command reads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from latticeway.lattice_core import Rational
from latticeway.netsim import MonteCarloResult, NetworkConfig, ProtocolPlan
from latticeway.rates import GapAudit, RateReport

Command = Literal["rates", "gap-check", "simulate", "transform-demo", "chain"]
COMMANDS: tuple[str, ...] = ("rates", "gap-check", "simulate", "transform-demo", "chain")
FORMATS = ["json", "csv"]
# Decoder tables grow as αⁿ·P, so the lattice dimension stays small.
MAX_DIMENSION = 16


# ---------------------------------------------------------------------------
# Experiment configuration file
# ---------------------------------------------------------------------------


def default_network() -> NetworkConfig:
    """Four nodes, powers (1, 4, 4, 1), unit noise."""
    return NetworkConfig(powers=(1.0, 4.0, 4.0, 1.0), noise=(1.0, 1.0, 1.0, 1.0))


class SimulationSection(BaseModel):
    """Knobs for simulate and chain."""

    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(default=2, ge=1, le=MAX_DIMENSION)
    blocks: int = Field(default=10, ge=1)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    r_sym: float = Field(default=1.0, gt=0)
    rate_a: float | None = Field(default=None, ge=0)
    rate_b: float | None = Field(default=None, ge=0)
    coarse_scale: Rational = Fraction(1)
    generator_seed: int = Field(default=0, ge=0)
    truncate: bool = False


class TransformSection(BaseModel):
    """One sender at N·p, one at p, through a single relay (defaults: a=5, P=5, p=1/2, N=2)."""

    model_config = ConfigDict(extra="forbid")

    coarse_scale: Rational = Fraction(5)
    prime: int = Field(default=5, ge=2)
    generator: tuple[int, ...] = (1,)
    p: Rational = Fraction(1, 2)
    multiplier: int = Field(default=2, ge=1)


class GapCheckSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0)
    low: float = Field(default=1e-2, gt=0)
    high: float = Field(default=1e2, gt=0)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    out: str | None = None
    trace: str | None = None
    format: Literal["json", "csv"] | None = None


class ExperimentConfig(BaseModel):
    """Top-level configuration document. Unknown keys are rejected at every level."""

    model_config = ConfigDict(extra="forbid")

    command: Command | None = None
    network: NetworkConfig = Field(default_factory=default_network)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    transform: TransformSection = Field(default_factory=TransformSection)
    gap_check: GapCheckSection = Field(default_factory=GapCheckSection)
    output: OutputSection = Field(default_factory=OutputSection)


# ---------------------------------------------------------------------------
# Shared request options
# ---------------------------------------------------------------------------


class ArtifactOptions(BaseModel):
    """Options every command shares: config file and artifact destination."""

    config: str | None = Field(
        default=None, description="Path to a JSON or YAML experiment config."
    )
    out: str | None = Field(
        default=None, description="Write the report here instead of stdout."
    )
    format: str | None = Field(
        default=None,
        description="Report format.",
        json_schema_extra={"choices": FORMATS},
    )


class SeedOptions(BaseModel):
    seed: int | None = Field(default=None, ge=0, description="Base seed.")
    trials: int | None = Field(default=None, ge=1, description="Number of trials.")


class NetworkOptions(BaseModel):
    blocks: int | None = Field(default=None, ge=1, description="Blocks per run (I).")
    dim: int | None = Field(
        default=None, ge=1, le=MAX_DIMENSION, description="Lattice dimension n."
    )
    noise: float | None = Field(
        default=None, ge=0, description="Set every node's noise variance."
    )
    trace: str | None = Field(
        default=None, description="Write the per-block trace of the first trial as CSV."
    )


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


class RatesRequest(ArtifactOptions):
    """Optimize the achievable symmetric rate of a four-node line."""


class RatesResponse(BaseModel):
    report: RateReport
    half_duplex_rate: float


# ---------------------------------------------------------------------------
# gap-check
# ---------------------------------------------------------------------------


class GapCheckRequest(ArtifactOptions, SeedOptions):
    """Audit the outer-bound gap over random power/noise configurations."""


class GapCheckResponse(BaseModel):
    audit: GapAudit


# ---------------------------------------------------------------------------
# simulate / chain
# ---------------------------------------------------------------------------


class SimulateRequest(ArtifactOptions, SeedOptions, NetworkOptions):
    """Monte Carlo simulation of the Block-Markov relay protocol."""


class ChainRequest(ArtifactOptions, SeedOptions, NetworkOptions):
    """Simulate a K-relay line and report its analytic chain rate."""


class SimulateResponse(BaseModel):
    command: Literal["simulate", "chain"]
    plan: ProtocolPlan
    result: MonteCarloResult
    delay_blocks: int
    predicted_rate: float | None


# ---------------------------------------------------------------------------
# transform-demo
# ---------------------------------------------------------------------------


class TransformDemoRequest(ArtifactOptions):
    """Tabulate decode-the-sum and the re-distribution transform for every message pair."""


class TransformRow(BaseModel):
    w_a: int
    w_b: int
    x_a: str
    x_b: str
    decoded: str
    multiplied: str
    reduced: str
    output: str
    message: int


class TransformDemoResponse(BaseModel):
    parameters: TransformSection
    candidates: list[str]
    output_counts: dict[str, int]
    rows: list[TransformRow]


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


class RunRequest(ArtifactOptions, SeedOptions, NetworkOptions):
    """Run the command named in the config file's "command" field."""
