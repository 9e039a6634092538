"""Channel model and Block-Markov protocol engine for relay lines.

Nodes are numbered 1 … K+2 along the line: node 1 sends the "a"
messages, node K+2 the "b" messages, nodes 2 … K+1 are relays. Each
node hears only its two neighbours, and its own signal is subtracted.

Every node keeps an integer amplitude multiple θ_j. Nodes of equal
parity share a real gain g, so the physical signal is X_j = g·θ_j·φ(·)
and the power pattern P′_j = g²·θ_j²·σ²(Λ) holds by construction. A
receiver divides its output by its neighbours' gain before decoding;
both neighbours always have the parity opposite to its own.

In block i the end nodes send fresh messages, each relay forwards the
re-distribution transform of what it decoded in block i−1, and each end
node strips what it already knows from its decoded combination. A
message crosses K relays, so it arrives K blocks after it was sent.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.stats import binomtest

from latticeway.exceptions import (
    ConfigError,
    EnumerationBoundError,
    HalfDuplexConflictError,
    InfeasiblePatternError,
)
from latticeway.field_codec import (
    DEFAULT_ENUMERATION_BOUND,
    CombinationKey,
    FieldElement,
    nearest_prime,
    phi_inverse,
    solve_coefficient,
)
from latticeway.lattice_core import (
    CodePoint,
    LatticeSpec,
    RealVector,
    mod_lattice,
)
from latticeway.rates import alignment_ratios, truncate_chain
from latticeway.scheme import (
    DecodedCombination,
    Encoder,
    candidate_count,
    decode_point_to_point,
    decode_sum,
    redistribution_transform,
)

logger = logging.getLogger(__name__)


class Duplex(str, Enum):
    FULL = "full"
    HALF = "half"


class NodeRole(str, Enum):
    END = "end"
    RELAY = "relay"


# ---------------------------------------------------------------------------
# Configuration and plan
# ---------------------------------------------------------------------------


class NetworkConfig(BaseModel):
    """A line of K+2 nodes with per-node power budget and noise variance.

    Noise variance 0 gives a noiseless run. Channel gains are unit.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    powers: tuple[float, ...] = Field(min_length=3)
    noise: tuple[float, ...] = Field(min_length=3)
    duplex: Duplex = Duplex.FULL

    @field_validator("powers")
    @classmethod
    def _positive_powers(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(not (p > 0) or not math.isfinite(p) for p in v):
            raise ValueError("powers must be positive and finite")
        return v

    @field_validator("noise")
    @classmethod
    def _nonnegative_noise(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(not (n >= 0) or not math.isfinite(n) for n in v):
            raise ValueError("noise variances must be non-negative and finite")
        return v

    @model_validator(mode="after")
    def _same_length(self) -> NetworkConfig:
        if len(self.powers) != len(self.noise):
            raise ValueError(
                f"{len(self.powers)} powers but {len(self.noise)} noise variances"
            )
        return self

    @property
    def nodes(self) -> int:
        return len(self.powers)

    @property
    def relays(self) -> int:
        return len(self.powers) - 2


class ProtocolPlan(BaseModel):
    """Everything a run needs besides the channel: lattice, scalings, rates."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    spec: LatticeSpec
    relays: int = Field(ge=1)
    layout: str
    thetas: tuple[int, ...]
    multipliers: tuple[int, ...]
    truncated_powers: tuple[float, ...]
    gains: tuple[float, float]
    p: float
    q: float
    blocks: int = Field(ge=1)
    r_sym: float
    rate_a: float
    rate_b: float
    message_space_a: int
    message_space_b: int

    @property
    def prime(self) -> int:
        return self.spec.prime

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def multiplier_n(self) -> int:
        """Ratio θ3/θ1 (or its inverse), the multiplier at node 2."""
        return self.multipliers[0]

    @property
    def multiplier_m(self) -> int:
        """Ratio θ2/θ4 (or its inverse), the multiplier at node 3."""
        return self.multipliers[1] if len(self.multipliers) > 1 else 1

    def gain(self, node: int) -> float:
        return self.gains[(node - 1) % 2]

    def theta(self, node: int) -> int:
        return self.thetas[node - 1]


def plan_protocol(
    config: NetworkConfig,
    r_sym: float,
    n: int,
    blocks: int,
    *,
    coarse_scale: int | str = 1,
    generator_seed: int = 0,
    rate_a: float | None = None,
    rate_b: float | None = None,
    truncate: bool = False,
    enumeration_bound: int = DEFAULT_ENUMERATION_BOUND,
) -> ProtocolPlan:
    """Fix the lattice, amplitude multiples and message alphabets for a run.

    With unequal direction rates the field is sized for the faster one
    and the slower direction draws from a subset of its messages.

    Raises EnumerationBoundError when a relay's decoder table (αⁿ·P
    rows) would exceed enumeration_bound.
    """
    if n < 1:
        raise ConfigError(f"dimension must be at least 1, got {n}")
    rate_a = r_sym if rate_a is None else rate_a
    rate_b = r_sym if rate_b is None else rate_b
    if min(rate_a, rate_b) < 0 or max(rate_a, rate_b) <= 0:
        raise ConfigError("rates must be non-negative with at least one positive")
    r_sym = max(rate_a, rate_b)

    powers = truncate_chain(config.powers) if truncate else tuple(config.powers)
    thetas = alignment_ratios(powers)
    if n * r_sym > math.log2(enumeration_bound):
        raise EnumerationBoundError(
            f"enumeration bound exceeded: field of about 2^{n * r_sym:g} "
            f"messages > {enumeration_bound}"
        )
    prime = nearest_prime(2.0 ** (n * r_sym))

    multipliers = []
    for relay in range(2, config.nodes):
        lo, hi = sorted((thetas[relay - 2], thetas[relay]))
        alpha = hi // lo
        if alpha % prime == 0:
            raise InfeasiblePatternError(
                f"multiplier {alpha} at node {relay} vanishes mod prime {prime}"
            )
        multipliers.append(alpha)

    spec = LatticeSpec.construction_a(n, prime, coarse_scale, generator_seed)
    rows = max((candidate_count(spec, alpha) for alpha in multipliers), default=prime)
    if rows > enumeration_bound:
        raise EnumerationBoundError(
            f"enumeration bound exceeded: {rows} decoder candidates > {enumeration_bound}"
        )
    gains = tuple(
        min(
            math.sqrt(powers[j] / Encoder(spec, thetas[j]).power_budget())
            for j in range(start, config.nodes, 2)
        )
        for start in (0, 1)
    )
    odd = [powers[j] for j in range(0, config.nodes, 2)]
    even = [powers[j] for j in range(1, config.nodes, 2)]

    if config.relays == 2:
        layout = "direct" if thetas[0] <= thetas[2] else "permuted"
    elif config.relays == 1:
        layout = "single-relay"
    else:
        layout = "chain"

    def space(rate: float) -> int:
        if rate == r_sym:
            return prime
        return min(prime, max(1, int(2.0 ** (n * rate))))

    plan = ProtocolPlan(
        spec=spec,
        relays=config.relays,
        layout=layout,
        thetas=thetas,
        multipliers=tuple(multipliers),
        truncated_powers=tuple(float(v) for v in powers),
        gains=gains,
        p=math.sqrt(min(odd)),
        q=math.sqrt(min(even)),
        blocks=blocks,
        r_sym=r_sym,
        rate_a=rate_a,
        rate_b=rate_b,
        message_space_a=space(rate_a),
        message_space_b=space(rate_b),
    )
    logger.debug(
        "plan: layout=%s prime=%d thetas=%s multipliers=%s",
        layout, prime, thetas, plan.multipliers,
    )
    return plan


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------


def awgn_step(
    inputs: Mapping[int, CodePoint | RealVector],
    config: NetworkConfig,
    rng_seed: int | Sequence[int],
    listeners: Sequence[int] | None = None,
    dimension: int | None = None,
) -> dict[int, RealVector]:
    """Y_i = Σ_{j neighbour of i} X_j + Z_i for each listening node.

    Noise for every node is drawn whether or not it listens, so a node's
    noise depends only on the seed. In half duplex the default listeners
    are the silent nodes, and a transmitting listener is a conflict.
    """
    signals = {
        node: x.real() if isinstance(x, CodePoint) else np.asarray(x, dtype=np.float64)
        for node, x in inputs.items()
    }
    if dimension is None:
        if not signals:
            raise ValueError("dimension is required when no node transmits")
        dimension = next(iter(signals.values())).shape[0]
    for node in signals:
        if not 1 <= node <= config.nodes:
            raise ValueError(f"no node {node} in a {config.nodes}-node line")

    if listeners is None:
        if config.duplex is Duplex.HALF:
            listeners = [i for i in range(1, config.nodes + 1) if i not in signals]
        else:
            listeners = list(range(1, config.nodes + 1))
    elif config.duplex is Duplex.HALF:
        clash = sorted(set(listeners) & set(signals))
        if clash:
            raise HalfDuplexConflictError(
                f"half-duplex conflict: node(s) {clash} transmit and listen in one slot"
            )

    rng = np.random.default_rng(rng_seed)
    noise = rng.standard_normal((config.nodes, dimension))
    out: dict[int, RealVector] = {}
    for i in listeners:
        y = np.sqrt(config.noise[i - 1]) * noise[i - 1]
        for j in (i - 1, i + 1):
            if j in signals:
                y = y + signals[j]
        out[i] = y
    return out


# ---------------------------------------------------------------------------
# Per-block state and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    block: int
    node: int
    role: NodeRole
    field_combination: str
    decode_ok: bool


@dataclass
class BlockState:
    """What happened in one block.

    transmitted maps node → exact lattice point; keys maps node → the
    message combination carried by that point. recovered maps an end
    node to the (slot, estimate) it resolved this block.
    """

    block: int
    message_a: FieldElement
    message_b: FieldElement
    transmitted: dict[int, CodePoint] = field(default_factory=dict)
    keys: dict[int, CombinationKey] = field(default_factory=dict)
    decoded: dict[int, DecodedCombination] = field(default_factory=dict)
    decode_ok: dict[int, bool] = field(default_factory=dict)
    recovered: dict[int, tuple[str, FieldElement]] = field(default_factory=dict)
    recovered_ok: dict[int, bool] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return not all(self.decode_ok.values()) or not all(self.recovered_ok.values())

    def trace_rows(self, prime: int) -> list[TraceRow]:
        rows = []
        for node in sorted(self.decode_ok):
            if node in self.decoded:
                key = self.decoded[node].key
                combination = str(key.reduced(prime)) if key is not None else ""
                rows.append(TraceRow(self.block, node, NodeRole.RELAY, combination, self.decode_ok[node]))
            else:
                slot, value = self.recovered.get(node, ("", None))
                combination = f"{slot}={value}" if slot else ""
                ok = self.decode_ok[node] and self.recovered_ok.get(node, True)
                rows.append(TraceRow(self.block, node, NodeRole.END, combination, ok))
        return rows


class SimulationResult(BaseModel):
    """Tallies of one run. Throughput is bits per real channel use."""

    model_config = ConfigDict(frozen=True)

    blocks: int
    relays: int
    duplex: Duplex
    dimension: int
    prime: int
    r_sym: float
    delivered_a: int
    delivered_b: int
    errors_a: int
    errors_b: int
    attempts: int
    block_errors: int
    throughput_a: float
    throughput_b: float
    channel_uses: int
    link_failures: dict[str, int]
    mean_power: dict[str, float]


class Interval(BaseModel):
    model_config = ConfigDict(frozen=True)

    rate: float
    low: float
    high: float


class MonteCarloResult(BaseModel):
    """Seed-ordered aggregate over independent trials with Wilson intervals."""

    model_config = ConfigDict(frozen=True)

    trials: int
    seed: int
    aggregate: SimulationResult
    error_rate_a: Interval
    error_rate_b: Interval
    block_error_rate: Interval


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _link_label(node: int, nodes: int) -> str:
    heard = [j for j in (node - 1, node + 1) if 1 <= j <= nodes]
    return f"{'+'.join(str(j) for j in heard)}->{node}"


class BlockMarkovRelay:
    """Block-synchronous state machine shared by every relay line."""

    def __init__(
        self,
        plan: ProtocolPlan,
        config: NetworkConfig,
        seed: int,
    ) -> None:
        if plan.relays != config.relays:
            raise ConfigError(
                f"plan is for {plan.relays} relays, network has {config.relays}"
            )
        self.plan = plan
        self.config = config
        self.seed = seed
        self.half_duplex = config.duplex is Duplex.HALF
        self.nodes = config.nodes
        self.spec = plan.spec
        self.encoders = {
            j: Encoder(plan.spec, plan.theta(j), plan.gain(j)) for j in range(1, self.nodes + 1)
        }
        self.trace: list[TraceRow] = []

        prime = plan.prime
        rng = np.random.default_rng([seed, 0])
        draws_a = rng.integers(0, plan.message_space_a, size=plan.blocks)
        draws_b = rng.integers(0, plan.message_space_b, size=plan.blocks)
        self.messages: dict[str, FieldElement] = {}
        for i in range(plan.blocks):
            self.messages[f"a{i + 1}"] = FieldElement(int(draws_a[i]), prime)
            self.messages[f"b{i + 1}"] = FieldElement(int(draws_b[i]), prime)

        self._held: dict[int, DecodedCombination | None] = {
            r: None for r in range(2, self.nodes)
        }
        # Everything each end node knows: its own messages plus recoveries.
        self._known: dict[int, dict[str, FieldElement]] = {1: {}, self.nodes: {}}
        self._link_failures = {_link_label(i, self.nodes): 0 for i in range(1, self.nodes + 1)}
        self._power_sum = {i: 0.0 for i in range(1, self.nodes + 1)}
        self._power_count = {i: 0 for i in range(1, self.nodes + 1)}

    # -- one block ----------------------------------------------------------

    def _transmit(self, state: BlockState) -> None:
        i = state.block
        plan = self.plan
        ends = ((1, f"a{i}", state.message_a), (self.nodes, f"b{i}", state.message_b))
        for node, slot, message in ends:
            state.transmitted[node] = self.encoders[node].encode(message)
            state.keys[node] = CombinationKey.single(slot)
            self._known[node][slot] = message
        for relay, held in self._held.items():
            if held is None:
                continue
            state.transmitted[relay] = redistribution_transform(
                held, held.alpha, plan.theta(relay), self.spec
            )
            state.keys[relay] = held.key

    def _channel(self, state: BlockState) -> dict[int, RealVector]:
        signals = {
            node: self.encoders[node].amplify(point)
            for node, point in state.transmitted.items()
        }
        for node, x in signals.items():
            self._power_sum[node] += float(x @ x) / self.spec.dimension
            self._power_count[node] += 1
        n = self.spec.dimension
        if not self.half_duplex:
            return awgn_step(signals, self.config, [self.seed, 1, state.block], dimension=n)
        outputs: dict[int, RealVector] = {}
        for slot, parity in enumerate((1, 0)):
            talkers = {k: v for k, v in signals.items() if k % 2 == parity}
            listeners = [k for k in range(1, self.nodes + 1) if k % 2 != parity]
            outputs.update(
                awgn_step(
                    talkers, self.config, [self.seed, 1, state.block, slot],
                    listeners=listeners, dimension=n,
                )
            )
        return outputs

    def _relay_receive(self, relay: int, y: RealVector, state: BlockState) -> None:
        plan, spec = self.plan, self.spec
        heard = [j for j in (relay - 1, relay + 1) if j in state.transmitted]
        if not heard:
            self._held[relay] = None
            return
        y = y / plan.gain(relay - 1)
        lo, hi = sorted((plan.theta(relay - 1), plan.theta(relay + 1)))
        alpha = hi // lo
        key = CombinationKey.empty()
        for j in heard:
            key = key.plus(state.keys[j].scaled(plan.theta(j) // lo))
        key = key.reduced(plan.prime)

        if len(heard) == 2:
            decoded = decode_sum(y, alpha, lo, spec, key=key)
            exact = mod_lattice(
                state.transmitted[heard[0]] + state.transmitted[heard[1]], alpha * lo, spec
            )
            ok = decoded.point == exact
        else:
            (j,) = heard
            point = decode_point_to_point(y, plan.theta(j), spec)
            decoded = DecodedCombination(point=point, theta=alpha * lo, alpha=alpha, key=key)
            ok = point == state.transmitted[j]

        self._held[relay] = decoded
        state.decoded[relay] = decoded
        state.decode_ok[relay] = ok
        if not ok:
            self._link_failures[_link_label(relay, self.nodes)] += 1
            logger.info("block %d: decode failure at relay %d", state.block, relay)

    def _end_receive(self, node: int, y: RealVector, state: BlockState) -> None:
        plan, spec = self.plan, self.spec
        neighbour = 2 if node == 1 else self.nodes - 1
        if neighbour not in state.transmitted:
            return
        theta = plan.theta(neighbour)
        point = decode_point_to_point(y / plan.gain(neighbour), theta, spec)
        ok = point == state.transmitted[neighbour]
        state.decode_ok[node] = ok
        if not ok:
            self._link_failures[_link_label(node, self.nodes)] += 1
            logger.info("block %d: decode failure at end node %d", state.block, node)

        key = state.keys[neighbour].reduced(plan.prime)
        known = self._known[node]
        unknown = [s for s in key.slots if s not in known]
        if not unknown:
            return
        if len(unknown) > 1:
            logger.warning(
                "block %d: node %d cannot resolve %s from one combination",
                state.block, node, unknown,
            )
            return
        (slot,) = unknown
        residual = phi_inverse(point, theta, spec)
        for s in key.slots:
            if s != slot:
                residual = residual - known[s] * key.coefficient(s)
        estimate = solve_coefficient(residual, key.coefficient(slot))
        known[slot] = estimate
        state.recovered[node] = (slot, estimate)
        state.recovered_ok[node] = estimate == self.messages[slot]

    def step(self, block: int) -> BlockState:
        state = BlockState(
            block=block,
            message_a=self.messages[f"a{block}"],
            message_b=self.messages[f"b{block}"],
        )
        self._transmit(state)
        outputs = self._channel(state)
        for relay in range(2, self.nodes):
            self._relay_receive(relay, outputs[relay], state)
        for end in (1, self.nodes):
            self._end_receive(end, outputs[end], state)
        logger.debug(
            "block %d: transmitted=%s recovered=%s",
            block, sorted(state.transmitted), state.recovered,
        )
        return state

    # -- full run -----------------------------------------------------------

    def run(self) -> SimulationResult:
        plan = self.plan
        n = plan.dimension
        delivered = {1: 0, self.nodes: 0}
        errors = {1: 0, self.nodes: 0}
        block_errors = 0
        for block in range(1, plan.blocks + 1):
            state = self.step(block)
            self.trace.extend(state.trace_rows(plan.prime))
            block_errors += state.failed
            for node, good in state.recovered_ok.items():
                if good:
                    delivered[node] += 1
                else:
                    errors[node] += 1

        uses = plan.blocks * n * (2 if self.half_duplex else 1)
        # Node K+2 recovers "a" messages, node 1 recovers "b" messages.
        delivered_a, delivered_b = delivered[self.nodes], delivered[1]
        return SimulationResult(
            blocks=plan.blocks,
            relays=plan.relays,
            duplex=Duplex.HALF if self.half_duplex else Duplex.FULL,
            dimension=n,
            prime=plan.prime,
            r_sym=plan.r_sym,
            delivered_a=delivered_a,
            delivered_b=delivered_b,
            errors_a=errors[self.nodes],
            errors_b=errors[1],
            attempts=max(plan.blocks - plan.relays, 0),
            block_errors=block_errors,
            throughput_a=delivered_a * plan.rate_a * n / uses,
            throughput_b=delivered_b * plan.rate_b * n / uses,
            channel_uses=uses,
            link_failures=dict(self._link_failures),
            mean_power={
                str(i): self._power_sum[i] / self._power_count[i] if self._power_count[i] else 0.0
                for i in range(1, self.nodes + 1)
            },
        )


# ---------------------------------------------------------------------------
# Topology entry points
# ---------------------------------------------------------------------------


def _require_full(config: NetworkConfig) -> None:
    if config.duplex is not Duplex.FULL:
        raise ConfigError("network is half duplex; use run_half_duplex")


def _run(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None,
) -> SimulationResult:
    engine = BlockMarkovRelay(plan, config, seed)
    result = engine.run()
    if trace is not None:
        trace.extend(engine.trace)
    return result


def run_two_relay(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None = None,
) -> SimulationResult:
    if config.relays != 2:
        raise ConfigError(f"two-relay run needs 4 nodes, got {config.nodes}")
    _require_full(config)
    return _run(plan, config, seed, trace)


def run_single_relay_bc(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None = None,
) -> SimulationResult:
    """Nodes 1 and 3 exchange messages through relay 2.

    The relay decodes the sum in the multiple-access phase, transforms it,
    and broadcasts at full power.
    """
    if config.relays != 1:
        raise ConfigError(f"single-relay run needs 3 nodes, got {config.nodes}")
    _require_full(config)
    return _run(plan, config, seed, trace)


def run_chain(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None = None,
) -> SimulationResult:
    _require_full(config)
    return _run(plan, config, seed, trace)


def run_half_duplex(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None = None,
) -> SimulationResult:
    """Each block split in two slots: odd nodes transmit, then even nodes."""
    if config.duplex is not Duplex.HALF:
        raise ConfigError("run_half_duplex needs duplex mode 'half'")
    return _run(plan, config, seed, trace)


def simulate(
    plan: ProtocolPlan,
    config: NetworkConfig,
    seed: int,
    trace: list[TraceRow] | None = None,
) -> SimulationResult:
    """Dispatch on duplex mode and relay count."""
    if config.duplex is Duplex.HALF:
        return run_half_duplex(plan, config, seed, trace)
    if config.relays == 1:
        return run_single_relay_bc(plan, config, seed, trace)
    if config.relays == 2:
        return run_two_relay(plan, config, seed, trace)
    return run_chain(plan, config, seed, trace)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def wilson_interval(successes: int, trials: int) -> Interval:
    if trials == 0:
        return Interval(rate=0.0, low=0.0, high=1.0)
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return Interval(rate=successes / trials, low=float(ci.low), high=float(ci.high))


def _aggregate(runs: Sequence[SimulationResult]) -> SimulationResult:
    first = runs[0]
    count = len(runs)
    links = {k: sum(r.link_failures[k] for r in runs) for k in first.link_failures}
    power = {k: sum(r.mean_power[k] for r in runs) / count for k in first.mean_power}
    return first.model_copy(
        update={
            "delivered_a": sum(r.delivered_a for r in runs),
            "delivered_b": sum(r.delivered_b for r in runs),
            "errors_a": sum(r.errors_a for r in runs),
            "errors_b": sum(r.errors_b for r in runs),
            "attempts": sum(r.attempts for r in runs),
            "block_errors": sum(r.block_errors for r in runs),
            "throughput_a": sum(r.throughput_a for r in runs) / count,
            "throughput_b": sum(r.throughput_b for r in runs) / count,
            "channel_uses": sum(r.channel_uses for r in runs),
            "link_failures": links,
            "mean_power": power,
        }
    )


def monte_carlo(
    plan: ProtocolPlan,
    config: NetworkConfig,
    trials: int,
    seed: int,
    threads: int = 1,
) -> MonteCarloResult:
    """Run trials with seeds seed, seed+1, … and aggregate in seed order."""
    if trials < 1:
        raise ConfigError(f"trials must be at least 1, got {trials}")
    seeds = range(seed, seed + trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda s: simulate(plan, config, s), seeds))
    else:
        runs = [simulate(plan, config, s) for s in seeds]
    total = _aggregate(runs)
    logger.info(
        "monte carlo: %d trials, errors a=%d b=%d of %d",
        trials, total.errors_a, total.errors_b, total.attempts,
    )
    return MonteCarloResult(
        trials=trials,
        seed=seed,
        aggregate=total,
        error_rate_a=wilson_interval(total.errors_a, total.attempts),
        error_rate_b=wilson_interval(total.errors_b, total.attempts),
        block_error_rate=wilson_interval(total.block_errors, total.blocks * trials),
    )
