"""Protocol planning, the channel and Block-Markov runs.

Noiseless runs are exact: every relay decodes its sum, every end node
recovers the other side's message K blocks after it was sent.
"""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from latticeway.exceptions import (
    ConfigError,
    EnumerationBoundError,
    HalfDuplexConflictError,
    InfeasiblePatternError,
)
from latticeway.field_codec import CombinationKey, combine_messages
from latticeway.lattice_core import CodePoint
from latticeway.netsim import (
    BlockMarkovRelay,
    Duplex,
    NetworkConfig,
    NodeRole,
    TraceRow,
    awgn_step,
    monte_carlo,
    plan_protocol,
    run_chain,
    run_half_duplex,
    run_single_relay_bc,
    run_two_relay,
    simulate,
    wilson_interval,
)

from .conftest import make_network


def _plan(config, blocks=10, n=2, r_sym=1.0, **kwargs):
    return plan_protocol(config, r_sym, n, blocks, **kwargs)


# ---------------------------------------------------------------------------
# NetworkConfig
# ---------------------------------------------------------------------------


class TestNetworkConfig:
    def test_counts(self, noiseless_line):
        assert noiseless_line.nodes == 4
        assert noiseless_line.relays == 2

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="noise variances"):
            make_network(noise=(1.0, 1.0, 1.0))

    def test_nonpositive_power(self):
        with pytest.raises(ValidationError):
            make_network(powers=(1.0, 0.0, 1.0))

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            NetworkConfig.model_validate(
                {"powers": [1, 1, 1], "noise": [0, 0, 0], "gains": [1, 1, 1]}
            )


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


class TestPlanProtocol:
    def test_direct_line(self, noiseless_line):
        plan = _plan(noiseless_line)
        assert plan.prime == 5
        assert plan.dimension == 2
        assert plan.thetas == (1, 2, 2, 1)
        assert (plan.multiplier_n, plan.multiplier_m) == (2, 2)
        assert plan.layout == "direct"
        assert plan.message_space_a == plan.message_space_b == 5

    def test_permuted_line(self):
        plan = _plan(make_network(powers=(4.0, 1.0, 1.0, 4.0)))
        assert plan.thetas == (2, 1, 1, 2)
        assert plan.layout == "permuted"

    def test_gains_match_powers(self, noiseless_line):
        from latticeway.lattice_core import second_moment

        plan = _plan(noiseless_line)
        unit = float(second_moment(1, plan.spec))
        for node, power in enumerate(noiseless_line.powers, start=1):
            assert plan.gain(node) ** 2 * plan.theta(node) ** 2 * unit == pytest.approx(power)

    def test_unaligned_powers(self):
        with pytest.raises(InfeasiblePatternError):
            _plan(make_network(powers=(1.0, 1.0, 3.0, 1.0)))

    def test_truncation_makes_plan_feasible(self):
        plan = _plan(make_network(powers=(1.0, 1.0, 3.0, 1.0)), truncate=True)
        assert plan.truncated_powers == (0.75, 1.0, 3.0, 1.0)
        assert plan.multiplier_n == 2

    def test_multiplier_vanishing_mod_prime(self):
        with pytest.raises(InfeasiblePatternError, match="vanishes"):
            _plan(make_network(powers=(1.0, 1.0, 25.0, 1.0)))

    def test_unequal_rates(self, noiseless_line):
        plan = _plan(noiseless_line, rate_a=1.0, rate_b=0.5)
        assert plan.prime == 5
        assert plan.message_space_a == 5
        assert plan.message_space_b == 2

    def test_json_round_trip(self, noiseless_line):
        plan = _plan(noiseless_line)
        assert type(plan).model_validate_json(plan.model_dump_json()) == plan

    def test_decoder_table_bound(self, noiseless_line):
        with pytest.raises(EnumerationBoundError, match="decoder candidates"):
            _plan(noiseless_line, n=4, enumeration_bound=50)

    def test_decoder_table_at_bound(self, noiseless_line):
        assert _plan(noiseless_line, enumeration_bound=20).prime == 5

    def test_field_size_checked_before_prime_search(self, noiseless_line):
        with pytest.raises(EnumerationBoundError, match=r"field of about 2\^40 "):
            _plan(noiseless_line, n=40)

    def test_encoders_meet_power_budget(self, noiseless_line):
        engine = BlockMarkovRelay(_plan(noiseless_line), noiseless_line, seed=0)
        for node, power in enumerate(noiseless_line.powers, start=1):
            assert engine.encoders[node].power_budget() == pytest.approx(power)
            assert engine.encoders[node].power() <= power


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------


class TestAwgnStep:
    def test_neighbours_superpose(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=0.0)
        out = awgn_step({1: np.array([1.0]), 3: np.array([2.5])}, config, 0)
        np.testing.assert_allclose(out[2], [3.5])
        np.testing.assert_allclose(out[1], [0.0])

    def test_code_points_accepted(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=0.0)
        out = awgn_step({2: CodePoint((1, 2), 1)}, config, 0)
        np.testing.assert_allclose(out[3], [1.0, 2.0])

    def test_noise_is_seeded(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=1.0)
        one = awgn_step({1: np.zeros(4)}, config, [3, 1, 1])
        two = awgn_step({1: np.zeros(4)}, config, [3, 1, 1])
        np.testing.assert_array_equal(one[2], two[2])

    def test_noise_is_gaussian_with_node_variance(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=(1.0, 2.0, 1.0))
        out = awgn_step({1: np.zeros(4000)}, config, [8, 1, 1])
        assert stats.kstest(out[2] / np.sqrt(2.0), "norm").pvalue > 1e-4

    def test_half_duplex_listeners_default_to_silent_nodes(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=0.0, duplex=Duplex.HALF)
        out = awgn_step({1: np.ones(1), 3: np.ones(1)}, config, 0)
        assert set(out) == {2}

    def test_half_duplex_conflict(self):
        config = make_network(powers=(1.0, 1.0, 1.0), noise=0.0, duplex=Duplex.HALF)
        with pytest.raises(HalfDuplexConflictError, match="half-duplex conflict"):
            awgn_step({1: np.ones(1)}, config, 0, listeners=[1, 2])


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


class TestTwoRelay:
    def test_noiseless_delivery(self, noiseless_line):
        result = run_two_relay(_plan(noiseless_line), noiseless_line, seed=0)
        assert result.delivered_a == result.delivered_b == 8
        assert result.errors_a == result.errors_b == 0
        assert result.attempts == 8
        assert result.block_errors == 0
        assert result.channel_uses == 20
        assert result.throughput_a == pytest.approx(0.8)

    def test_permuted_layout_delivers(self):
        config = make_network(powers=(4.0, 1.0, 1.0, 4.0))
        result = run_two_relay(_plan(config), config, seed=4)
        assert result.delivered_a == result.delivered_b == 8

    def test_trace(self, noiseless_line):
        rows: list[TraceRow] = []
        run_two_relay(_plan(noiseless_line, blocks=4), noiseless_line, seed=1, trace=rows)
        assert rows
        assert all(r.decode_ok for r in rows)
        relay_rows = [r for r in rows if r.role is NodeRole.RELAY]
        assert {r.node for r in relay_rows} == {2, 3}
        first = [r for r in rows if r.block == 1 and r.node == 2]
        assert first[0].field_combination == "1*a1"

    def test_wrong_topology(self):
        config = make_network(powers=(1.0, 1.0, 1.0))
        with pytest.raises(ConfigError):
            run_two_relay(_plan(config), config, seed=0)

    def test_link_failure_keys(self, noiseless_line):
        result = run_two_relay(_plan(noiseless_line), noiseless_line, seed=0)
        assert set(result.link_failures) == {"2->1", "1+3->2", "2+4->3", "3->4"}

    def test_heavy_noise_fails(self):
        config = make_network(noise=100.0)
        result = run_two_relay(_plan(config), config, seed=0)
        assert result.block_errors > 0
        assert sum(result.link_failures.values()) > 0


class TestOtherTopologies:
    def test_single_relay(self):
        config = make_network(powers=(1.0, 1.0, 4.0))
        plan = _plan(config)
        assert plan.multipliers == (2,)
        result = run_single_relay_bc(plan, config, seed=2)
        assert result.delivered_a == result.delivered_b == 9

    def test_chain(self):
        config = make_network(powers=(1.0,) * 5)
        result = run_chain(_plan(config), config, seed=3)
        assert result.delivered_a == result.delivered_b == 7
        assert result.errors_a == result.errors_b == 0

    def test_half_duplex(self):
        config = make_network(duplex=Duplex.HALF)
        result = run_half_duplex(_plan(config), config, seed=0)
        assert result.delivered_a == result.delivered_b == 8
        assert result.channel_uses == 40
        assert result.throughput_a == pytest.approx(0.4)

    def test_half_duplex_needs_half_config(self, noiseless_line):
        with pytest.raises(ConfigError):
            run_half_duplex(_plan(noiseless_line), noiseless_line, seed=0)

    def test_simulate_dispatches(self):
        config = make_network(powers=(1.0, 1.0, 4.0))
        assert simulate(_plan(config), config, 0).relays == 1

    def test_plan_must_match_network(self, noiseless_line):
        plan = _plan(make_network(powers=(1.0, 1.0, 1.0)))
        with pytest.raises(ConfigError):
            BlockMarkovRelay(plan, noiseless_line, seed=0)


class TestLedger:
    """Relay keys over every block of a run, against the closed-form recursion.

    Relay 2 holds a_i + N·b_(i−1) + NM·a_(i−2) + …, relay 3 the mirror
    image b_i + M·a_(i−1) + MN·b_(i−2) + …, coefficients mod P.
    """

    @staticmethod
    def _expected(block, near, far, first, second, prime):
        terms = {}
        coef = 1
        for back in range(block):
            terms[f"{near if back % 2 == 0 else far}{block - back}"] = coef
            coef *= first if back % 2 == 0 else second
        return CombinationKey.from_mapping(terms).reduced(prime)

    def test_every_block_matches_recursion(self):
        config = make_network(powers=(1.0, 4.0, 9.0, 1.0))
        plan = _plan(config, blocks=8)
        assert plan.layout == "direct"
        assert plan.multipliers == (3, 2)
        n, m = plan.multipliers
        engine = BlockMarkovRelay(plan, config, seed=6)
        for block in range(1, plan.blocks + 1):
            state = engine.step(block)
            assert state.decoded[2].key == self._expected(block, "a", "b", n, m, plan.prime)
            assert state.decoded[3].key == self._expected(block, "b", "a", m, n, plan.prime)

    def test_decoded_messages_follow_keys(self):
        config = make_network(powers=(1.0, 4.0, 9.0, 1.0))
        plan = _plan(config, blocks=8)
        engine = BlockMarkovRelay(plan, config, seed=6)
        for block in range(1, plan.blocks + 1):
            state = engine.step(block)
            for relay in (2, 3):
                decoded = state.decoded[relay]
                messages = [engine.messages[s] for s in decoded.key.slots]
                assert decoded.fine_message(plan.spec) == combine_messages(decoded.key, messages)

    def test_third_block_trace(self, noiseless_line):
        rows: list[TraceRow] = []
        run_two_relay(_plan(noiseless_line, blocks=4), noiseless_line, seed=1, trace=rows)
        (row,) = [r for r in rows if r.block == 3 and r.node == 2]
        assert row.field_combination == "4*a1 + 1*a3 + 2*b2"


class TestThroughput:
    def test_half_duplex_halves_full_duplex(self):
        blocks = 40
        full = make_network()
        half = make_network(duplex=Duplex.HALF)
        full_result = run_two_relay(_plan(full, blocks=blocks), full, seed=3)
        half_result = run_half_duplex(_plan(half, blocks=blocks), half, seed=3)
        assert full_result.throughput_a == pytest.approx(0.95)
        assert half_result.throughput_a == pytest.approx(full_result.throughput_a / 2)
        assert half_result.throughput_a >= 0.5 - 1 / blocks - 1e-12

    def test_chain_of_two_is_two_relay(self, noiseless_line):
        plan = _plan(noiseless_line)
        for seed in range(3):
            assert run_chain(plan, noiseless_line, seed) == run_two_relay(
                plan, noiseless_line, seed
            )

    def test_three_relays_delay_three_blocks(self):
        config = make_network(powers=(1.0,) * 5)
        result = run_chain(_plan(config, blocks=12), config, seed=9)
        assert result.delivered_a == result.delivered_b == 9
        assert result.attempts == 9

    def test_permuted_matches_direct(self):
        direct = make_network(powers=(1.0, 4.0, 4.0, 1.0))
        permuted = make_network(powers=(4.0, 1.0, 1.0, 4.0))
        for seed in range(4):
            one = run_two_relay(_plan(direct), direct, seed)
            two = run_two_relay(_plan(permuted), permuted, seed)
            assert (one.delivered_a, one.delivered_b) == (two.delivered_a, two.delivered_b)
            assert one.errors_a == two.errors_a == 0


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


class TestMonteCarlo:
    def test_deterministic(self):
        config = make_network(noise=0.05)
        plan = _plan(config)
        assert monte_carlo(plan, config, 3, seed=5) == monte_carlo(plan, config, 3, seed=5)

    def test_threads_do_not_change_result(self):
        config = make_network(noise=0.05)
        plan = _plan(config)
        serial = monte_carlo(plan, config, 4, seed=2)
        parallel = monte_carlo(plan, config, 4, seed=2, threads=3)
        assert serial == parallel

    def test_noiseless_aggregate(self, noiseless_line):
        result = monte_carlo(_plan(noiseless_line), noiseless_line, 3, seed=0)
        assert result.aggregate.delivered_a == 24
        assert result.error_rate_a.rate == 0.0
        assert result.error_rate_a.high > 0.0

    def test_trials_positive(self, noiseless_line):
        with pytest.raises(ConfigError):
            monte_carlo(_plan(noiseless_line), noiseless_line, 0, seed=0)

    def test_wilson_interval(self):
        interval = wilson_interval(5, 10)
        assert interval.rate == 0.5
        assert interval.low < 0.5 < interval.high
        assert wilson_interval(0, 0).high == 1.0

    def test_wilson_width_shrinks_with_trials(self):
        config = make_network(noise=0.5)
        plan = _plan(config)
        widths = []
        for trials in (4, 16, 64):
            rate = monte_carlo(plan, config, trials, seed=1).error_rate_a
            widths.append(rate.high - rate.low)
        assert widths[0] > widths[1] > widths[2]

    @pytest.mark.audit
    def test_mean_power_within_budget(self, noiseless_line):
        plan = _plan(noiseless_line, blocks=40)
        result = monte_carlo(plan, noiseless_line, 250, seed=0)
        engine = BlockMarkovRelay(plan, noiseless_line, seed=0)
        for node, budget in enumerate(noiseless_line.powers, start=1):
            measured = result.aggregate.mean_power[str(node)]
            assert measured <= 1.05 * budget
            assert measured == pytest.approx(engine.encoders[node].power(), rel=0.05)

    @pytest.mark.audit
    def test_wilson_width_over_decades(self):
        config = make_network(noise=0.5)
        plan = _plan(config, blocks=3)
        widths = []
        for trials in (100, 1_000, 10_000):
            rate = monte_carlo(plan, config, trials, seed=0).block_error_rate
            widths.append(rate.high - rate.low)
        assert widths[0] > widths[1] > widths[2]
        assert widths[2] < widths[0] / 5
