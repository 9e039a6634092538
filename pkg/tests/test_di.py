"""DI container and process settings.

Config.from_environ validates the environment. The container wires
adapters that satisfy the ports and usecases that share them. Usecase
behaviour is tested through the CLI suite.
"""

from __future__ import annotations

import pytest

from bin.cli.config import Config
from bin.cli.di import Container
from bin.cli.dtos import MAX_DIMENSION, SimulateRequest, SimulateResponse
from latticeway.exceptions import ConfigError, EnumerationBoundError
from latticeway.field_codec import DEFAULT_ENUMERATION_BOUND
from latticeway.ports import ConfigSource, TraceSink
from latticeway.usecase import UseCase


class TestConfig:
    def test_defaults(self):
        config = Config.from_environ({})
        assert config.threads == 1
        assert config.enumeration_bound == DEFAULT_ENUMERATION_BOUND

    def test_threads_from_environment(self):
        assert Config.from_environ({"LATTICEWAY_THREADS": "4"}).threads == 4

    def test_blank_is_default(self):
        assert Config.from_environ({"LATTICEWAY_THREADS": " "}).threads == 1

    @pytest.mark.parametrize("raw", ["0", "-2", "four", "1.5"])
    def test_invalid_threads(self, raw):
        with pytest.raises(ConfigError, match="LATTICEWAY_THREADS"):
            Config.from_environ({"LATTICEWAY_THREADS": raw})

    def test_enumeration_bound(self):
        config = Config.from_environ({"LATTICEWAY_ENUMERATION_BOUND": "500"})
        assert config.enumeration_bound == 500

    def test_frozen(self):
        config = Config.from_environ({})
        with pytest.raises(AttributeError):
            config.threads = 8  # type: ignore[misc]


class TestContainerWiring:
    def test_adapters_satisfy_ports(self, container):
        assert isinstance(container.config_source, ConfigSource)
        assert isinstance(container.trace_sink, TraceSink)

    def test_threads_reach_simulation(self):
        container = Container(Config(threads=3))
        assert container.simulate_usecase._threads == 3
        assert container.chain_usecase._threads == 3

    def test_bound_reaches_simulation(self):
        container = Container(Config(enumeration_bound=500))
        assert container.simulate_usecase._bound == 500
        assert container.chain_usecase._bound == 500

    def test_chain_shares_simulation(self, container):
        assert container.chain_usecase._command == "chain"
        assert container.simulate_usecase._command == "simulate"

    def test_run_covers_every_command(self, container):
        assert set(container.run_usecase._usecases) == {
            "rates",
            "gap-check",
            "simulate",
            "chain",
            "transform-demo",
        }

    def test_simulate_through_container(self, container):
        resp = container.simulate_usecase.execute(SimulateRequest(noise=0.0, blocks=3))
        assert resp.result.aggregate.delivered_a == 1

    def test_simulate_respects_enumeration_bound(self):
        container = Container(Config(enumeration_bound=100))
        with pytest.raises(EnumerationBoundError, match="enumeration bound"):
            container.simulate_usecase.execute(
                SimulateRequest(noise=0.0, blocks=3, dim=MAX_DIMENSION)
            )


# ---------------------------------------------------------------------------
# UseCase protocol
# ---------------------------------------------------------------------------


class TestUseCaseContract:
    """UseCase[TRequest, TResponse]: the execute(request) -> response contract."""

    def test_class_with_execute_satisfies_protocol(self):
        class Echo:
            def execute(self, request: str) -> str:
                return request

        echo: UseCase[str, str] = Echo()
        assert echo.execute("hello") == "hello"

    def test_container_usecases_are_called_through_the_protocol(self, container):
        simulate: UseCase[SimulateRequest, SimulateResponse] = container.simulate_usecase
        resp = simulate.execute(SimulateRequest(noise=0.0, blocks=2))
        assert isinstance(resp, SimulateResponse)
        assert callable(container.run_usecase.execute)
