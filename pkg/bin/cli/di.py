"""Dependency injection container.

Single responsibility: know which implementations to use and configure
them with the process settings. Consumers depend on protocol types,
never on implementations directly.
"""

from __future__ import annotations

from pydantic import BaseModel

from bin.cli.config import Config
from bin.cli.dtos import (
    ChainRequest,
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
from bin.cli.infrastructure.config_source import FilesystemConfigSource
from bin.cli.infrastructure.csv_artifacts import CsvTraceSink
from bin.cli.usecases import (
    GapCheckUseCase,
    RatesUseCase,
    RunUseCase,
    SimulateUseCase,
    TransformDemoUseCase,
)
from latticeway.ports import ConfigSource, TraceSink
from latticeway.usecase import UseCase


class Container:
    """Wires adapters and usecases.

    Usage:
        c = Container(Config.from_environ(os.environ))
        resp = c.simulate_usecase.execute(req)
    """

    def __init__(self, config: Config) -> None:
        self.config = config

        # -- Adapters --------------------------------------------------------
        self.config_source: ConfigSource = FilesystemConfigSource()
        self.trace_sink: TraceSink = CsvTraceSink()

        # -- Usecases --------------------------------------------------------
        self.rates_usecase: UseCase[RatesRequest, RatesResponse] = RatesUseCase(
            source=self.config_source
        )
        self.gap_check_usecase: UseCase[GapCheckRequest, GapCheckResponse] = GapCheckUseCase(
            source=self.config_source
        )
        self.simulate_usecase: UseCase[SimulateRequest, SimulateResponse] = SimulateUseCase(
            source=self.config_source,
            trace_sink=self.trace_sink,
            threads=config.threads,
            enumeration_bound=config.enumeration_bound,
        )
        self.chain_usecase: UseCase[ChainRequest, SimulateResponse] = SimulateUseCase(
            source=self.config_source,
            trace_sink=self.trace_sink,
            threads=config.threads,
            enumeration_bound=config.enumeration_bound,
            command="chain",
        )
        self.transform_demo_usecase: UseCase[TransformDemoRequest, TransformDemoResponse] = (
            TransformDemoUseCase(
                source=self.config_source,
                enumeration_bound=config.enumeration_bound,
            )
        )
        self.run_usecase: UseCase[RunRequest, BaseModel] = RunUseCase(
            source=self.config_source,
            usecases={
                "rates": (self.rates_usecase, RatesRequest),
                "gap-check": (self.gap_check_usecase, GapCheckRequest),
                "simulate": (self.simulate_usecase, SimulateRequest),
                "chain": (self.chain_usecase, ChainRequest),
                "transform-demo": (self.transform_demo_usecase, TransformDemoRequest),
            },
        )
