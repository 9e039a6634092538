"""Shared fixtures and builders for the latticeway test suite."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner

from bin.cli.config import Config
from bin.cli.di import Container
from latticeway.lattice_core import LatticeSpec
from latticeway.netsim import Duplex, NetworkConfig


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def make_spec(
    prime: int = 5,
    coarse_scale: Fraction | int = 1,
    generator: tuple[int, ...] = (1,),
) -> LatticeSpec:
    return LatticeSpec(
        dimension=len(generator),
        prime=prime,
        coarse_scale=coarse_scale,
        generator=generator,
    )


def make_network(
    powers: tuple[float, ...] = (1.0, 4.0, 4.0, 1.0),
    noise: float | tuple[float, ...] = 0.0,
    duplex: Duplex = Duplex.FULL,
) -> NetworkConfig:
    if isinstance(noise, (int, float)):
        noise = (float(noise),) * len(powers)
    return NetworkConfig(powers=powers, noise=noise, duplex=duplex)


def write_config(path: Path, data: dict) -> str:
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


@pytest.fixture
def transform_spec() -> LatticeSpec:
    """One dimension, a = 5, P = 5, G = (1): the codebook at θ = 1 is {−2, …, 2}."""
    return make_spec(prime=5, coarse_scale=5)


@pytest.fixture
def plane_spec() -> LatticeSpec:
    return make_spec(prime=7, coarse_scale=Fraction(7, 2), generator=(1, 3))


@pytest.fixture
def noiseless_line() -> NetworkConfig:
    return make_network()


@pytest.fixture
def tmp_config() -> Config:
    return Config(threads=1, enumeration_bound=10_000)


@pytest.fixture
def container(tmp_config):
    return Container(tmp_config)


@pytest.fixture
def run(tmp_config, monkeypatch):
    """Invoke CLI commands with fixed process settings."""
    from bin.cli.main import cli

    monkeypatch.setattr(
        "bin.cli.main.Config",
        type(
            "Config",
            (),
            {"from_environ": staticmethod(lambda _: tmp_config)},
        ),
    )
    runner = CliRunner()
    return lambda *args: runner.invoke(cli, list(args))
