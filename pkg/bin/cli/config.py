"""Process-level settings.

Read once from the environment when the CLI group starts:

    LATTICEWAY_THREADS            worker threads for Monte Carlo trials (default 1)
    LATTICEWAY_ENUMERATION_BOUND  largest exhaustive enumeration allowed (default 10⁶)

Experiment parameters are not settings; they come from the config file
and flags (see bin.cli.dtos.ExperimentConfig).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from latticeway.exceptions import ConfigError
from latticeway.field_codec import DEFAULT_ENUMERATION_BOUND


def _positive_int(environ: Mapping[str, str], name: str, default: int) -> int:
    raw = environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class Config:
    """Parallelism and enumeration limits."""

    threads: int = 1
    enumeration_bound: int = DEFAULT_ENUMERATION_BOUND

    @classmethod
    def from_environ(cls, environ: Mapping[str, str]) -> Config:
        return cls(
            threads=_positive_int(environ, "LATTICEWAY_THREADS", 1),
            enumeration_bound=_positive_int(
                environ, "LATTICEWAY_ENUMERATION_BOUND", DEFAULT_ENUMERATION_BOUND
            ),
        )
