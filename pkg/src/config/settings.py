"""
Assembler configuration settings.
Enums and validated dataclasses for the pipeline and the read simulator.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .constants import (
    DEFAULT_DEPTH,
    DEFAULT_EDIT_DISTANCE,
    DEFAULT_ERROR_RATE,
    DEFAULT_EXTRA_ROUNDS,
    DEFAULT_K,
    DEFAULT_MAX_SUPERSTEPS,
    DEFAULT_READ_LENGTH,
    DEFAULT_REFERENCE_LENGTH,
    DEFAULT_TIP_LENGTH,
    DEFAULT_WORKERS,
    MAX_K,
)
from ..errors import ConfigError


class Labeler(Enum):
    """Contig labeling strategy."""
    LR = "lr"
    SV = "sv"


class RoutingPolicy(Enum):
    """What the engine does with a message addressed to a missing vertex."""
    DROP = "drop"
    ABORT = "abort"


@dataclass
class PipelineConfig:
    """Everything one assembly run needs."""

    k: int = DEFAULT_K
    min_coverage: Optional[int] = None
    tip_length: int = DEFAULT_TIP_LENGTH
    edit_distance: int = DEFAULT_EDIT_DISTANCE
    labeler: Labeler = Labeler.LR
    workers: int = DEFAULT_WORKERS
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS
    seed: int = 0  # partition hash salt
    reads_path: Optional[Path] = None
    out_path: Optional[Path] = None
    reference_path: Optional[Path] = None
    report_path: Optional[Path] = None
    trace_path: Optional[Path] = None
    dump_graph_path: Optional[Path] = None
    routing: RoutingPolicy = RoutingPolicy.DROP
    max_supersteps: int = DEFAULT_MAX_SUPERSTEPS
    simulated_errors: bool = False

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise ConfigError(f"k must be in 1..{MAX_K}, got {self.k}")
        if self.min_coverage is not None and self.min_coverage < 0:
            raise ConfigError("min_coverage must be non-negative")
        if self.tip_length < 0:
            raise ConfigError("tip_length must be non-negative")
        if self.edit_distance < 0:
            raise ConfigError("edit_distance must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.extra_rounds < 0:
            raise ConfigError("extra_rounds must be non-negative")
        if self.max_supersteps < 1:
            raise ConfigError("max_supersteps must be positive")
        try:
            self.labeler = Labeler(self.labeler)
            self.routing = RoutingPolicy(self.routing)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @property
    def resolved_min_coverage(self) -> int:
        """θ: explicit value, else 1 for error-bearing reads and 0 otherwise."""
        if self.min_coverage is not None:
            return self.min_coverage
        return 1 if self.simulated_errors else 0

    @property
    def passes(self) -> int:
        """Number of label/merge passes."""
        return self.extra_rounds + 1


@dataclass
class SimConfig:
    """Read simulator settings."""

    reference_length: int = DEFAULT_REFERENCE_LENGTH
    reference_path: Optional[Path] = None
    read_length_min: int = DEFAULT_READ_LENGTH
    read_length_max: int = DEFAULT_READ_LENGTH
    depth: float = DEFAULT_DEPTH
    error_rate: float = DEFAULT_ERROR_RATE
    n_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.error_rate < 1.0:
            raise ConfigError("error_rate must be in [0, 1)")
        if not 0.0 <= self.n_rate < 1.0:
            raise ConfigError("n_rate must be in [0, 1)")
        if self.read_length_min < 1:
            raise ConfigError("read_length_min must be positive")
        if self.read_length_min > self.read_length_max:
            raise ConfigError("read_length_min must not exceed read_length_max")
        if self.depth <= 0:
            raise ConfigError("depth must be positive")
        if self.reference_path is None and self.reference_length < 1:
            raise ConfigError("reference_length must be positive")
