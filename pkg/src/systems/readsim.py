"""
Seeded read simulator: samples reads from either strand of a reference and
injects substitution errors (and optionally N bases).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..config.settings import SimConfig
from ..errors import ConfigError
from ..utils.kmer_codec import NUCLEOTIDES, reverse_complement
from ..utils.seq_io import read_reference

logger = logging.getLogger(__name__)

_BASES = np.frombuffer(NUCLEOTIDES.encode("ascii"), dtype=np.uint8)
_CODES = np.full(256, 255, dtype=np.uint8)
_CODES[_BASES] = np.arange(4, dtype=np.uint8)
_N = ord("N")


@dataclass
class SimulatedRead:
    name: str
    sequence: str
    strand: str
    start: int

    @property
    def reverse(self) -> bool:
        return self.strand == "-"


@dataclass
class SimulationResult:
    reference: str
    reads: List[SimulatedRead] = field(default_factory=list)

    def sequences(self) -> List[str]:
        return [read.sequence for read in self.reads]

    @property
    def total_bases(self) -> int:
        return sum(len(read.sequence) for read in self.reads)


def random_reference(length: int, rng: np.random.Generator) -> str:
    return _BASES[rng.integers(0, 4, size=length)].tobytes().decode("ascii")


def mutate(segment: str, rng: np.random.Generator, error_rate: float, n_rate: float = 0.0) -> str:
    """
    Substitute each base by a uniformly chosen different base with probability
    error_rate, then mask bases to N with probability n_rate.
    """
    raw = np.frombuffer(segment.encode("ascii"), dtype=np.uint8).copy()
    if error_rate > 0:
        hit = rng.random(raw.size) < error_rate
        shift = rng.integers(1, 4, size=int(hit.sum()), dtype=np.uint8)
        raw[hit] = _BASES[(_CODES[raw[hit]] + shift) % 4]
    if n_rate > 0:
        raw[rng.random(raw.size) < n_rate] = _N
    return raw.tobytes().decode("ascii")


def simulate(config: SimConfig, reference: Optional[str] = None) -> SimulationResult:
    """
    Draw reads until their total length reaches depth times the reference length.

    Args:
        config: Simulator settings; the reference comes from the argument, then
            config.reference_path, then a random sequence of reference_length
        reference: Explicit reference sequence

    Returns:
        SimulationResult with the reference and the reads in draw order

    Raises:
        ConfigError: if the reference is shorter than the minimum read length
    """
    rng = np.random.default_rng(config.seed)
    if reference is None:
        if config.reference_path is not None:
            reference = read_reference(config.reference_path)
        else:
            reference = random_reference(config.reference_length, rng)
    if len(reference) < config.read_length_min:
        raise ConfigError(f"reference of {len(reference)} bp is shorter than the minimum read length "
                          f"{config.read_length_min}")

    longest = min(config.read_length_max, len(reference))
    target = config.depth * len(reference)
    result = SimulationResult(reference)
    total = 0
    while total < target:
        length = int(rng.integers(config.read_length_min, longest + 1))
        start = int(rng.integers(0, len(reference) - length + 1))
        segment = reference[start:start + length]
        reverse = bool(rng.random() < 0.5)
        if reverse:
            segment = reverse_complement(segment)
        sequence = mutate(segment, rng, config.error_rate, config.n_rate)
        result.reads.append(SimulatedRead(f"read_{len(result.reads) + 1}", sequence, "-" if reverse else "+", start))
        total += length

    logger.info("Simulated %d reads (%d bases) from a %d bp reference", len(result.reads), total, len(reference))
    return result
