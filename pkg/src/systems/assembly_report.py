"""
Assembly statistics: contig counts, N50, genome fraction and per-stage job stats.
"""

import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Sequence

import numpy as np

from .bsp_engine import JobStats
from ..config.constants import LONG_CONTIG_LENGTH
from ..utils.kmer_codec import reverse_complement
from ..utils.math_utils import n50

logger = logging.getLogger(__name__)


@dataclass
class RoundSummary:
    """What one label/merge pass produced and cleaned up."""

    pass_no: int
    contigs: int
    n50: int
    total_length: int
    merged_tips: int = 0
    pruned_bubbles: int = 0
    removed_tips: int = 0


@dataclass
class AssemblyReport:
    contig_count: int = 0
    long_contigs: int = 0
    total_length: int = 0
    n50: int = 0
    largest: int = 0
    genome_fraction: Optional[float] = None
    stages: List[JobStats] = field(default_factory=list)
    rounds: List[RoundSummary] = field(default_factory=list)

    def summary(self) -> str:
        text = (f"{self.contig_count} contigs, {self.long_contigs} >= {LONG_CONTIG_LENGTH} bp, "
                f"total {self.total_length} bp, N50 {self.n50}, largest {self.largest}")
        if self.genome_fraction is not None:
            text += f", genome fraction {self.genome_fraction:.4f}"
        return text


def _occurrences(reference: str, needle: str) -> Iterable[int]:
    start = reference.find(needle)
    while start != -1:
        yield start
        start = reference.find(needle, start + 1)


def genome_fraction(contigs: Sequence[str], reference: str) -> float:
    """
    Share of reference bases covered by an exact match of some contig on either strand.

    Args:
        contigs: Contig sequences
        reference: Reference sequence

    Returns:
        Fraction in [0, 1]; 0.0 for an empty reference
    """
    if not reference:
        return 0.0
    covered = np.zeros(len(reference), dtype=bool)
    for seq in contigs:
        if not seq:
            continue
        for needle in {seq, reverse_complement(seq)}:
            for start in _occurrences(reference, needle):
                covered[start:start + len(needle)] = True
    return float(covered.mean())


def compute_metrics(contigs: Sequence[str], reference: Optional[str] = None,
                    stages: Iterable[JobStats] = (), rounds: Iterable[RoundSummary] = ()) -> AssemblyReport:
    lengths = np.array([len(s) for s in contigs], dtype=np.int64)
    report = AssemblyReport(
        contig_count=int(lengths.size),
        long_contigs=int(np.count_nonzero(lengths >= LONG_CONTIG_LENGTH)),
        total_length=int(lengths.sum()),
        n50=n50(lengths.tolist()),
        largest=int(lengths.max()) if lengths.size else 0,
        stages=list(stages),
        rounds=list(rounds),
    )
    if reference is not None:
        report.genome_fraction = genome_fraction(contigs, reference)
    return report


def write_report(report: AssemblyReport, handle: IO[str]) -> None:
    """Tab-separated report: metric rows, then one row per round and per engine job."""
    rows = [
        ("contigs", report.contig_count),
        (f"contigs_ge_{LONG_CONTIG_LENGTH}", report.long_contigs),
        ("total_length", report.total_length),
        ("n50", report.n50),
        ("largest", report.largest),
    ]
    if report.genome_fraction is not None:
        rows.append(("genome_fraction", f"{report.genome_fraction:.6f}"))
    for key, value in rows:
        handle.write(f"{key}\t{value}\n")
    for r in report.rounds:
        handle.write(f"round\t{r.pass_no}\t{r.contigs}\t{r.n50}\t{r.total_length}\t"
                     f"{r.merged_tips}\t{r.pruned_bubbles}\t{r.removed_tips}\n")
    for s in report.stages:
        handle.write(f"stage\t{s.name}\t{s.supersteps}\t{s.messages}\t{s.dropped}\n")
