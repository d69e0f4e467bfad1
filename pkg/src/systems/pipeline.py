"""
Assembly driver: DBG construction, then repeated label/merge passes with bubble
filtering and tip removal between them. Stages share one engine and pass
vertex sets to each other in memory.
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, TypeVar

from .assembly_report import AssemblyReport, RoundSummary, compute_metrics, write_report
from .bsp_engine import BSPEngine, VertexSet, trace_logger
from .bubble_filter import filter_bubbles
from .contig_label import label_contigs
from .contig_merge import merge_contigs
from .dbg_build import build_graph
from .tip_remove import attach_contig_info, remove_tips
from ..config.settings import PipelineConfig
from ..entities.contig_vertex import ContigVertex
from ..entities.kmer_vertex import KmerVertex
from ..errors import StageError
from ..utils.math_utils import n50
from ..utils.seq_io import dump_graph, ordered_contigs, read_fastq, read_reference, write_fasta

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class PipelineResult:
    contigs: List[ContigVertex] = field(default_factory=list)
    report: AssemblyReport = field(default_factory=AssemblyReport)
    rounds: List[RoundSummary] = field(default_factory=list)
    graph: Optional[VertexSet] = None


@contextmanager
def trace_to(path) -> Iterator[None]:
    """Attach a file handler to the engine trace logger for the duration of a run."""
    if path is None:
        yield
        return
    handler = logging.FileHandler(path, mode="w")
    handler.setFormatter(logging.Formatter("%(message)s"))
    previous = trace_logger.level
    trace_logger.addHandler(handler)
    trace_logger.setLevel(logging.INFO)
    try:
        yield
    finally:
        trace_logger.removeHandler(handler)
        trace_logger.setLevel(previous)
        handler.close()


class AssemblyPipeline:
    """Runs every assembly stage for one configuration."""

    def __init__(self, config: PipelineConfig, engine: Optional[BSPEngine] = None):
        self.config = config
        self.engine = engine or BSPEngine(config.workers, config.routing, config.max_supersteps, config.seed)

    def _stage(self, name: str, fn: Callable[..., T], *args, **kwargs) -> T:
        logger.info("Stage %s started", name)
        try:
            result = fn(*args, **kwargs)
        except StageError:
            raise
        except Exception as exc:
            logger.error("Stage %s failed: %s", name, exc)
            raise StageError(name, exc) from exc
        logger.debug("Stage %s finished", name)
        return result

    def run(self, reads: Iterable[str], reference: Optional[str] = None) -> PipelineResult:
        """
        Assemble reads into contigs.

        Args:
            reads: Read sequences
            reference: Optional reference for the genome-fraction metric

        Returns:
            PipelineResult with the final contigs, per-round summaries and the report
        """
        cfg = self.config
        engine = self.engine
        theta = cfg.resolved_min_coverage

        graph = self._stage("dbg_build", build_graph, engine, reads, cfg.k, theta)
        logger.info("DBG: %d vertices (k=%d, min coverage %d)", len(graph), cfg.k, theta)
        if cfg.dump_graph_path is not None:
            with open(cfg.dump_graph_path, "wb") as handle:
                dump_graph([v.value for v in graph if isinstance(v.value, KmerVertex)], handle)

        rounds: List[RoundSummary] = []
        contigs: List[ContigVertex] = []
        for pass_no in range(1, cfg.passes + 1):
            labeled = self._stage(f"label_{pass_no}", label_contigs, engine, graph, cfg.labeler)
            merged = self._stage(f"merge_{pass_no}", merge_contigs, engine, labeled, cfg.k, cfg.tip_length, pass_no)
            contigs = merged.contigs
            lengths = [c.length for c in contigs]
            summary = RoundSummary(pass_no, len(contigs), n50(lengths), sum(lengths), merged.tips_dropped)
            graph = merged.graph

            if pass_no < cfg.passes:
                bubbles = self._stage(f"bubble_{pass_no}", filter_bubbles, engine, graph, cfg.edit_distance)
                attached = self._stage(f"attach_{pass_no}", attach_contig_info, engine, bubbles.graph, pass_no)
                tips = self._stage(f"tips_{pass_no}", remove_tips, engine, attached, cfg.k, cfg.tip_length, pass_no)
                graph = tips.graph
                summary.pruned_bubbles = bubbles.pruned
                summary.removed_tips = tips.stats.tips_removed

            logger.info("Round %d: %d contigs, N50 %d, %d merged tips, %d bubbles, %d tips",
                        pass_no, summary.contigs, summary.n50, summary.merged_tips,
                        summary.pruned_bubbles, summary.removed_tips)
            rounds.append(summary)

        contigs = ordered_contigs(contigs)
        report = compute_metrics([c.seq() for c in contigs], reference, engine.history, rounds)
        logger.info("Assembly: %s", report.summary())
        return PipelineResult(contigs, report, rounds, graph)


def run_pipeline(config: PipelineConfig, reads: Optional[Iterable[str]] = None,
                 reference: Optional[str] = None) -> PipelineResult:
    """
    Run the pipeline with file I/O taken from the config.

    Reads come from the argument or config.reads_path; contigs go to
    config.out_path and the TSV report to config.report_path when set.
    """
    if reads is None:
        reads = read_fastq(config.reads_path) if config.reads_path is not None else []
    if reference is None and config.reference_path is not None:
        reference = read_reference(config.reference_path)

    with trace_to(config.trace_path):
        result = AssemblyPipeline(config).run(reads, reference)

    if config.out_path is not None:
        with open(config.out_path, "w") as handle:
            write_fasta(result.contigs, handle)
    if config.report_path is not None:
        with open(config.report_path, "w") as handle:
            write_report(result.report, handle)
    return result
