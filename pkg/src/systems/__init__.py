"""
Assembly stages and the engine they run on.
"""

from .bsp_engine import Aggregator, BSPEngine, JobResult, JobStats, SuperstepContext, VertexSet
from .dbg_build import build_graph
from .contig_label import label_contigs
from .contig_merge import merge_contigs
from .bubble_filter import filter_bubbles
from .tip_remove import attach_contig_info, remove_tips
from .assembly_report import AssemblyReport, compute_metrics
from .pipeline import AssemblyPipeline, PipelineResult, run_pipeline
from .readsim import simulate

__all__ = [
    'Aggregator',
    'BSPEngine',
    'JobResult',
    'JobStats',
    'SuperstepContext',
    'VertexSet',
    'build_graph',
    'label_contigs',
    'merge_contigs',
    'filter_bubbles',
    'attach_contig_info',
    'remove_tips',
    'AssemblyReport',
    'compute_metrics',
    'AssemblyPipeline',
    'PipelineResult',
    'run_pipeline',
    'simulate',
]
