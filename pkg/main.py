import argparse
import logging
import sys
import traceback
from pathlib import Path
from typing import List, Optional

from src.config.constants import (
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
)
from src.config.settings import Labeler, PipelineConfig, RoutingPolicy, SimConfig
from src.errors import AssemblyError
from src.systems.pipeline import run_pipeline
from src.systems.readsim import simulate
from src.utils.seq_io import write_fasta, write_fastq, write_reference

logger = logging.getLogger("assembler")


class AssemblerApp:
    """Command-line front end: `assemble` reads into contigs, `simulate` reads from a reference."""

    def __init__(self):
        self.parser = self.build_parser()

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(description="De Bruijn graph assembler on a vertex-centric BSP engine")
        parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        parser.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")
        commands = parser.add_subparsers(dest="command", required=True)

        assemble = commands.add_parser("assemble", help="Assemble FASTQ reads into FASTA contigs")
        assemble.add_argument("--reads", type=Path, required=True, help="Input FASTQ")
        assemble.add_argument("--out", type=Path, help="Output FASTA (stdout if omitted)")
        assemble.add_argument("--k", type=int, default=DEFAULT_K)
        assemble.add_argument("--min-coverage", type=int, default=None,
                              help="Keep (k+1)-mers seen more often than this")
        assemble.add_argument("--simulated-errors", action="store_true",
                              help="Reads carry sequencing errors; min coverage defaults to 1")
        assemble.add_argument("--tip-length", type=int, default=DEFAULT_TIP_LENGTH)
        assemble.add_argument("--edit-distance", type=int, default=DEFAULT_EDIT_DISTANCE)
        assemble.add_argument("--labeler", choices=[m.value for m in Labeler], default=Labeler.LR.value)
        assemble.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
        assemble.add_argument("--rounds", type=int, default=DEFAULT_EXTRA_ROUNDS,
                              help="Extra error-correction rounds after the first pass")
        assemble.add_argument("--seed", type=int, default=0, help="Salt of the engine partition hash")
        assemble.add_argument("--reference", type=Path, help="Reference FASTA for the genome fraction")
        assemble.add_argument("--report", type=Path, help="Tab-separated report")
        assemble.add_argument("--trace", type=Path, help="Per-superstep job trace")
        assemble.add_argument("--dump-graph", type=Path, help="Binary dump of the initial graph")
        assemble.add_argument("--routing", choices=[m.value for m in RoutingPolicy], default=RoutingPolicy.DROP.value)
        assemble.add_argument("--max-supersteps", type=int, default=DEFAULT_MAX_SUPERSTEPS)

        sim = commands.add_parser("simulate", help="Simulate FASTQ reads")
        sim.add_argument("--out", type=Path, help="Output FASTQ (stdout if omitted)")
        sim.add_argument("--reference", type=Path, help="Reference FASTA to sample from")
        sim.add_argument("--reference-out", type=Path, help="Write the sampled reference as FASTA")
        sim.add_argument("--reference-length", type=int, default=DEFAULT_REFERENCE_LENGTH)
        sim.add_argument("--read-length-min", type=int, default=DEFAULT_READ_LENGTH)
        sim.add_argument("--read-length-max", type=int, default=DEFAULT_READ_LENGTH)
        sim.add_argument("--depth", type=float, default=DEFAULT_DEPTH)
        sim.add_argument("--error-rate", type=float, default=DEFAULT_ERROR_RATE)
        sim.add_argument("--n-rate", type=float, default=0.0)
        sim.add_argument("--seed", type=int, default=0)
        return parser

    @staticmethod
    def configure_logging(args: argparse.Namespace) -> None:
        level = logging.WARNING if args.quiet else getattr(logging, args.log_level)
        logging.basicConfig(level=level, stream=sys.stderr,
                            format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    def assemble(self, args: argparse.Namespace) -> int:
        config = PipelineConfig(
            k=args.k,
            min_coverage=args.min_coverage,
            tip_length=args.tip_length,
            edit_distance=args.edit_distance,
            labeler=Labeler(args.labeler),
            workers=args.workers,
            extra_rounds=args.rounds,
            seed=args.seed,
            reads_path=args.reads,
            out_path=args.out,
            reference_path=args.reference,
            report_path=args.report,
            trace_path=args.trace,
            dump_graph_path=args.dump_graph,
            routing=RoutingPolicy(args.routing),
            max_supersteps=args.max_supersteps,
            simulated_errors=args.simulated_errors,
        )
        result = run_pipeline(config)
        if config.out_path is None:
            write_fasta(result.contigs, sys.stdout)
        logger.info("Done: %s", result.report.summary())
        return 0

    def simulate(self, args: argparse.Namespace) -> int:
        config = SimConfig(
            reference_length=args.reference_length,
            reference_path=args.reference,
            read_length_min=args.read_length_min,
            read_length_max=args.read_length_max,
            depth=args.depth,
            error_rate=args.error_rate,
            n_rate=args.n_rate,
            seed=args.seed,
        )
        result = simulate(config)
        logger.info("Simulated %d reads, %d bases (%.1fx)", len(result.reads), result.total_bases,
                    result.total_bases / max(len(result.reference), 1))
        if args.out is None:
            write_fastq(result.reads, sys.stdout)
        else:
            with open(args.out, "w") as handle:
                write_fastq(result.reads, handle)
        if args.reference_out is not None:
            with open(args.reference_out, "w") as handle:
                write_reference(result.reference, handle)
        return 0

    def run(self, argv: Optional[List[str]] = None) -> int:
        args = self.parser.parse_args(argv)
        self.configure_logging(args)
        try:
            if args.command == "assemble":
                return self.assemble(args)
            return self.simulate(args)
        except AssemblyError as e:
            logger.error("%s", e)
            logger.debug("Traceback:\n%s", traceback.format_exc())
            return 1
        except OSError as e:
            logger.error("I/O error: %s", e)
            return 1


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    try:
        return AssemblerApp().run(argv)
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 1
    except Exception as e:
        print(f"Unexpected failure: {e}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
