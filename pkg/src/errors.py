"""
Exception hierarchy for the assembler.
Every error raised on purpose by the package derives from AssemblyError.
"""

from typing import Any, Optional


class AssemblyError(Exception):
    """Base class for all assembler errors."""


class InvalidSequenceError(AssemblyError, ValueError):
    """A nucleotide string contains characters outside A/C/G/T."""


class InvalidKError(AssemblyError, ValueError):
    """k is outside the supported range."""


class NotAKmerError(AssemblyError, ValueError):
    """A 64-bit value was expected to be an unflipped k-mer ID."""


class InvalidIdError(AssemblyError, ValueError):
    """A contig ID component is out of range."""


class InvalidReadError(AssemblyError, ValueError):
    """A read contains characters outside A/C/G/T/N."""


class FastqParseError(AssemblyError):
    """Malformed FASTQ input."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class RoutingError(AssemblyError):
    """A message was addressed to a vertex that does not exist."""

    def __init__(self, target: int, superstep: int):
        super().__init__(f"no vertex {target:#x} for message sent in superstep {superstep}")
        self.target = target
        self.superstep = superstep


class NonTerminationError(AssemblyError):
    """A job exceeded its superstep budget."""

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class DuplicateVertexError(AssemblyError):
    """Two vertices with the same ID were produced for one job."""

    def __init__(self, vertex_id: int):
        super().__init__(f"duplicate vertex ID {vertex_id:#x}")
        self.vertex_id = vertex_id


class CorruptLabelError(AssemblyError):
    """A labeled group is not a simple path or cycle."""


class StaleReferenceError(AssemblyError):
    """Adjacency refers to a vertex or contig that no longer exists."""


class ConfigError(AssemblyError, ValueError):
    """Invalid pipeline or simulator configuration."""


class StageError(AssemblyError):
    """Wraps any failure inside a pipeline stage with the stage name."""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"stage '{stage}' failed{detail}")
        self.stage = stage
        self.cause = cause
