"""
Sequence file I/O: FASTQ reads in, FASTA contigs out, and the binary graph dump.
"""

import logging
import struct
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Sequence, Union

from Bio import SeqIO
from Bio.Seq import Seq
from Bio.SeqIO.FastaIO import FastaWriter
from Bio.SeqRecord import SeqRecord

from ..config.constants import DEFAULT_PHRED, FASTA_WRAP
from ..entities.contig_vertex import ContigVertex
from ..entities.kmer_vertex import KmerVertex, NeighborBitmap
from ..errors import FastqParseError
from .kmer_codec import decode_varint, encode_varint, format_id

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_VERTEX_HEADER = struct.Struct("<QI")


def parse_fastq(stream: Iterable[str]) -> Iterator[str]:
    """
    Yield the uppercased sequence of every 4-line FASTQ record.

    Blank lines between records and at the end are skipped.

    Raises:
        FastqParseError: on a malformed or truncated record
    """
    record: List[str] = []
    line_no = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not record and not line.strip():
            continue
        record.append(line)
        if len(record) == 1 and not line.startswith("@"):
            raise FastqParseError(line_no, "expected a '@' header line")
        if len(record) == 3 and not line.startswith("+"):
            raise FastqParseError(line_no, "expected a '+' separator line")
        if len(record) == 4:
            sequence = record[1].strip()
            if len(line.strip()) != len(sequence):
                raise FastqParseError(line_no, "quality length does not match sequence length")
            yield sequence.upper()
            record = []
    if record:
        raise FastqParseError(line_no, "truncated record at end of input")


def read_fastq(path: PathLike) -> List[str]:
    with open(path, "r") as handle:
        reads = list(parse_fastq(handle))
    logger.info("Read %d sequences from %s", len(reads), path)
    return reads


def contig_name(contig: ContigVertex) -> str:
    return format_id(contig.id, 1)


def ordered_contigs(contigs: Iterable[ContigVertex]) -> List[ContigVertex]:
    """Longest first, ties by ID."""
    return sorted(contigs, key=lambda c: (-c.length, c.id))


def write_fasta(contigs: Iterable[ContigVertex], handle: IO[str]) -> int:
    """
    Write contigs as wrapped FASTA records.

    Returns:
        Number of records written
    """
    records = [
        SeqRecord(Seq(contig.seq()), id=contig_name(contig),
                  description=f"len={contig.length} cov={contig.coverage} circular={contig.circular}")
        for contig in ordered_contigs(contigs)
    ]
    if records:
        FastaWriter(handle, wrap=FASTA_WRAP).write_file(records)
    return len(records)


def write_reference(sequence: str, handle: IO[str], name: str = "reference") -> None:
    record = SeqRecord(Seq(sequence), id=name, description=f"len={len(sequence)}")
    FastaWriter(handle, wrap=FASTA_WRAP).write_file([record])


def read_reference(path: PathLike) -> str:
    """Sequence of a single-record FASTA file, uppercased."""
    return str(SeqIO.read(str(path), "fasta").seq).upper()


def write_fastq(reads: Iterable, handle: IO[str], phred: int = DEFAULT_PHRED) -> int:
    """
    Write simulated reads as FASTQ with a constant quality.

    Args:
        reads: Objects with name, sequence, strand and start attributes
        handle: Text stream to write to
        phred: Quality assigned to every base

    Returns:
        Number of records written
    """
    records = []
    for read in reads:
        record = SeqRecord(Seq(read.sequence), id=read.name,
                           description=f"strand={read.strand} start={read.start}")
        record.letter_annotations["phred_quality"] = [phred] * len(read.sequence)
        records.append(record)
    return SeqIO.write(records, handle, "fastq")


def dump_graph(kmers: Iterable[KmerVertex], handle: IO[bytes]) -> int:
    """
    Binary dump of bitmap-form k-mer vertices: per vertex an 8-byte ID and a
    4-byte bitmap (little-endian), then one varint coverage per set bit.

    Returns:
        Number of bytes written
    """
    written = 0
    for kmer in sorted(kmers, key=lambda v: v.id):
        bitmap = kmer.bitmap or NeighborBitmap()
        chunk = _VERTEX_HEADER.pack(kmer.id, bitmap.bits) + b"".join(encode_varint(c) for c in bitmap.coverages)
        handle.write(chunk)
        written += len(chunk)
    return written


def load_graph(data: bytes, k: int) -> List[KmerVertex]:
    """Inverse of dump_graph."""
    kmers: List[KmerVertex] = []
    offset = 0
    while offset < len(data):
        if offset + _VERTEX_HEADER.size > len(data):
            raise ValueError(f"truncated vertex header at byte {offset}")
        kmer_id, bits = _VERTEX_HEADER.unpack_from(data, offset)
        offset += _VERTEX_HEADER.size
        coverages: Sequence[int] = []
        for _ in range(bin(bits).count("1")):
            value, offset = decode_varint(data, offset)
            coverages.append(value)
        kmers.append(KmerVertex(kmer_id, k, NeighborBitmap(bits, coverages)))
    return kmers
