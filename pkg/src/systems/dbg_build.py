"""
De Bruijn graph construction.

Two map-reduce passes on the engine: reads are cut into (k+1)-mers which are
counted and filtered by coverage, then every surviving (k+1)-mer contributes
one edge to the bitmaps of its prefix and suffix k-mers.
"""

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple

from .bsp_engine import BSPEngine, VertexSet
from ..entities.base_vertex import Vertex
from ..entities.kmer_vertex import Direction, KmerVertex, NeighborBitmap, make_slot
from ..errors import InvalidKError, InvalidReadError
from ..config.constants import MAX_K
from ..utils.kmer_codec import (
    EdgePolarity,
    canonical_id,
    encode_sequence,
    reverse_complement_id,
)

logger = logging.getLogger(__name__)

_READ_ALPHABET = re.compile(r"[^ACGTN]")


@dataclass(frozen=True)
class K1Mer:
    """A canonical (k+1)-mer and the number of read windows producing it."""

    id: int
    count: int


def extract_k1mers(read: str, k: int) -> List[str]:
    """
    Sliding (k+1)-windows of every N-free segment of a read.

    Raises:
        InvalidReadError: if the read holds characters other than A, C, G, T, N
    """
    bad = _READ_ALPHABET.search(read)
    if bad:
        raise InvalidReadError(f"invalid character {bad.group()!r} at {bad.start()} in read")
    width = k + 1
    windows: List[str] = []
    for segment in read.split("N"):
        windows.extend(segment[i:i + width] for i in range(len(segment) - width + 1))
    return windows


def _canonical_k1mer_ids(read: str, k: int) -> Iterator[int]:
    for window in extract_k1mers(read, k):
        yield canonical_id(encode_sequence(window), k + 1)[0]


def count_and_filter(engine: BSPEngine, reads: Iterable[str], k: int, min_coverage: int) -> VertexSet:
    """
    Count canonical (k+1)-mers across reads and keep those seen more than min_coverage times.

    Returns:
        VertexSet of Vertex(id, K1Mer)
    """
    if not 1 <= k <= MAX_K:
        raise InvalidKError(f"k must be in 1..{MAX_K}, got {k}")

    def map_read(read: str) -> Iterator[Tuple[int, int]]:
        for k1mer_id in _canonical_k1mer_ids(read, k):
            yield k1mer_id, 1

    def combine(_key: int, counts: List[int]) -> List[int]:
        return [sum(counts)]

    def reduce_counts(key: int, counts: List[int]) -> List[Vertex]:
        total = sum(counts)
        if total > min_coverage:
            return [Vertex(key, K1Mer(key, total))]
        return []

    result = engine.mini_map_reduce(reads, map_read, reduce_counts, combiner=combine, name="count_k1mers")
    logger.info("Counted %d distinct (k+1)-mers above coverage %d", len(result), min_coverage)
    return result


def k1mer_edge(k1mer_id: int, k: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """
    The bitmap entries a (k+1)-mer contributes.

    The edge is written from its smaller canonical endpoint: an out-slot at the
    source and an in-slot at the destination. A self-loop yields only the
    out-slot; the second pair is then (source, -1).

    Returns:
        ((source_id, out_slot), (destination_id, in_slot))
    """
    width = k + 1
    mask = (1 << (2 * k)) - 1
    word = k1mer_id
    prefix, src_label = canonical_id(word >> 2, k)
    suffix, dst_label = canonical_id(word & mask, k)
    if prefix > suffix:
        word = reverse_complement_id(word, width)
        prefix, src_label = canonical_id(word >> 2, k)
        suffix, dst_label = canonical_id(word & mask, k)
    polarity = EdgePolarity(src_label, dst_label)
    out_slot = make_slot(polarity, Direction.OUT, word & 0b11)
    if prefix == suffix:
        return (prefix, out_slot), (suffix, -1)
    in_slot = make_slot(polarity, Direction.IN, word >> (2 * k))
    return (prefix, out_slot), (suffix, in_slot)


def build_vertices(engine: BSPEngine, k1mers: Iterable[Vertex], k: int) -> VertexSet:
    """
    Turn counted (k+1)-mers into k-mer vertices with neighbor bitmaps.

    Returns:
        VertexSet of Vertex(id, KmerVertex)
    """

    def map_edge(vertex: Vertex) -> Iterator[Tuple[int, Tuple[int, int]]]:
        k1mer: K1Mer = vertex.value
        (src, out_slot), (dst, in_slot) = k1mer_edge(k1mer.id, k)
        yield src, (out_slot, k1mer.count)
        if in_slot >= 0:
            yield dst, (in_slot, k1mer.count)

    def reduce_vertex(kmer_id: int, slots: List[Tuple[int, int]]) -> List[Vertex]:
        bitmap = NeighborBitmap()
        for slot, count in slots:
            bitmap.add(slot, count)
        return [Vertex(kmer_id, KmerVertex(kmer_id, k, bitmap))]

    result = engine.mini_map_reduce(list(k1mers), map_edge, reduce_vertex, name="build_vertices")
    logger.info("Built %d k-mer vertices", len(result))
    return result


def build_graph(engine: BSPEngine, reads: Iterable[str], k: int, min_coverage: int) -> VertexSet:
    """Reads to de Bruijn graph: extract, count, filter and build."""
    k1mers = count_and_filter(engine, reads, k, min_coverage)
    return build_vertices(engine, k1mers, k)
