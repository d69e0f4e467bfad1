"""
Bubble filtering: contigs joining the same two ambiguous vertices are
compared pairwise, and a low-coverage near-duplicate arm is pruned.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from .bsp_engine import BSPEngine, VertexSet
from ..entities.base_vertex import Vertex
from ..entities.contig_vertex import ContigTombstone, ContigVertex
from ..utils.kmer_codec import NULL_ID, reverse_complement
from ..utils.math_utils import edit_distance

logger = logging.getLogger(__name__)

BubbleKey = Tuple[int, int]


@dataclass
class BubbleOutcome:
    graph: VertexSet
    groups: int = 0
    pruned: int = 0


def bubble_key(contig: ContigVertex) -> Optional[BubbleKey]:
    """(nb1, nb2) with nb1 < nb2 when both ends attach to distinct vertices, else None."""
    first, second = contig.in_neighbor.vertex, contig.out_neighbor.vertex
    if NULL_ID in (first, second) or first == second:
        return None
    return (first, second) if first < second else (second, first)


def _oriented(contig: ContigVertex, forward: bool) -> str:
    seq = contig.seq()
    return seq if forward else reverse_complement(seq)


def filter_group(contigs: List[ContigVertex], nb1: int, threshold: int) -> Tuple[List[ContigVertex], List[ContigVertex]]:
    """
    Prune near-duplicate contigs of one bubble.

    Contigs are visited by descending coverage then ID. A pair closer than
    threshold loses its strictly lower-coverage member; ties keep both.

    Args:
        contigs: Contigs sharing both end vertices
        nb1: The smaller end vertex ID; a contig entering from nb1 runs forward
        threshold: Prune only when the edit distance is below this

    Returns:
        (survivors, pruned)
    """
    ordered = sorted(contigs, key=lambda c: (-c.coverage, c.id))
    forward = [c.in_neighbor.vertex == nb1 for c in ordered]
    pruned = [False] * len(ordered)
    for i, ci in enumerate(ordered):
        if pruned[i]:
            continue
        seq_i = ci.seq()
        for j in range(i + 1, len(ordered)):
            if pruned[j]:
                continue
            cj = ordered[j]
            seq_j = _oriented(cj, forward[i] == forward[j])
            if edit_distance(seq_i, seq_j) >= threshold:
                continue
            if cj.coverage < ci.coverage:
                pruned[j] = True
            elif ci.coverage < cj.coverage:
                pruned[i] = True
                break
    survivors = [c for c, p in zip(ordered, pruned) if not p]
    removed = [c for c, p in zip(ordered, pruned) if p]
    return survivors, removed


def filter_bubbles(engine: BSPEngine, graph: VertexSet, threshold: int) -> BubbleOutcome:
    """
    Group contigs by bubble key and replace pruned arms with tombstones.
    Every other vertex passes through unchanged.
    """
    def map_vertex(vertex: Vertex) -> Iterator[Tuple[BubbleKey, Vertex]]:
        key = bubble_key(vertex.value) if isinstance(vertex.value, ContigVertex) else None
        yield (key if key is not None else (vertex.id, NULL_ID)), vertex

    def reduce_bubble(key: BubbleKey, vertices: List[Vertex]) -> List[Vertex]:
        if key[1] == NULL_ID:
            return vertices
        survivors, removed = filter_group([v.value for v in vertices], key[0], threshold)
        result = [Vertex(c.id, c) for c in survivors]
        for contig in removed:
            logger.debug("Pruned bubble arm %#x (coverage %d)", contig.id, contig.coverage)
            result.append(Vertex(contig.id, ContigTombstone(contig.id, contig.in_neighbor, contig.out_neighbor,
                                                            reason="bubble", length=contig.length)))
        return result

    result = engine.mini_map_reduce(list(graph), map_vertex, reduce_bubble,
                                    value_key=lambda v: v.id, name="bubble_filter")
    keys = Counter(bubble_key(v.value) for v in graph if isinstance(v.value, ContigVertex))
    groups = sum(1 for key, size in keys.items() if key is not None and size > 1)
    pruned_total = sum(1 for v in result
                       if isinstance(v.value, ContigTombstone) and v.value.reason == "bubble")
    logger.info("Bubble filter: %d multi-arm groups, %d arms pruned", groups, pruned_total)
    return BubbleOutcome(result, groups, pruned_total)
