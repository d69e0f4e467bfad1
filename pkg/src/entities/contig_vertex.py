"""
Contig vertices produced by merging labeled k-mer paths.
"""

from dataclasses import dataclass, replace
from typing import List

from .kmer_vertex import Link
from ..utils.kmer_codec import NULL_ID, End, Orientation, PackedSequence


@dataclass(frozen=True)
class ContigNeighbor:
    """
    What lies past one end of a contig.

    vertex/end: the neighbor vertex and which of its ends the edge touches.
    anchor/anchor_end: the ID and end the neighbor currently uses to refer
    to this contig (a merged member until contig info is attached, then the
    contig itself).
    """

    vertex: int = NULL_ID
    end: End = End.FIVE_PRIME
    coverage: int = 0
    anchor: int = NULL_ID
    anchor_end: End = End.FIVE_PRIME

    @property
    def is_null(self) -> bool:
        return self.vertex == NULL_ID

    def label(self, side: End) -> Orientation:
        """L when the neighbor is entered in its canonical orientation."""
        if side is End.FIVE_PRIME:
            return Orientation.L if self.end is End.THREE_PRIME else Orientation.H
        return Orientation.L if self.end is End.FIVE_PRIME else Orientation.H


NULL_NEIGHBOR = ContigNeighbor()


@dataclass
class ContigVertex:
    id: int
    sequence: PackedSequence
    coverage: int
    in_neighbor: ContigNeighbor = NULL_NEIGHBOR
    out_neighbor: ContigNeighbor = NULL_NEIGHBOR
    circular: bool = False

    @property
    def length(self) -> int:
        return len(self.sequence)

    def seq(self) -> str:
        return self.sequence.to_string()

    def neighbor(self, side: End) -> ContigNeighbor:
        return self.in_neighbor if side is End.FIVE_PRIME else self.out_neighbor

    def links(self) -> List[Link]:
        result = []
        for side, nb in ((End.FIVE_PRIME, self.in_neighbor), (End.THREE_PRIME, self.out_neighbor)):
            if not nb.is_null:
                result.append(Link(nb.vertex, side, nb.end, nb.coverage))
        return result

    def renamed(self, new_id: int) -> "ContigVertex":
        return replace(self, id=new_id)


@dataclass
class ContigTombstone:
    """A contig removed by merging (short tip) or bubble pruning; kept until its neighbors are told."""

    id: int
    in_neighbor: ContigNeighbor = NULL_NEIGHBOR
    out_neighbor: ContigNeighbor = NULL_NEIGHBOR
    reason: str = "tip"
    length: int = 0

    def neighbor(self, side: End) -> ContigNeighbor:
        return self.in_neighbor if side is End.FIVE_PRIME else self.out_neighbor
