"""
De Bruijn graph k-mer vertices and their compact adjacency encodings.

Bitmap slot index = polarity * 8 + direction * 4 + nucleotide, with
polarity LL=0 LH=1 HL=2 HH=3, direction in=0 out=1, nucleotide A=0 C=1 G=2 T=3.

An adjacency item is the 8-bit value 000 XX Y ZZ (XX nucleotide, Y=1 for an
in-edge, ZZ polarity); 10000000 marks a NULL neighbor.
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import ClassVar, Iterable, List, Optional, Sequence, Tuple, Union

from ..utils.kmer_codec import (
    NULL_ID,
    EdgePolarity,
    End,
    Orientation,
    decode_kmer,
    reverse_complement_id,
)


class Direction(IntEnum):
    IN = 0
    OUT = 1


class VertexType(Enum):
    ONE = "<1>"
    ONE_ONE = "<1-1>"
    M_N = "<m-n>"

    @property
    def ambiguous(self) -> bool:
        return self is VertexType.M_N


def make_slot(polarity: EdgePolarity, direction: Direction, nucleotide: int) -> int:
    return polarity.code * 8 + int(direction) * 4 + nucleotide


def split_slot(slot: int) -> Tuple[EdgePolarity, Direction, int]:
    return EdgePolarity.from_code(slot >> 3), Direction((slot >> 2) & 1), slot & 0b11


def endpoint_labels(polarity: EdgePolarity, direction: Direction) -> Tuple[Orientation, Orientation]:
    """(self label, neighbor label) of an edge stored at one endpoint."""
    if direction is Direction.OUT:
        return polarity.src, polarity.dst
    return polarity.dst, polarity.src


def link_ends(direction: Direction, self_label: Orientation, neighbor_label: Orientation) -> Tuple[End, End]:
    """Which end of each endpoint's canonical sequence the edge touches."""
    out = direction is Direction.OUT
    self_end = End.THREE_PRIME if out != (self_label is Orientation.H) else End.FIVE_PRIME
    neighbor_end = End.FIVE_PRIME if out != (neighbor_label is Orientation.H) else End.THREE_PRIME
    return self_end, neighbor_end


@dataclass(frozen=True)
class AdjItem:
    """One k-mer neighbor in the 8-bit item form, with its edge coverage."""

    NULL_BITS: ClassVar[int] = 0b1000_0000

    bits: int
    coverage: int = 0

    @classmethod
    def from_slot(cls, slot: int, coverage: int = 0) -> "AdjItem":
        polarity, direction, nucleotide = split_slot(slot)
        y = 1 if direction is Direction.IN else 0
        return cls((nucleotide << 3) | (y << 2) | polarity.code, coverage)

    @classmethod
    def null(cls) -> "AdjItem":
        return cls(cls.NULL_BITS)

    @property
    def is_null(self) -> bool:
        return self.bits == self.NULL_BITS

    @property
    def slot(self) -> int:
        direction = Direction.IN if (self.bits >> 2) & 1 else Direction.OUT
        return make_slot(EdgePolarity.from_code(self.bits & 0b11), direction, (self.bits >> 3) & 0b11)

    def __str__(self) -> str:
        return format(self.bits, "08b")


class NeighborBitmap:
    """32-bit neighbor map plus one coverage per set bit, in ascending bit order."""

    __slots__ = ("bits", "coverages")

    def __init__(self, bits: int = 0, coverages: Optional[List[int]] = None):
        self.bits = bits
        self.coverages = list(coverages) if coverages else []
        if len(self.coverages) != bin(bits).count("1"):
            raise ValueError("one coverage per set bit is required")

    def _rank(self, slot: int) -> int:
        return bin(self.bits & ((1 << slot) - 1)).count("1")

    def add(self, slot: int, coverage: int) -> None:
        """Set a slot, summing coverage if it is already present."""
        if not 0 <= slot < 32:
            raise ValueError(f"slot {slot} out of range")
        index = self._rank(slot)
        if self.bits >> slot & 1:
            self.coverages[index] += coverage
        else:
            self.bits |= 1 << slot
            self.coverages.insert(index, coverage)

    def coverage(self, slot: int) -> int:
        if not self.bits >> slot & 1:
            raise KeyError(slot)
        return self.coverages[self._rank(slot)]

    def slots(self) -> List[int]:
        return [s for s in range(32) if self.bits >> s & 1]

    def items(self) -> List[Tuple[int, int]]:
        return list(zip(self.slots(), self.coverages))

    def __contains__(self, slot: int) -> bool:
        return bool(self.bits >> slot & 1)

    def __len__(self) -> int:
        return len(self.coverages)

    def __eq__(self, other) -> bool:
        return (isinstance(other, NeighborBitmap) and self.bits == other.bits
                and self.coverages == other.coverages)

    def __repr__(self) -> str:
        return f"NeighborBitmap({self.bits:#010x}, {self.coverages})"


@dataclass(frozen=True)
class ContigTriplet:
    """A contig hanging off a k-mer: the contig, its far end, and the edge to it."""

    contig_id: int
    contig_end: End
    self_end: End
    other_end: int
    other_end_side: End
    length: int
    coverage: int
    link_coverage: int


@dataclass(frozen=True)
class Link:
    """
    Adjacency normalized to vertex ends.
    In the tip view a link through a contig points at the contig's far k-mer
    and carries the contig ID and the bases it adds beyond the k-1 overlap.
    """

    neighbor: int
    self_end: End
    neighbor_end: End
    coverage: int = 0
    contig: int = NULL_ID
    contig_extra: int = 0

    @property
    def via_contig(self) -> bool:
        return self.contig != NULL_ID


def classify_links(vertex_id: int, links: Sequence[Link]) -> VertexType:
    """
    <1>: at most one link. <1-1>: one link at each end and no self-loop.
    Everything else is ambiguous.
    """
    if any(link.neighbor == vertex_id for link in links):
        return VertexType.M_N
    if len(links) <= 1:
        return VertexType.ONE
    if len(links) == 2 and links[0].self_end != links[1].self_end:
        return VertexType.ONE_ONE
    return VertexType.M_N


def _neighbor_from_slot(vertex_id: int, k: int, slot: int) -> Tuple[int, End, End]:
    polarity, direction, nucleotide = split_slot(slot)
    self_label, neighbor_label = endpoint_labels(polarity, direction)
    oriented = vertex_id if self_label is Orientation.L else reverse_complement_id(vertex_id, k)
    if direction is Direction.OUT:
        target = ((oriented << 2) | nucleotide) & ((1 << (2 * k)) - 1)
    else:
        target = (nucleotide << (2 * (k - 1))) | (oriented >> 2)
    if neighbor_label is Orientation.H:
        target = reverse_complement_id(target, k)
    self_end, neighbor_end = link_ends(direction, self_label, neighbor_label)
    return target, self_end, neighbor_end


def decode_neighbor(vertex_id: int, k: int, slot_or_item: Union[int, AdjItem]) -> int:
    """
    Reconstruct a neighbor ID from a bitmap slot or adjacency item.

    Args:
        vertex_id: Canonical ID of the vertex holding the slot
        k: k-mer length
        slot_or_item: Bitmap slot index or AdjItem

    Returns:
        Canonical neighbor ID, or NULL_ID for the NULL item
    """
    if isinstance(slot_or_item, AdjItem):
        if slot_or_item.is_null:
            return NULL_ID
        slot_or_item = slot_or_item.slot
    return _neighbor_from_slot(vertex_id, k, slot_or_item)[0]


AdjacencyEntry = Union[AdjItem, ContigTriplet]


@dataclass
class KmerVertex:
    """
    A canonical k-mer. Freshly built vertices hold a NeighborBitmap; after
    contig information is attached they hold an explicit adjacency list of
    AdjItems and ContigTriplets.
    """

    id: int
    k: int
    bitmap: Optional[NeighborBitmap] = None
    adjacency: Optional[List[AdjacencyEntry]] = field(default=None)

    @property
    def sequence(self) -> str:
        return decode_kmer(self.id, self.k)

    def entries(self) -> List[AdjacencyEntry]:
        if self.adjacency is not None:
            return list(self.adjacency)
        if self.bitmap is None:
            return []
        return [AdjItem.from_slot(slot, cov) for slot, cov in self.bitmap.items()]

    def entry_link(self, entry: AdjacencyEntry, tip_view: bool = False) -> Link:
        if isinstance(entry, ContigTriplet):
            if tip_view:
                return Link(entry.other_end, entry.self_end, entry.other_end_side, entry.link_coverage,
                            entry.contig_id, entry.length - (self.k - 1))
            return Link(entry.contig_id, entry.self_end, entry.contig_end, entry.link_coverage)
        neighbor, self_end, neighbor_end = _neighbor_from_slot(self.id, self.k, entry.slot)
        return Link(neighbor, self_end, neighbor_end, entry.coverage)

    def links(self) -> List[Link]:
        """Adjacency as seen by labeling and merging: contigs are neighbors."""
        return [self.entry_link(entry) for entry in self.entries()]

    def tip_links(self) -> List[Link]:
        """Adjacency as seen by tip removal: contigs are edges to their far k-mer."""
        return [self.entry_link(entry, tip_view=True) for entry in self.entries()]

    def vertex_type(self) -> VertexType:
        return classify_links(self.id, self.links())

    def with_entries(self, entries: Iterable[AdjacencyEntry]) -> "KmerVertex":
        return KmerVertex(self.id, self.k, None, list(entries))
