"""
Contig merging: group labeled vertices, order each group along its path and
stitch the member sequences into one contig vertex.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple, Union

from .bsp_engine import BSPEngine, VertexSet
from .contig_label import LabelOutcome, LabelState
from ..entities.base_vertex import Vertex
from ..entities.contig_vertex import NULL_NEIGHBOR, ContigNeighbor, ContigTombstone, ContigVertex
from ..entities.kmer_vertex import KmerVertex
from ..errors import CorruptLabelError
from ..utils.kmer_codec import End, PackedSequence, make_contig_id, reverse_complement

logger = logging.getLogger(__name__)

ChainStep = Tuple[int, End]


@dataclass
class MergeOutcome:
    """Graph after merging: contigs, tombstones of dropped tips and the untouched ambiguous vertices."""

    graph: VertexSet
    contigs: List[ContigVertex] = field(default_factory=list)
    tips_dropped: int = 0


def member_sequence(node: Union[KmerVertex, ContigVertex]) -> str:
    if isinstance(node, ContigVertex):
        return node.seq()
    return node.sequence


def order_chain(members: Dict[int, LabelState]) -> Tuple[List[ChainStep], bool, List[int]]:
    """
    Walk a label group from one free end to the other.

    A free end has no link or a link leaving the group. Groups without a free
    end are cycles and start at their smallest member, entered at its 5' end.

    Returns:
        (steps, circular, coverages): (member, entry end) in walking order, the
        cycle flag and the coverage of every internal link traversed

    Raises:
        CorruptLabelError: if the group is not a simple path or cycle
    """
    free_ends = []
    for member_id in sorted(members):
        state = members[member_id]
        for side in (End.FIVE_PRIME, End.THREE_PRIME):
            link = state.link_at(side)
            if link is None or link.neighbor not in members:
                free_ends.append((member_id, side))

    circular = not free_ends
    start: ChainStep = free_ends[0] if free_ends else (min(members), End.FIVE_PRIME)

    steps: List[ChainStep] = [start]
    coverages: List[int] = []
    visited = {start[0]}
    current, entry = start
    while True:
        link = members[current].link_at(entry.opposite())
        if link is None or link.neighbor not in members:
            break
        coverages.append(link.coverage)
        if link.neighbor == start[0] and circular:
            break
        if link.neighbor in visited:
            raise CorruptLabelError(f"group revisits {link.neighbor:#x}")
        current, entry = link.neighbor, link.neighbor_end
        visited.add(current)
        steps.append((current, entry))

    if len(steps) != len(members):
        raise CorruptLabelError(f"walk covered {len(steps)} of {len(members)} members")
    return steps, circular, coverages


def stitch(members: Dict[int, LabelState], steps: List[ChainStep], k: int, circular: bool) -> str:
    """
    Concatenate oriented member sequences, dropping each successor's k-1 overlap.
    Cycles lose the closing overlap as well.
    """
    parts: List[str] = []
    for index, (member_id, entry) in enumerate(steps):
        seq = member_sequence(members[member_id].node)
        if entry is End.THREE_PRIME:
            seq = reverse_complement(seq)
        parts.append(seq if index == 0 else seq[k - 1:])
    stitched = "".join(parts)
    if circular:
        stitched = stitched[:len(stitched) - (k - 1)]
    return stitched


def _outer_neighbor(state: LabelState, side: End, members: Dict[int, LabelState]) -> ContigNeighbor:
    link = state.link_at(side)
    if link is None or link.neighbor in members:
        return NULL_NEIGHBOR
    return ContigNeighbor(link.neighbor, link.neighbor_end, link.coverage, state.id, side)


def _group_coverage(members: Dict[int, LabelState], internal: List[int]) -> int:
    values = list(internal)
    for state in members.values():
        if isinstance(state.node, ContigVertex):
            values.append(state.node.coverage)
    if not values and len(members) == 1:
        values = [link.coverage for link in next(iter(members.values())).links]
    return min(values) if values else 0


def merge_group(label: int, members: Dict[int, LabelState], k: int,
                tip_length: int) -> Union[ContigVertex, ContigTombstone]:
    """
    Build the contig of one label group, or a tombstone if it is a short dangling tip.
    """
    steps, circular, internal = order_chain(members)
    sequence = stitch(members, steps, k, circular)

    if circular:
        in_nb = out_nb = NULL_NEIGHBOR
    else:
        first_id, first_entry = steps[0]
        last_id, last_entry = steps[-1]
        in_nb = _outer_neighbor(members[first_id], first_entry, members)
        out_nb = _outer_neighbor(members[last_id], last_entry.opposite(), members)

    if len(members) == 1:
        node = next(iter(members.values())).node
        circular = circular or (isinstance(node, ContigVertex) and node.circular)

    if not circular and (in_nb.is_null or out_nb.is_null) and len(sequence) <= tip_length:
        return ContigTombstone(label, in_nb, out_nb, reason="tip", length=len(sequence))

    if in_nb.is_null and out_nb.is_null and not circular:
        flipped = reverse_complement(sequence)
        sequence = min(sequence, flipped)

    return ContigVertex(label, PackedSequence.from_string(sequence), _group_coverage(members, internal),
                        in_nb, out_nb, circular)


def merge_contigs(engine: BSPEngine, labeled: Union[LabelOutcome, VertexSet], k: int,
                  tip_length: int, pass_no: int = 1) -> MergeOutcome:
    """
    Group labeled vertices, stitch each group, and rename the contigs.

    Ambiguous vertices pass through with their original node. Surviving
    contigs are renamed make_contig_id(pass_no, rank) by ascending label.

    Returns:
        MergeOutcome with the next graph and the surviving contigs
    """
    vertices = labeled.vertices if isinstance(labeled, LabelOutcome) else labeled

    def map_state(vertex: Vertex) -> Iterator[Tuple[int, LabelState]]:
        state: LabelState = vertex.value
        yield (state.label if state.labeled else state.id), state

    def reduce_group(key: int, states: List[LabelState]) -> List[Vertex]:
        if len(states) == 1 and not states[0].labeled:
            return [Vertex(states[0].id, states[0].node)]
        members = {s.id: s for s in states}
        return [Vertex(key, merge_group(key, members, k, tip_length))]

    merged = engine.mini_map_reduce(list(vertices), map_state, reduce_group,
                                    value_key=lambda s: s.id, name=f"merge_{pass_no}")

    contig_labels = [v.id for v in merged if isinstance(v.value, ContigVertex)]
    renames = {label: make_contig_id(pass_no, rank) for rank, label in enumerate(contig_labels, start=1)}

    def rename(vertex: Vertex) -> List[Vertex]:
        if vertex.id in renames:
            contig = vertex.value.renamed(renames[vertex.id])
            return [Vertex(contig.id, contig)]
        return [Vertex(vertex.id, vertex.value)]

    graph = engine.convert_job(merged, rename, name=f"rename_{pass_no}")
    contigs = [v.value for v in graph if isinstance(v.value, ContigVertex)]
    tips = sum(1 for v in graph if isinstance(v.value, ContigTombstone))
    logger.info("Pass %d merge: %d contigs, %d short tips dropped", pass_no, len(contigs), tips)
    return MergeOutcome(graph, contigs, tips)
