"""
Contig attachment and tip removal.

After merging, ambiguous k-mers still point at the merged members. The
attach job lets every contig introduce itself to its end vertices, and every
tombstone tell them to forget it. Tip removal then runs in phases of
REQUEST/DELETE waves: dead-end k-mers send a REQUEST along their path,
accumulating its length; the vertex where the path ends sends a DELETE back
if the path is short enough, and the DELETE wave removes every vertex and
contig it passes.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .bsp_engine import Aggregator, BSPEngine, Envelope, SuperstepContext, VertexSet
from ..entities.base_vertex import Vertex
from ..entities.contig_vertex import ContigNeighbor, ContigTombstone, ContigVertex
from ..entities.kmer_vertex import AdjacencyEntry, ContigTriplet, KmerVertex, Link, VertexType, classify_links
from ..entities.messages import ContigInfo, DeleteContig, DeletionNotice, TipKind, TipMessage
from ..errors import NonTerminationError, StaleReferenceError
from ..utils.kmer_codec import NULL_ID, End

logger = logging.getLogger(__name__)

DEAD_ENDS = "dead_ends"
TIPS = "tips"

LinkKey = Tuple[int, End, End]


def _attach_contig(contig: ContigVertex, ctx: SuperstepContext) -> None:
    for side in (End.FIVE_PRIME, End.THREE_PRIME):
        nb = contig.neighbor(side)
        if nb.is_null:
            continue
        other = contig.neighbor(side.opposite())
        ctx.send(nb.vertex, ContigInfo(contig.id, side, nb.anchor, nb.anchor_end, nb.end,
                                       other.vertex, other.end, contig.length, contig.coverage, nb.coverage))
    contig.in_neighbor = _reanchor(contig.in_neighbor, contig.id, End.FIVE_PRIME)
    contig.out_neighbor = _reanchor(contig.out_neighbor, contig.id, End.THREE_PRIME)


def _reanchor(nb: ContigNeighbor, contig_id: int, side: End) -> ContigNeighbor:
    if nb.is_null:
        return nb
    return ContigNeighbor(nb.vertex, nb.end, nb.coverage, contig_id, side)


def _rebuild_adjacency(kmer: KmerVertex, messages: List[Envelope]) -> KmerVertex:
    infos: Dict[LinkKey, ContigInfo] = {}
    notices: Dict[LinkKey, DeletionNotice] = {}
    for env in messages:
        body = env.body
        if isinstance(body, ContigInfo):
            infos[(body.anchor, body.anchor_end, body.target_end)] = body
        elif isinstance(body, DeletionNotice):
            notices[(body.anchor, body.anchor_end, body.target_end)] = body

    used = set()
    entries: List[AdjacencyEntry] = []
    for entry in kmer.entries():
        link = kmer.entry_link(entry)
        key = (link.neighbor, link.neighbor_end, link.self_end)
        if key in infos:
            info = infos[key]
            entries.append(ContigTriplet(info.contig, info.contig_end, link.self_end, info.other,
                                         info.other_side, info.length, info.coverage, info.link_coverage))
            used.add(key)
        elif key in notices:
            used.add(key)
        elif isinstance(entry, ContigTriplet):
            raise StaleReferenceError(f"k-mer {kmer.id:#x} still refers to contig {entry.contig_id:#x}")
        else:
            entries.append(entry)

    unused = (set(infos) | set(notices)) - used
    if unused:
        anchor = min(unused)[0]
        raise StaleReferenceError(f"k-mer {kmer.id:#x} has no link to {anchor:#x}")
    return kmer.with_entries(entries)


def attach_compute(vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> None:
    value = vertex.value
    if ctx.superstep == 0:
        if isinstance(value, ContigVertex):
            _attach_contig(value, ctx)
        elif isinstance(value, ContigTombstone):
            for side in (End.FIVE_PRIME, End.THREE_PRIME):
                nb = value.neighbor(side)
                if not nb.is_null:
                    ctx.send(nb.vertex, DeletionNotice(nb.anchor, nb.anchor_end, nb.end))
    elif isinstance(value, KmerVertex) and messages:
        vertex.value = _rebuild_adjacency(value, messages)
    ctx.vote_to_halt()


def attach_contig_info(engine: BSPEngine, graph: VertexSet, pass_no: int = 1) -> VertexSet:
    """
    Install contig triplets at the contigs' end vertices and drop tombstones.

    Raises:
        StaleReferenceError: if a k-mer link matches no contig or tombstone
    """
    result = engine.run_job(graph, attach_compute, name=f"attach_{pass_no}")
    attached = engine.convert_job(
        result, lambda v: [] if isinstance(v.value, ContigTombstone) else [Vertex(v.id, v.value)],
        name=f"drop_tombstones_{pass_no}")
    logger.info("Attached contig info: %d vertices remain", len(attached))
    return attached


@dataclass
class TipState:
    """Per-vertex state of tip removal."""

    node: Union[KmerVertex, ContigVertex]
    deleted: bool = False
    dead_end: bool = False
    initiated: bool = False
    pending: Dict[int, Link] = field(default_factory=dict)

    @property
    def is_kmer(self) -> bool:
        return isinstance(self.node, KmerVertex)

    def links(self) -> List[Link]:
        return self.node.tip_links()

    def remove_link(self, target: Link) -> None:
        node: KmerVertex = self.node
        kept = [e for e in node.entries() if node.entry_link(e, tip_view=True) != target]
        self.node = node.with_entries(kept)


@dataclass
class TipStats:
    phases: int = 0
    kmers_deleted: int = 0
    contigs_deleted: int = 0
    tips_removed: int = 0


@dataclass
class TipOutcome:
    graph: VertexSet
    stats: TipStats


def _incoming_link(links: List[Link], env: Envelope) -> Optional[Link]:
    msg: TipMessage = env.body
    for link in links:
        if (link.neighbor == env.sender and link.neighbor_end is msg.sender_end
                and link.contig == msg.contig):
            return link
    return None


def _send_along(ctx: SuperstepContext, link: Link, kind: TipKind, origin: int, length: int) -> None:
    ctx.send(link.neighbor, TipMessage(kind, origin, length, link.self_end, link.contig))
    if kind is TipKind.DELETE and link.via_contig:
        ctx.send(link.contig, DeleteContig())


class TipRemover:
    """Vertex program for one tip-removal phase."""

    def __init__(self, k: int, tip_length: int, phase: int):
        self.k = k
        self.tip_length = tip_length
        self.phase = phase

    def is_initiator(self, state: TipState, vertex_type: VertexType) -> bool:
        if self.phase == 1:
            return vertex_type is VertexType.ONE
        return state.dead_end and vertex_type is VertexType.ONE

    def __call__(self, vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> None:
        state: TipState = vertex.value
        if state.deleted:
            ctx.vote_to_halt()
            return
        if not state.is_kmer:
            if any(isinstance(env.body, DeleteContig) for env in messages):
                state.deleted = True
            ctx.vote_to_halt()
            return

        links = state.links()
        vertex_type = classify_links(vertex.id, links)
        if ctx.superstep == 0:
            initiator = self.is_initiator(state, vertex_type)
            state.dead_end = False
            if initiator:
                self._initiate(vertex, state, links, ctx)
        else:
            removed = False
            for env in messages:
                if state.deleted:
                    break
                msg = env.body
                if msg.kind is TipKind.REQUEST:
                    removed |= self._on_request(vertex, state, links, vertex_type, env, ctx)
                else:
                    self._on_delete(vertex, state, env, ctx)
            if removed and not state.deleted and len(state.links()) <= 1:
                state.dead_end = True
                ctx.aggregate(DEAD_ENDS, 1)
        ctx.vote_to_halt()

    def _initiate(self, vertex: Vertex, state: TipState, links: List[Link], ctx: SuperstepContext) -> None:
        if not links:
            if self.k <= self.tip_length:
                state.deleted = True
                ctx.aggregate(TIPS, 1)
            return
        link = links[0]
        length = self.k + link.contig_extra
        if link.neighbor == NULL_ID:
            if length <= self.tip_length:
                state.deleted = True
                _send_along(ctx, link, TipKind.DELETE, vertex.id, length)
                ctx.aggregate(TIPS, 1)
            return
        state.initiated = True
        _send_along(ctx, link, TipKind.REQUEST, vertex.id, length)

    def _on_request(self, vertex: Vertex, state: TipState, links: List[Link], vertex_type: VertexType,
                    env: Envelope, ctx: SuperstepContext) -> bool:
        msg: TipMessage = env.body
        incoming = _incoming_link(links, env)
        if incoming is None:
            logger.warning("REQUEST at %#x from %#x matches no link", vertex.id, env.sender)
            return False

        if vertex_type is VertexType.ONE_ONE:
            outgoing = links[1] if links[0] == incoming else links[0]
            length = msg.length + 1 + outgoing.contig_extra
            if outgoing.neighbor == NULL_ID:
                if length <= self.tip_length:
                    state.deleted = True
                    _send_along(ctx, outgoing, TipKind.DELETE, msg.origin, length)
                    _send_along(ctx, incoming, TipKind.DELETE, msg.origin, length)
                    ctx.aggregate(TIPS, 1)
                return False
            state.pending[msg.origin] = incoming
            _send_along(ctx, outgoing, TipKind.REQUEST, msg.origin, length)
            return False

        if vertex_type is VertexType.M_N:
            if msg.length > self.tip_length:
                return False
            _send_along(ctx, incoming, TipKind.DELETE, msg.origin, msg.length)
            state.remove_link(incoming)
            ctx.aggregate(TIPS, 1)
            return True

        if msg.origin == vertex.id or msg.length + 1 > self.tip_length:
            return False
        state.deleted = True
        _send_along(ctx, incoming, TipKind.DELETE, msg.origin, msg.length + 1)
        if not (state.initiated and vertex.id > msg.origin):
            ctx.aggregate(TIPS, 1)
        return False

    def _on_delete(self, vertex: Vertex, state: TipState, env: Envelope, ctx: SuperstepContext) -> None:
        msg: TipMessage = env.body
        if msg.origin == vertex.id:
            state.deleted = True
            return
        back = state.pending.get(msg.origin)
        if back is None:
            logger.warning("DELETE at %#x for unknown origin %#x", vertex.id, msg.origin)
            return
        state.deleted = True
        _send_along(ctx, back, TipKind.DELETE, msg.origin, msg.length)


def remove_tips(engine: BSPEngine, graph: VertexSet, k: int, tip_length: int, pass_no: int = 1) -> TipOutcome:
    """
    Delete short dangling paths until no new dead end appears.

    Args:
        engine: Engine to run the phases on
        graph: K-mers with attached contig triplets, plus contigs
        k: k-mer length
        tip_length: Paths of at most this many bases are deleted

    Returns:
        TipOutcome with the surviving vertices and removal statistics

    Raises:
        NonTerminationError: if phases exceed the vertex count
    """
    states = engine.convert_job(graph, lambda v: [Vertex(v.id, TipState(v.value))], name=f"tip_input_{pass_no}")
    stats = TipStats()
    limit = max(len(states), 1)

    while True:
        stats.phases += 1
        if stats.phases > limit:
            raise NonTerminationError(f"tip removal exceeded {limit} phases")
        for vertex in states:
            vertex.value.pending.clear()
            vertex.value.initiated = False
        seen = {}

        def remember(superstep: int, aggregated) -> bool:
            seen[DEAD_ENDS] = seen.get(DEAD_ENDS, 0) + aggregated.get(DEAD_ENDS, 0)
            seen[TIPS] = seen.get(TIPS, 0) + aggregated.get(TIPS, 0)
            return True

        engine.run_job(states, TipRemover(k, tip_length, stats.phases),
                       name=f"tips_{pass_no}_{stats.phases}",
                       aggregators={DEAD_ENDS: Aggregator.sum(), TIPS: Aggregator.sum()}, master=remember)
        stats.tips_removed += seen.get(TIPS, 0)
        if not seen.get(DEAD_ENDS, 0):
            break

    for vertex in states:
        if vertex.value.deleted:
            if vertex.value.is_kmer:
                stats.kmers_deleted += 1
            else:
                stats.contigs_deleted += 1

    survivors = engine.convert_job(
        states, lambda v: [] if v.value.deleted else [Vertex(v.id, v.value.node)], name=f"tip_output_{pass_no}")
    logger.info("Tip removal: %d phases, %d tips, %d k-mers and %d contigs deleted",
                stats.phases, stats.tips_removed, stats.kmers_deleted, stats.contigs_deleted)
    return TipOutcome(survivors, stats)
