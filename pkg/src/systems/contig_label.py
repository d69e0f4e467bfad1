"""
Contig labeling.

Every unambiguous vertex receives the label of the maximal unambiguous path
it lies on. The default strategy ranks both directions of each path by
pointer doubling toward the two path ends; vertices on pure cycles never
reach an end and fall back to connected-component labeling by tree hooking
and shortcutting. The component labeler can also run alone.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, NamedTuple, Optional

from .bsp_engine import Aggregator, BSPEngine, Envelope, JobStats, SuperstepContext, VertexSet
from ..config.settings import Labeler
from ..entities.base_vertex import Vertex
from ..entities.kmer_vertex import Link, VertexType, classify_links
from ..entities.messages import (
    HookProposal,
    IdBroadcast,
    NeighborParent,
    ParentQuery,
    ParentReply,
    RankRequest,
    RankResponse,
)
from ..errors import CorruptLabelError
from ..utils.kmer_codec import NULL_ID, End, flip_end_marker, is_kmer_id

logger = logging.getLogger(__name__)

OPEN = "open"
CHANGED = "changed"


class PairEntry(NamedTuple):
    """
    One side of a vertex's rank pair: a vertex further along the path, or a path end.

    Path ends are the vertex's own ID with the end flag set. K-mer ends print in
    their end-flipped form; contig IDs never carry the marker.
    """

    id: int
    end: bool

    def __str__(self) -> str:
        if not self.end:
            return f"{self.id:#x}"
        if is_kmer_id(self.id):
            return f"{flip_end_marker(self.id):#x}"
        return f"~{self.id:#x}"


@dataclass
class LabelState:
    """Per-vertex state of the labeling jobs, wrapping the graph node."""

    id: int
    node: Any
    links: List[Link]
    vertex_type: VertexType
    pair: List[PairEntry] = field(default_factory=list)
    initial: List[PairEntry] = field(default_factory=list)
    label: int = NULL_ID
    parent: int = NULL_ID
    sv_neighbors: List[int] = field(default_factory=list)
    min_neighbor: int = NULL_ID

    @classmethod
    def wrap(cls, vertex: Vertex) -> "LabelState":
        links = vertex.value.links()
        return cls(vertex.id, vertex.value, links, classify_links(vertex.id, links))

    @property
    def ambiguous(self) -> bool:
        return self.vertex_type.ambiguous

    @property
    def labeled(self) -> bool:
        return self.label != NULL_ID

    def link_at(self, side: End) -> Optional[Link]:
        for link in self.links:
            if link.self_end is side:
                return link
        return None


@dataclass
class LabelOutcome:
    """Labeled vertices plus how the labeling went."""

    vertices: VertexSet
    labeler: Labeler
    supersteps: int
    messages: int
    fallback_vertices: int = 0
    stats: List[JobStats] = field(default_factory=list)

    @property
    def used_fallback(self) -> bool:
        return self.fallback_vertices > 0

    def labels(self) -> Dict[int, int]:
        return {v.id: v.value.label for v in self.vertices if v.value.labeled}


def _ceil_log2(n: int) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0


def _initial_pair(state: LabelState, messages: List[Envelope]) -> List[PairEntry]:
    """Neighbors on each side, with NULL and ambiguous sides cut to the vertex's own end."""
    ambiguous = {env.sender for env in messages if isinstance(env.body, IdBroadcast)}
    pair = []
    for side in (End.FIVE_PRIME, End.THREE_PRIME):
        link = state.link_at(side)
        if link is None or link.neighbor in ambiguous:
            pair.append(PairEntry(state.id, True))
        else:
            pair.append(PairEntry(link.neighbor, False))
    return pair


def mark_contig_ends(vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> bool:
    """
    Shared first two supersteps of both labelers.

    Superstep 0: ambiguous vertices broadcast their ID and halt for good.
    Superstep 1: unambiguous vertices build their initial pair.

    An ambiguous vertex woken later (a self-loop, or an ambiguous neighbor's
    broadcast) halts again without joining.

    Returns:
        True once the vertex has its initial pair
    """
    state: LabelState = vertex.value
    if state.ambiguous:
        if ctx.superstep == 0:
            for link in state.links:
                ctx.send(link.neighbor, IdBroadcast())
        ctx.vote_to_halt()
        return False
    if ctx.superstep == 1:
        state.pair = _initial_pair(state, messages)
        state.initial = list(state.pair)
        return True
    return False


def _request_or_finish(state: LabelState, ctx: SuperstepContext) -> None:
    if state.pair[0].end and state.pair[1].end:
        state.label = min(state.pair[0].id, state.pair[1].id)
        ctx.vote_to_halt()
        return
    pending = 0
    for entry in state.pair:
        if not entry.end:
            ctx.send(entry.id, RankRequest())
            pending += 1
    ctx.aggregate(OPEN, pending)


def list_ranking_compute(vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> None:
    state: LabelState = vertex.value
    if ctx.superstep < 2:
        if mark_contig_ends(vertex, messages, ctx):
            _request_or_finish(state, ctx)
        return

    if ctx.superstep % 2 == 0:
        for env in messages:
            if not isinstance(env.body, RankRequest):
                continue
            asked = PairEntry(env.sender, False)
            if state.pair[0] == asked:
                reply = state.pair[1]
            elif state.pair[1] == asked:
                reply = state.pair[0]
            else:
                raise CorruptLabelError(
                    f"vertex {state.id:#x} asked by {env.sender:#x} which is not in its pair "
                    f"({state.pair[0]}, {state.pair[1]})")
            ctx.send(env.sender, RankResponse(reply.id, reply.end))
        if state.labeled:
            ctx.vote_to_halt()
        return

    # two responses from one responder fill index 0 then index 1
    for env in messages:
        if not isinstance(env.body, RankResponse):
            continue
        responder = PairEntry(env.sender, False)
        index = 0 if state.pair[0] == responder else 1
        if state.pair[index] != responder:
            raise CorruptLabelError(f"vertex {state.id:#x} got an unsolicited response from {env.sender:#x}")
        state.pair[index] = PairEntry(env.body.entry_id, env.body.entry_end)
    _request_or_finish(state, ctx)


class _StallMonitor:
    """Stops ranking once a round resolves no pair entry, or after the safety round."""

    def __init__(self, vertex_count: int):
        self.safety_round = _ceil_log2(max(vertex_count, 1)) + 2
        self.previous: Optional[int] = None
        self.stalled = False

    def __call__(self, superstep: int, aggregated: Mapping[str, Any]) -> bool:
        if superstep % 2 == 0:
            return True
        current = aggregated.get(OPEN, 0)
        round_no = (superstep - 1) // 2
        if current > 0 and (current == self.previous or round_no > self.safety_round):
            self.stalled = True
            return False
        self.previous = current
        return True


def _sv_phase(superstep: int) -> int:
    return superstep % 5


def shortcut_hooking_compute(vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> None:
    """
    Minimum-ID component labeling. Five supersteps per round:
    broadcast parent, answer parent queries, propose hooks, apply hooks and
    query for shortcutting, answer shortcut queries.
    """
    state: LabelState = vertex.value
    phase = _sv_phase(ctx.superstep)

    if phase == 0:
        if ctx.superstep > 0:
            for env in messages:
                if isinstance(env.body, ParentReply) and env.body.parent != state.parent:
                    state.parent = env.body.parent
                    ctx.aggregate(CHANGED, 1)
        for neighbor in state.sv_neighbors:
            ctx.send(neighbor, NeighborParent(state.parent))
        ctx.send(state.parent, ParentQuery())
    elif phase == 1:
        parents = [env.body.parent for env in messages if isinstance(env.body, NeighborParent)]
        state.min_neighbor = min(parents) if parents else NULL_ID
        for env in messages:
            if isinstance(env.body, ParentQuery):
                ctx.send(env.sender, ParentReply(state.parent))
    elif phase == 2:
        grandparent = next((env.body.parent for env in messages if isinstance(env.body, ParentReply)),
                           state.parent)
        if grandparent == state.parent and state.min_neighbor < state.parent:
            ctx.send(state.parent, HookProposal(state.min_neighbor))
    elif phase == 3:
        proposals = [env.body.parent for env in messages if isinstance(env.body, HookProposal)]
        if proposals and min(proposals) < state.parent:
            state.parent = min(proposals)
            ctx.aggregate(CHANGED, 1)
        ctx.send(state.parent, ParentQuery())
    else:
        for env in messages:
            if isinstance(env.body, ParentQuery):
                ctx.send(env.sender, ParentReply(state.parent))


class _ConvergenceMonitor:
    """Stops hooking after a full round without any parent change."""

    def __init__(self):
        self.changes = 0
        self.rounds = 0

    def __call__(self, superstep: int, aggregated: Mapping[str, Any]) -> bool:
        self.changes += aggregated.get(CHANGED, 0)
        if superstep == 0 or _sv_phase(superstep) != 0:
            return True
        self.rounds += 1
        if self.changes == 0:
            return False
        self.changes = 0
        return True


def _run_component_labeling(engine: BSPEngine, states: List[LabelState], name: str) -> Any:
    members = {s.id for s in states}
    for state in states:
        state.parent = state.id
        state.sv_neighbors = sorted({e.id for e in state.initial if not e.end and e.id in members})
    job_input = [Vertex(s.id, s) for s in states]
    result = engine.run_job(job_input, shortcut_hooking_compute, name=name,
                            aggregators={CHANGED: Aggregator.sum()}, master=_ConvergenceMonitor())
    for state in states:
        state.label = state.parent
    return result


def _mark_compute(vertex: Vertex, messages: List[Envelope], ctx: SuperstepContext) -> None:
    if mark_contig_ends(vertex, messages, ctx):
        ctx.vote_to_halt()


def label_contigs(engine: BSPEngine, graph: VertexSet, labeler: Labeler = Labeler.LR) -> LabelOutcome:
    """
    Label every unambiguous vertex with the ID that identifies its contig.

    Args:
        engine: Engine to run the jobs on
        graph: Vertices whose values expose links()
        labeler: LR (list ranking with component fallback) or SV (component labeling only)

    Returns:
        LabelOutcome whose vertices hold LabelState values; ambiguous vertices stay unlabeled
    """
    labeler = Labeler(labeler)
    states = engine.convert_job(graph, lambda v: [Vertex(v.id, LabelState.wrap(v))],
                                name=f"label_input_{labeler.value}")
    stats: List[JobStats] = []

    if labeler is Labeler.LR:
        monitor = _StallMonitor(len(states))
        result = engine.run_job(states, list_ranking_compute, name="list_ranking",
                                aggregators={OPEN: Aggregator.sum()}, master=monitor)
    else:
        result = engine.run_job(states, _mark_compute, name="mark_ends")
    stats.append(result.stats)
    supersteps = result.supersteps
    messages = result.total_messages

    leftover = [v.value for v in states if not v.value.ambiguous and not v.value.labeled]
    if leftover:
        if labeler is Labeler.LR:
            logger.info("List ranking stalled with %d unlabeled vertices; labeling cycles by components",
                        len(leftover))
        sv_result = _run_component_labeling(engine, leftover, "component_labeling")
        stats.append(sv_result.stats)
        supersteps += sv_result.supersteps
        messages += sv_result.total_messages

    outcome = LabelOutcome(states, labeler, supersteps, messages,
                           len(leftover) if labeler is Labeler.LR else 0, stats)
    logger.info("Labeled %d vertices with %s in %d supersteps", len(outcome.labels()), labeler.value, supersteps)
    return outcome
