"""
In-process bulk-synchronous vertex-centric engine.

Vertices are hash-partitioned over worker threads. Each superstep, every
worker runs the vertex program on its active or messaged vertices; messages
and aggregator contributions are applied at the barrier and become visible in
the next superstep. Jobs chain in memory through convert_job, and
mini_map_reduce loads vertices from raw records.
"""

import logging
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, is_dataclass
from typing import (
    Any,
    Callable,
    Dict,
    Hashable,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from ..config.constants import DEFAULT_MAX_SUPERSTEPS, DEFAULT_WORKERS
from ..config.settings import RoutingPolicy
from ..entities.base_vertex import Vertex
from ..errors import ConfigError, DuplicateVertexError, NonTerminationError, RoutingError
from ..utils.kmer_codec import NULL_ID
from ..utils.math_utils import hash_key

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger(__name__ + ".trace")
trace_logger.propagate = False


class Envelope(NamedTuple):
    sender: int
    body: Any


_FIELD_CACHE: Dict[type, Tuple[str, ...]] = {}


def _body_key(body: Any) -> Tuple:
    cls = type(body)
    if is_dataclass(body):
        names = _FIELD_CACHE.get(cls)
        if names is None:
            names = _FIELD_CACHE[cls] = tuple(f.name for f in fields(body))
        return (cls.__name__, tuple(int(getattr(body, name)) for name in names))
    return (cls.__name__, body)


def _envelope_key(envelope: Envelope) -> Tuple:
    return (envelope.sender, _body_key(envelope.body))


@dataclass(frozen=True)
class Aggregator:
    """An associative, commutative merge with its identity value."""

    merge: Callable[[Any, Any], Any]
    identity: Any = 0

    @classmethod
    def sum(cls) -> "Aggregator":
        return cls(operator.add, 0)

    @classmethod
    def min(cls, identity: Any) -> "Aggregator":
        return cls(min, identity)

    @classmethod
    def any(cls) -> "Aggregator":
        return cls(operator.or_, False)


class VertexSet:
    """Vertices split into hash partitions, one per worker."""

    def __init__(self, workers: int = 1, seed: int = 0):
        self.workers = workers
        self.seed = seed
        self.partitions: List[Dict[int, Vertex]] = [{} for _ in range(workers)]

    @classmethod
    def from_vertices(cls, vertices: Iterable[Vertex], workers: int = 1, seed: int = 0) -> "VertexSet":
        result = cls(workers, seed)
        for vertex in vertices:
            result.add(vertex)
        return result

    def partition_of(self, vertex_id: int) -> int:
        return hash_key(vertex_id, self.seed) % self.workers

    def add(self, vertex: Vertex) -> None:
        partition = self.partitions[self.partition_of(vertex.id)]
        if vertex.id in partition:
            raise DuplicateVertexError(vertex.id)
        partition[vertex.id] = vertex

    def get(self, vertex_id: int, default: Optional[Vertex] = None) -> Optional[Vertex]:
        return self.partitions[self.partition_of(vertex_id)].get(vertex_id, default)

    def __getitem__(self, vertex_id: int) -> Vertex:
        return self.partitions[self.partition_of(vertex_id)][vertex_id]

    def __contains__(self, vertex_id: int) -> bool:
        return vertex_id in self.partitions[self.partition_of(vertex_id)]

    def __len__(self) -> int:
        return sum(len(p) for p in self.partitions)

    def __iter__(self) -> Iterator[Vertex]:
        """Vertices in ascending ID order, independent of partitioning."""
        merged = [v for p in self.partitions for v in p.values()]
        return iter(sorted(merged, key=lambda v: v.id))

    def ids(self) -> List[int]:
        return sorted(vid for p in self.partitions for vid in p)

    def values(self) -> List[Any]:
        return [v.value for v in self]

    def repartition(self, workers: int, seed: int = 0) -> "VertexSet":
        return VertexSet.from_vertices(self, workers, seed)


@dataclass(frozen=True)
class JobStats:
    name: str
    supersteps: int
    messages: int
    dropped: int = 0


@dataclass
class JobResult:
    name: str
    vertices: VertexSet
    supersteps: int
    messages: List[int] = field(default_factory=list)
    dropped: int = 0
    halted_by_master: bool = False

    @property
    def total_messages(self) -> int:
        return sum(self.messages)

    @property
    def stats(self) -> JobStats:
        return JobStats(self.name, self.supersteps, self.total_messages, self.dropped)


class SuperstepContext:
    """Per-worker view of one superstep handed to the vertex program."""

    def __init__(self, superstep: int, aggregated: Mapping[str, Any], aggregators: Mapping[str, Aggregator]):
        self.superstep = superstep
        self.aggregated = aggregated
        self._aggregators = aggregators
        self.partials: Dict[str, Any] = {}
        self.outbox: List[Tuple[int, int, Any]] = []
        self.computed = 0
        self._vertex: Optional[Vertex] = None

    def send(self, target: int, body: Any) -> None:
        self.outbox.append((target, self._vertex.id, body))

    def vote_to_halt(self) -> None:
        self._vertex.active = False

    def aggregate(self, name: str, value: Any) -> None:
        aggregator = self._aggregators[name]
        if name in self.partials:
            self.partials[name] = aggregator.merge(self.partials[name], value)
        else:
            self.partials[name] = value


ComputeFn = Callable[[Vertex, List[Envelope], SuperstepContext], None]
MasterFn = Callable[[int, Mapping[str, Any]], bool]


class BSPEngine:
    """
    Runs vertex programs superstep by superstep over a fixed set of workers.

    Args:
        workers: Number of partitions and worker threads
        routing: Policy for messages addressed to missing vertices
        max_supersteps: Default nontermination guard per job
        seed: Salt of the partition hash; results do not depend on it
    """

    def __init__(self, workers: int = DEFAULT_WORKERS, routing: RoutingPolicy = RoutingPolicy.DROP,
                 max_supersteps: int = DEFAULT_MAX_SUPERSTEPS, seed: int = 0):
        if workers < 1:
            raise ConfigError("workers must be at least 1")
        self.workers = workers
        self.routing = RoutingPolicy(routing)
        self.max_supersteps = max_supersteps
        self.seed = seed
        self.history: List[JobStats] = []

    def partition_of(self, key: Union[int, Tuple[int, ...]]) -> int:
        return hash_key(key, self.seed) % self.workers

    def vertex_set(self, vertices: Union[VertexSet, Iterable[Vertex]]) -> VertexSet:
        if isinstance(vertices, VertexSet):
            if (vertices.workers, vertices.seed) == (self.workers, self.seed):
                return vertices
            return vertices.repartition(self.workers, self.seed)
        return VertexSet.from_vertices(vertices, self.workers, self.seed)

    def run_job(self, vertices: Union[VertexSet, Iterable[Vertex]], compute: ComputeFn, *,
                name: str = "job", aggregators: Optional[Mapping[str, Aggregator]] = None,
                master: Optional[MasterFn] = None, max_supersteps: Optional[int] = None) -> JobResult:
        """
        Execute one vertex-centric job.

        Args:
            vertices: Input vertices; all start active
            compute: compute(vertex, messages, ctx), messages sorted by (sender, body)
            name: Job name used in traces and stats
            aggregators: Named merges; a value provided in superstep t is read in t+1
            master: Called after each barrier with (superstep, aggregated); returning False stops the job
            max_supersteps: Overrides the engine default guard

        Returns:
            JobResult with the final vertex states and exact per-superstep message counts
        """
        vset = self.vertex_set(vertices)
        for partition in vset.partitions:
            for vertex in partition.values():
                vertex.active = True
        limit = max_supersteps if max_supersteps is not None else self.max_supersteps
        aggregators = dict(aggregators or {})
        aggregated: Dict[str, Any] = {key: agg.identity for key, agg in aggregators.items()}
        inboxes: List[Dict[int, List[Envelope]]] = [{} for _ in range(self.workers)]
        counts: List[int] = []
        dropped = 0
        halted_by_master = False
        superstep = 0

        logger.debug("Job %s starting on %d vertices", name, len(vset))
        with ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix=f"bsp-{name}") as pool:
            while True:
                pending = any(inboxes)
                if not pending and not any(v.active for p in vset.partitions for v in p.values()):
                    break
                if superstep >= limit:
                    partial = JobResult(name, vset, superstep, counts, dropped)
                    raise NonTerminationError(
                        f"job '{name}' did not terminate within {limit} supersteps", partial)

                snapshot = dict(aggregated)
                contexts = list(pool.map(
                    lambda w: self._compute_partition(vset.partitions[w], inboxes[w], compute,
                                                      SuperstepContext(superstep, snapshot, aggregators)),
                    range(self.workers)))

                aggregated = {key: agg.identity for key, agg in aggregators.items()}
                for ctx in contexts:
                    for key, value in ctx.partials.items():
                        aggregated[key] = aggregators[key].merge(aggregated[key], value)

                inboxes, sent, lost = self._deliver(vset, contexts, superstep)
                dropped += lost
                counts.append(sent)
                trace_logger.info("%s %d %d %d", name, superstep, sum(c.computed for c in contexts), sent)
                superstep += 1

                if master is not None and not master(superstep - 1, aggregated):
                    halted_by_master = True
                    break

        result = JobResult(name, vset, superstep, counts, dropped, halted_by_master)
        self.history.append(result.stats)
        logger.debug("Job %s finished after %d supersteps, %d messages", name, superstep, result.total_messages)
        return result

    @staticmethod
    def _compute_partition(partition: Dict[int, Vertex], inbox: Dict[int, List[Envelope]],
                           compute: ComputeFn, ctx: SuperstepContext) -> SuperstepContext:
        scheduled = sorted(vid for vid, v in partition.items() if v.active or vid in inbox)
        for vid in scheduled:
            vertex = partition[vid]
            vertex.active = True
            ctx._vertex = vertex
            compute(vertex, inbox.get(vid, []), ctx)
        ctx.computed = len(scheduled)
        ctx._vertex = None
        return ctx

    def _deliver(self, vset: VertexSet, contexts: Sequence[SuperstepContext],
                 superstep: int) -> Tuple[List[Dict[int, List[Envelope]]], int, int]:
        inboxes: List[Dict[int, List[Envelope]]] = [{} for _ in range(self.workers)]
        sent = 0
        missing: List[int] = []
        for ctx in contexts:
            for target, sender, body in ctx.outbox:
                sent += 1
                if target == NULL_ID:
                    continue
                worker = self.partition_of(target)
                if target not in vset.partitions[worker]:
                    if self.routing is RoutingPolicy.ABORT:
                        raise RoutingError(target, superstep)
                    missing.append(target)
                    continue
                inboxes[worker].setdefault(target, []).append(Envelope(sender, body))
        if missing:
            logger.warning("Superstep %d dropped %d message(s) to missing vertices, first %#x",
                           superstep, len(missing), missing[0])
        for inbox in inboxes:
            for messages in inbox.values():
                if len(messages) > 1:
                    messages.sort(key=_envelope_key)
        return inboxes, sent, len(missing)

    def convert_job(self, source: Union[JobResult, VertexSet],
                    convert: Callable[[Vertex], Iterable[Vertex]], name: str = "convert") -> VertexSet:
        """
        Turn the final vertices of one job into the input of the next.

        Raises:
            DuplicateVertexError: if two produced vertices share an ID
        """
        vset = source.vertices if isinstance(source, JobResult) else source

        def work(worker: int) -> List[Vertex]:
            produced: List[Vertex] = []
            if worker < vset.workers:
                partition = vset.partitions[worker]
                for vid in sorted(partition):
                    produced.extend(convert(partition[vid]))
            return produced

        with ThreadPoolExecutor(max_workers=max(self.workers, vset.workers)) as pool:
            outputs = list(pool.map(work, range(max(self.workers, vset.workers))))

        result = VertexSet(self.workers, self.seed)
        for produced in outputs:
            for vertex in produced:
                result.add(vertex)
        self.history.append(JobStats(name, 0, 0))
        return result

    def mini_map_reduce(self, records: Iterable[Any],
                        map_fn: Callable[[Any], Iterable[Tuple[Hashable, Any]]],
                        reduce_fn: Callable[[Hashable, List[Any]], Iterable[Vertex]], *,
                        combiner: Optional[Callable[[Hashable, List[Any]], Iterable[Any]]] = None,
                        value_key: Optional[Callable[[Any], Any]] = None,
                        name: str = "mapreduce") -> VertexSet:
        """
        Map records to keyed values, shuffle by key hash, and reduce each group.

        Args:
            records: Input records, split round-robin over workers
            map_fn: record -> (key, value) pairs
            reduce_fn: (key, values sorted by value_key) -> vertices
            combiner: Optional per-worker pre-reduction of a key's values
            value_key: Sort key for values that are not naturally ordered

        Returns:
            VertexSet of all reduced vertices
        """
        records = list(records)
        workers = self.workers

        def map_phase(worker: int) -> Tuple[int, List[Dict[Hashable, List[Any]]]]:
            buckets: List[Dict[Hashable, List[Any]]] = [{} for _ in range(workers)]
            emitted = 0
            for record in records[worker::workers]:
                for key, value in map_fn(record):
                    buckets[self.partition_of(key)].setdefault(key, []).append(value)
                    emitted += 1
            if combiner is not None:
                for bucket in buckets:
                    for key in bucket:
                        bucket[key] = list(combiner(key, bucket[key]))
            return emitted, buckets

        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=f"mr-{name}") as pool:
            phases = list(pool.map(map_phase, range(workers)))
            emitted = sum(count for count, _ in phases)
            mapped = [buckets for _, buckets in phases]

            def reduce_phase(worker: int) -> List[Vertex]:
                groups: Dict[Hashable, List[Any]] = {}
                for buckets in mapped:
                    for key, values in buckets[worker].items():
                        groups.setdefault(key, []).extend(values)
                produced: List[Vertex] = []
                for key in sorted(groups):
                    produced.extend(reduce_fn(key, sorted(groups[key], key=value_key)))
                return produced

            outputs = list(pool.map(reduce_phase, range(workers)))

        result = VertexSet(workers, self.seed)
        for produced in outputs:
            for vertex in produced:
                result.add(vertex)
        self.history.append(JobStats(name, 0, emitted))
        logger.debug("Map-reduce %s: %d records, %d emitted pairs, %d vertices",
                     name, len(records), emitted, len(result))
        return result
