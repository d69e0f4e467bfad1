"""
Tests for the vertex-centric engine.
"""

import unittest
import sys
import os
from dataclasses import dataclass

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config.settings import RoutingPolicy
from src.entities.base_vertex import Vertex
from src.errors import DuplicateVertexError, NonTerminationError, RoutingError
from src.systems.bsp_engine import Aggregator, BSPEngine, VertexSet
from src.utils.kmer_codec import NULL_ID


@dataclass
class RankNode:
    value: int
    pred: int
    total: int = 0


def list_ranking(vertex, messages, ctx):
    """Prefix sums over a linked list by pointer jumping, two supersteps per round."""
    node = vertex.value
    if ctx.superstep == 0:
        node.total = node.value
    if ctx.superstep % 2 == 0:
        for env in messages:
            total, pred = env.body
            node.total += total
            node.pred = pred
        if node.pred != NULL_ID:
            ctx.send(node.pred, ())
        else:
            ctx.vote_to_halt()
    else:
        for env in messages:
            ctx.send(env.sender, (node.total, node.pred))
        ctx.vote_to_halt()


def five_vertex_list():
    # v1 <- v2 <- v3 <- v4 <- v5, IDs deliberately not in list order
    ids = [40, 10, 30, 50, 20]
    vertices = []
    for position, vid in enumerate(ids):
        pred = ids[position - 1] if position > 0 else NULL_ID
        vertices.append(Vertex(vid, RankNode(1, pred)))
    return ids, vertices


class TestBSPEngine(unittest.TestCase):
    """Test cases for supersteps, messaging and termination."""

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=3)

    def test_list_ranking_program(self):
        """Test prefix sums on a 5-vertex list."""
        ids, vertices = five_vertex_list()
        result = self.engine.run_job(vertices, list_ranking, name="rank")
        totals = [result.vertices[vid].value.total for vid in ids]
        self.assertEqual(totals, [1, 2, 3, 4, 5])

    def test_list_ranking_independent_of_workers(self):
        """Test that supersteps and message counts do not depend on the worker count."""
        runs = []
        for workers in (1, 2, 4, 8):
            _, vertices = five_vertex_list()
            result = BSPEngine(workers).run_job(vertices, list_ranking, name="rank")
            runs.append((result.supersteps, result.messages,
                         [(v.id, v.value.total) for v in result.vertices]))
        self.assertTrue(all(run == runs[0] for run in runs))

    def test_partition_seed(self):
        """Test that a salted partition hash places vertices differently with the same result."""
        placements, runs = [], []
        for seed in (0, 99):
            _, vertices = five_vertex_list()
            result = BSPEngine(4, seed=seed).run_job(vertices, list_ranking, name="rank")
            self.assertEqual(result.vertices.seed, seed)
            placements.append([result.vertices.partition_of(vid) for vid in range(64)])
            runs.append((result.supersteps, result.messages,
                         [(v.id, v.value.total) for v in result.vertices]))
        self.assertNotEqual(placements[0], placements[1])
        self.assertEqual(runs[0], runs[1])

    def test_empty_job(self):
        """Test that an empty vertex set runs zero supersteps."""
        result = self.engine.run_job([], list_ranking)
        self.assertEqual(result.supersteps, 0)
        self.assertEqual(len(result.vertices), 0)

    def test_immediate_halt(self):
        """Test that halting in superstep 0 without messages ends after one superstep."""
        result = self.engine.run_job([Vertex(i, None) for i in range(10)],
                                     lambda v, msgs, ctx: ctx.vote_to_halt())
        self.assertEqual(result.supersteps, 1)
        self.assertEqual(result.total_messages, 0)

    def test_messages_are_sorted(self):
        """Test that inboxes arrive ordered by sender."""
        received = {}

        def compute(vertex, messages, ctx):
            if ctx.superstep == 0 and vertex.id != 0:
                ctx.send(0, vertex.id * 10)
            elif ctx.superstep == 1 and vertex.id == 0:
                received["senders"] = [env.sender for env in messages]
            ctx.vote_to_halt()

        self.engine.run_job([Vertex(i, None) for i in (5, 0, 3, 9, 1)], compute)
        self.assertEqual(received["senders"], [1, 3, 5, 9])

    def test_aggregator_visible_next_superstep(self):
        """Test that aggregated values appear one superstep later."""
        seen = []

        def compute(vertex, messages, ctx):
            if vertex.id == 0:
                seen.append(ctx.aggregated["total"])
            if ctx.superstep < 2:
                ctx.aggregate("total", vertex.id)
            else:
                ctx.vote_to_halt()

        self.engine.run_job([Vertex(i, None) for i in range(5)], compute,
                            aggregators={"total": Aggregator.sum()})
        self.assertEqual(seen, [0, 10, 10])

    def test_master_stops_job(self):
        """Test that a master returning False ends the job."""
        result = self.engine.run_job([Vertex(1, None)], lambda v, msgs, ctx: None,
                                     master=lambda superstep, aggregated: superstep < 3)
        self.assertEqual(result.supersteps, 4)
        self.assertTrue(result.halted_by_master)

    def test_nontermination_guard(self):
        """Test that exceeding the superstep budget raises with the partial result."""
        with self.assertRaises(NonTerminationError) as caught:
            self.engine.run_job([Vertex(1, None)], lambda v, msgs, ctx: None, max_supersteps=7)
        self.assertEqual(caught.exception.partial.supersteps, 7)

    def test_routing_drop(self):
        """Test that messages to missing vertices are dropped and counted."""
        def compute(vertex, messages, ctx):
            if ctx.superstep == 0:
                ctx.send(999, "lost")
                ctx.send(NULL_ID, "discarded")
            ctx.vote_to_halt()

        with self.assertLogs("src.systems.bsp_engine", level="WARNING"):
            result = self.engine.run_job([Vertex(1, None), Vertex(2, None)], compute)
        self.assertEqual(result.dropped, 2)

    def test_routing_abort(self):
        """Test that the abort policy raises on a missing target."""
        engine = BSPEngine(workers=2, routing=RoutingPolicy.ABORT)

        def compute(vertex, messages, ctx):
            ctx.send(999, "lost")
            ctx.vote_to_halt()

        with self.assertRaises(RoutingError) as caught:
            engine.run_job([Vertex(1, None)], compute)
        self.assertEqual(caught.exception.target, 999)

    def test_trace_lines(self):
        """Test the per-superstep trace."""
        with self.assertLogs("src.systems.bsp_engine.trace", level="INFO") as logs:
            self.engine.run_job([Vertex(i, None) for i in range(4)],
                                lambda v, msgs, ctx: ctx.vote_to_halt(), name="halt")
        self.assertEqual([r.getMessage() for r in logs.records], ["halt 0 4 0"])

    def test_history(self):
        """Test that every job leaves its stats in the history."""
        self.engine.run_job([Vertex(1, None)], lambda v, msgs, ctx: ctx.vote_to_halt(), name="first")
        self.engine.convert_job(VertexSet.from_vertices([Vertex(1, None)]), lambda v: [v], name="second")
        self.assertEqual([s.name for s in self.engine.history], ["first", "second"])


class TestJobChaining(unittest.TestCase):
    """Test cases for vertex sets, convert jobs and the mini map-reduce."""

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=4)

    def test_duplicate_vertex(self):
        """Test that duplicate IDs are rejected."""
        with self.assertRaises(DuplicateVertexError):
            VertexSet.from_vertices([Vertex(1, "a"), Vertex(1, "b")], workers=2)

    def test_vertex_set_iteration_order(self):
        """Test that iteration is by ascending ID for any partitioning."""
        vertices = [Vertex(i, None) for i in (17, 3, 99, 42, 8)]
        for workers in (1, 3, 8):
            self.assertEqual(VertexSet.from_vertices(vertices, workers).ids(), [3, 8, 17, 42, 99])

    def test_identity_convert(self):
        """Test that an identity convert keeps every vertex."""
        source = VertexSet.from_vertices([Vertex(i, i * i) for i in range(20)], workers=2)
        converted = self.engine.convert_job(source, lambda v: [Vertex(v.id, v.value)])
        self.assertEqual(converted.workers, 4)
        self.assertEqual([(v.id, v.value) for v in converted], [(i, i * i) for i in range(20)])

    def test_empty_convert(self):
        """Test that a convert producing nothing yields an empty set."""
        source = VertexSet.from_vertices([Vertex(i, None) for i in range(5)])
        self.assertEqual(len(self.engine.convert_job(source, lambda v: [])), 0)

    def test_duplicate_from_convert(self):
        """Test that a convert producing clashing IDs fails."""
        source = VertexSet.from_vertices([Vertex(i, None) for i in range(5)])
        with self.assertRaises(DuplicateVertexError):
            self.engine.convert_job(source, lambda v: [Vertex(0, None)])

    def test_histogram(self):
        """Test a counting map-reduce."""
        records = [3, 1, 3, 2, 3, 1]
        result = self.engine.mini_map_reduce(
            records, lambda r: [(r, 1)], lambda key, values: [Vertex(key, sum(values))],
            combiner=lambda key, values: [sum(values)])
        self.assertEqual([(v.id, v.value) for v in result], [(1, 2), (2, 1), (3, 3)])
        self.assertEqual(self.engine.history[-1].messages, 6)

    def test_adjacency_lists(self):
        """Test building adjacency lists from edge records."""
        edges = [(1, 2), (2, 3), (1, 3), (4, 1)]

        def map_edge(edge):
            a, b = edge
            yield a, b
            yield b, a

        result = self.engine.mini_map_reduce(edges, map_edge, lambda key, values: [Vertex(key, values)])
        expected = {}
        for a, b in edges:
            expected.setdefault(a, []).append(b)
            expected.setdefault(b, []).append(a)
        self.assertEqual({v.id: v.value for v in result}, {k: sorted(v) for k, v in expected.items()})

    def test_empty_map_reduce(self):
        """Test that empty input gives empty output."""
        result = self.engine.mini_map_reduce([], lambda r: [(r, 1)], lambda key, values: [Vertex(key, 1)])
        self.assertEqual(len(result), 0)


if __name__ == "__main__":
    unittest.main()
