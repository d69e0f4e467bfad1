"""
Tests for bubble filtering, contig attachment and tip removal.
"""

import random
import unittest
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config.settings import PipelineConfig
from src.entities.base_vertex import Vertex
from src.entities.contig_vertex import ContigNeighbor, ContigTombstone, ContigVertex
from src.entities.kmer_vertex import ContigTriplet, KmerVertex, NeighborBitmap, VertexType
from src.systems.bsp_engine import BSPEngine, VertexSet
from src.systems.bubble_filter import bubble_key, filter_bubbles, filter_group
from src.systems.contig_label import label_contigs
from src.systems.contig_merge import merge_contigs
from src.systems.dbg_build import build_graph
from src.systems.pipeline import AssemblyPipeline
from src.systems.tip_remove import attach_contig_info, remove_tips
from src.utils.kmer_codec import End, NULL_ID, PackedSequence, canonical_id, encode_kmer, make_contig_id, reverse_complement
from tests.oracles import canonical, random_sequence, unique_kmers
from tests.test_contig_label import BRANCHED_PATH_READS


def substitute(seq: str, index: int) -> str:
    replacement = "ACGT"[("ACGT".index(seq[index]) + 1) % 4]
    return seq[:index] + replacement + seq[index + 1:]


def arm(rank: int, seq: str, coverage: int, start: int = 100, end: int = 200) -> ContigVertex:
    return ContigVertex(make_contig_id(1, rank), PackedSequence.from_string(seq), coverage,
                        ContigNeighbor(start, End.THREE_PRIME, coverage),
                        ContigNeighbor(end, End.FIVE_PRIME, coverage))


def kmer_id(seq: str, k: int) -> int:
    return canonical_id(encode_kmer(seq, k), k)[0]


class TestBubbleFilter(unittest.TestCase):
    """Test cases for pruning near-duplicate contigs."""

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=2)

    def test_bubble_key(self):
        """Test that the key orders the two end vertices."""
        self.assertEqual(bubble_key(arm(1, "GCAAG", 3, start=200, end=100)), (100, 200))
        dangling = ContigVertex(make_contig_id(1, 2), PackedSequence.from_string("GCAAG"), 3,
                                ContigNeighbor(100, End.THREE_PRIME))
        self.assertIsNone(bubble_key(dangling))
        self.assertIsNone(bubble_key(arm(3, "GCAAG", 3, start=100, end=100)))

    def test_lower_coverage_arm_pruned(self):
        """Test that the weaker of two close arms is removed."""
        strong, weak = arm(1, "GCAAG", 3), arm(2, "GCTAG", 1)
        survivors, pruned = filter_group([weak, strong], 100, 5)
        self.assertEqual(survivors, [strong])
        self.assertEqual(pruned, [weak])

    def test_reversed_arm_compared_in_same_orientation(self):
        """Test that an arm stored on the other strand is reverse-complemented first."""
        strong = arm(1, "GCAAG", 3)
        weak = arm(2, reverse_complement("GCTAG"), 1, start=200, end=100)
        survivors, pruned = filter_group([strong, weak], 100, 2)
        self.assertEqual(pruned, [weak])

    def test_equal_coverage_kept(self):
        """Test that ties keep both arms."""
        survivors, pruned = filter_group([arm(1, "GCAAG", 2), arm(2, "GCTAG", 2)], 100, 5)
        self.assertEqual(len(survivors), 2)
        self.assertEqual(pruned, [])

    def test_distant_arms_kept(self):
        """Test that arms at or above the threshold are not compared away."""
        survivors, pruned = filter_group([arm(1, "GCAAG", 5), arm(2, "TTTTT", 1)], 100, 5)
        self.assertEqual(pruned, [])
        survivors, pruned = filter_group([arm(1, "GCAAG", 5), arm(2, "GCTAG", 1)], 100, 1)
        self.assertEqual(pruned, [])

    def test_single_contig_unchanged(self):
        """Test that a lone arm survives."""
        only = arm(1, "GCAAG", 1)
        self.assertEqual(filter_group([only], 100, 5), ([only], []))

    def test_filter_bubbles_leaves_tombstone(self):
        """Test the vertex job: pruned arms become tombstones, other vertices pass through."""
        strong, weak = arm(1, "GCAAG", 3), arm(2, "GCTAG", 1)
        other = arm(3, "AAAAAAA", 1, start=300, end=400)
        graph = VertexSet.from_vertices([Vertex(c.id, c) for c in (strong, weak, other)])
        outcome = filter_bubbles(self.engine, graph, 5)
        self.assertEqual((outcome.groups, outcome.pruned), (1, 1))
        tombstone = outcome.graph[weak.id].value
        self.assertIsInstance(tombstone, ContigTombstone)
        self.assertEqual((tombstone.reason, tombstone.length), ("bubble", 5))
        self.assertIs(outcome.graph[strong.id].value, strong)
        self.assertIs(outcome.graph[other.id].value, other)


class TestAttachContigInfo(unittest.TestCase):
    """Test cases for installing contig triplets at ambiguous k-mers."""

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=2)
        self.graph = build_graph(self.engine, BRANCHED_PATH_READS, 4, 0)
        self.ctgc = encode_kmer("CTGC", 4)
        self.taca = encode_kmer("TACA", 4)

    def merged(self, tip_length):
        labeled = label_contigs(self.engine, self.graph)
        return merge_contigs(self.engine, labeled, 4, tip_length)

    def test_triplets_installed(self):
        """Test that both contigs next to CTGC appear in its adjacency."""
        outcome = self.merged(0)
        attached = attach_contig_info(self.engine, outcome.graph)
        path = next(c for c in outcome.contigs if c.length == 8)
        triplets = [e for e in attached[self.ctgc].value.entries() if isinstance(e, ContigTriplet)]
        self.assertEqual(len(triplets), 2)
        main = next(t for t in triplets if t.contig_id == path.id)
        self.assertIs(main.contig_end, End.FIVE_PRIME)
        self.assertEqual((main.other_end, main.length, main.coverage), (self.taca, 8, 98))

    def test_contig_anchors_updated(self):
        """Test that a contig's neighbors now refer to the contig itself."""
        outcome = self.merged(0)
        attached = attach_contig_info(self.engine, outcome.graph)
        path = next(c for c in outcome.contigs if c.length == 8)
        contig = attached[path.id].value
        self.assertEqual(contig.in_neighbor.anchor, path.id)
        self.assertIs(contig.out_neighbor.anchor_end, End.THREE_PRIME)

    def test_tombstones_unlink(self):
        """Test that dropped tips are removed from their neighbors and from the graph."""
        outcome = self.merged(4)
        attached = attach_contig_info(self.engine, outcome.graph)
        self.assertFalse(any(isinstance(v.value, ContigTombstone) for v in attached))
        entries = attached[self.ctgc].value.entries()
        self.assertEqual(len(entries), 1)
        self.assertIsInstance(entries[0], ContigTriplet)


class TestTipRemoval(unittest.TestCase):
    """Test cases for REQUEST/DELETE tip removal."""

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=3)

    def test_isolated_path_deleted_when_short(self):
        """Test that an isolated path is deleted only when it fits the tip length."""
        graph = build_graph(self.engine, ["ATGCAGGC"], 5, 0)
        outcome = remove_tips(self.engine, graph, 5, 8)
        self.assertEqual(len(outcome.graph), 0)
        self.assertEqual(outcome.stats.kmers_deleted, 4)
        self.assertEqual(outcome.stats.tips_removed, 1)

        outcome = remove_tips(self.engine, graph, 5, 7)
        self.assertEqual(len(outcome.graph), 4)
        self.assertEqual(outcome.stats.tips_removed, 0)

    def test_lone_kmer(self):
        """Test a k-mer with no links."""
        lone = encode_kmer("ACGTA", 5)
        graph = VertexSet.from_vertices([Vertex(lone, KmerVertex(lone, 5, NeighborBitmap()))])
        outcome = remove_tips(self.engine, graph, 5, 5)
        self.assertEqual(len(outcome.graph), 0)
        self.assertEqual(outcome.stats.tips_removed, 1)
        self.assertEqual(len(remove_tips(self.engine, graph, 5, 4).graph), 1)

    def test_single_kmer_tip(self):
        """Test that a one-k-mer branch off a long path is cut at the branch vertex."""
        rng = random.Random(6)
        k = 11
        while True:
            reference = random_sequence(100, rng)
            tip_read = substitute(reference[:30], 29)
            if unique_kmers(reference, k) and canonical(tip_read[19:30]) not in \
                    {canonical(reference[i:i + k]) for i in range(90)}:
                break
        graph = build_graph(self.engine, [reference, tip_read], k, 0)
        branch = kmer_id(reference[18:29], k)
        self.assertIs(graph[branch].value.vertex_type(), VertexType.M_N)

        outcome = remove_tips(self.engine, graph, k, 15)
        self.assertEqual(outcome.stats.kmers_deleted, 1)
        self.assertEqual(outcome.stats.tips_removed, 1)
        self.assertEqual(outcome.stats.phases, 1)
        self.assertNotIn(kmer_id(tip_read[19:30], k), outcome.graph.ids())
        self.assertIs(outcome.graph[branch].value.vertex_type(), VertexType.ONE_ONE)

    def test_tip_through_contig(self):
        """Test that a dead-end k-mer behind a 20 bp contig is a 21 bp tip."""
        rng = random.Random(12)
        k = 5
        while True:
            backbone = random_sequence(40, rng)
            branch = backbone[15:20] + random_sequence(17, rng)
            reads = [backbone, branch + "A", branch[-4:] + "C"]
            kmers = {canonical(read[i:i + k]) for read in reads for i in range(len(read) - k + 1)}
            if len(kmers) == 55:
                break
        labeled = label_contigs(self.engine, build_graph(self.engine, reads, k, 0))
        merged = merge_contigs(self.engine, labeled, k, 5)
        self.assertEqual(merged.tips_dropped, 2)
        attached = attach_contig_info(self.engine, merged.graph)
        dead_end = kmer_id(branch[17:22], k)
        branch_point = kmer_id(backbone[15:20], k)
        path = next(c for c in merged.contigs if c.length == 20)
        self.assertIs(attached[dead_end].value.vertex_type(), VertexType.ONE)

        kept = remove_tips(self.engine, attached, k, 20)
        self.assertEqual((kept.stats.kmers_deleted, kept.stats.contigs_deleted), (0, 0))
        self.assertEqual(len(kept.graph), len(attached))

        removed = remove_tips(self.engine, attached, k, 21)
        self.assertEqual((removed.stats.kmers_deleted, removed.stats.contigs_deleted), (1, 1))
        self.assertEqual(removed.stats.tips_removed, 1)
        self.assertNotIn(dead_end, removed.graph.ids())
        self.assertNotIn(path.id, removed.graph.ids())
        self.assertIs(removed.graph[branch_point].value.vertex_type(), VertexType.ONE_ONE)

    def test_long_branch_kept(self):
        """Test that a branch longer than the tip length survives."""
        rng = random.Random(6)
        k = 11
        while True:
            reference = random_sequence(100, rng)
            if unique_kmers(reference, k):
                break
        graph = build_graph(self.engine, [reference, substitute(reference[:30], 29)], k, 0)
        outcome = remove_tips(self.engine, graph, k, 10)
        self.assertEqual(outcome.stats.kmers_deleted, 0)
        self.assertEqual(len(outcome.graph), len(graph))


class TestErrorCorrectionTrace(unittest.TestCase):
    """Test cases for a two-pass run with one tip and one bubble."""

    def setUp(self):
        """Set up test fixtures."""
        rng = random.Random(42)
        k = 11
        while True:
            reference = random_sequence(100, rng)
            reads = []
            for index, start in enumerate(range(0, 71, 5)):
                read = reference[start:start + 30]
                reads.append(reverse_complement(read) if index % 2 else read)
            reads.append(substitute(reference[0:30], 29))
            reads.append(substitute(reference[50:90], 20))
            kmers = {canonical(read[i:i + k]) for read in reads for i in range(len(read) - k + 1)}
            if len(kmers) == 102:
                break
        self.reference = reference
        self.reads = reads
        self.config = PipelineConfig(k=k, min_coverage=0, tip_length=15, edit_distance=5,
                                     extra_rounds=1, workers=2)

    def test_first_round(self):
        """Test that the first round merges five contigs, drops the tip and prunes the bubble."""
        result = AssemblyPipeline(self.config).run(self.reads)
        first = result.rounds[0]
        self.assertEqual(first.contigs, 5)
        self.assertEqual(first.merged_tips, 1)
        self.assertEqual(first.pruned_bubbles, 1)
        self.assertEqual(first.removed_tips, 0)

    def test_second_round_restores_reference(self):
        """Test that the second round yields the reference as one contig."""
        result = AssemblyPipeline(self.config).run(self.reads)
        self.assertEqual(len(result.rounds), 2)
        self.assertEqual([c.seq() for c in result.contigs],
                         [min(self.reference, reverse_complement(self.reference))])
        contig = result.contigs[0]
        self.assertEqual(contig.in_neighbor.vertex, NULL_ID)
        self.assertEqual(contig.out_neighbor.vertex, NULL_ID)


class TestToyGenome(unittest.TestCase):
    """Test cases for a hand-traced k=2 genome with one single-k-mer tip."""

    # AC branches to CT and to the dead end CC; the six canonical 2-mers are distinct
    MAIN = "GAACTG"
    TIP = "ACC"

    def setUp(self):
        """Set up test fixtures."""
        self.engine = BSPEngine(workers=2)
        self.graph = build_graph(self.engine, [self.MAIN, self.TIP], 2, 0)
        self.branch = encode_kmer("AC", 2)
        self.tip = encode_kmer("CC", 2)

    def test_graph_shape(self):
        """Test vertex types before any correction."""
        types = {v.value.sequence: v.value.vertex_type() for v in self.graph}
        self.assertEqual(types, {
            "GA": VertexType.ONE, "AA": VertexType.ONE_ONE, "AC": VertexType.M_N,
            "AG": VertexType.ONE_ONE, "CA": VertexType.ONE, "CC": VertexType.ONE,
        })

    def test_tip_request_and_delete(self):
        """Test that CC asks AC with length 2 and is deleted, leaving AC on a simple path."""
        outcome = remove_tips(self.engine, self.graph, 2, 2)
        self.assertEqual(outcome.stats.phases, 1)
        self.assertEqual(outcome.stats.kmers_deleted, 1)
        self.assertEqual(outcome.stats.tips_removed, 1)
        self.assertNotIn(self.tip, outcome.graph.ids())
        self.assertIs(outcome.graph[self.branch].value.vertex_type(), VertexType.ONE_ONE)

    def test_default_tip_length_removes_everything(self):
        """Test that at 80 bp the whole 6 bp genome is itself a tip."""
        outcome = remove_tips(self.engine, self.graph, 2, 80)
        self.assertEqual(len(outcome.graph), 0)

    def test_bubble_between_two_mers(self):
        """Test that the weaker of two arms between GC and AG is pruned."""
        gc, ag = encode_kmer("GC", 2), encode_kmer("AG", 2)
        strong = arm(1, "GCAAG", 3, start=gc, end=ag)
        weak = arm(2, "GCTAG", 1, start=gc, end=ag)
        self.assertEqual(bubble_key(weak), (ag, gc))
        graph = VertexSet.from_vertices([Vertex(c.id, c) for c in (strong, weak)])
        outcome = filter_bubbles(self.engine, graph, 5)
        self.assertEqual(outcome.pruned, 1)
        self.assertIs(outcome.graph[strong.id].value, strong)
        self.assertIsInstance(outcome.graph[weak.id].value, ContigTombstone)

    def test_two_rounds_restore_genome(self):
        """Test that the tip is merged away in round one and round two yields the genome."""
        config = PipelineConfig(k=2, min_coverage=0, tip_length=2, edit_distance=5,
                                extra_rounds=1, workers=2)
        result = AssemblyPipeline(config).run([self.MAIN, self.TIP])
        first, second = result.rounds
        self.assertEqual((first.contigs, first.merged_tips, first.pruned_bubbles, first.removed_tips),
                         (2, 1, 0, 0))
        self.assertEqual(second.contigs, 1)
        self.assertEqual([c.seq() for c in result.contigs], [canonical(self.MAIN)])


if __name__ == "__main__":
    unittest.main()
