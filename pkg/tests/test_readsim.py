"""
Tests for the seeded read simulator.
"""

import io
import unittest
import sys
import os

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config.settings import SimConfig
from src.errors import ConfigError
from src.systems.readsim import mutate, random_reference, simulate
from src.utils.kmer_codec import reverse_complement
from src.utils.seq_io import parse_fastq, write_fastq


def forward_view(read) -> str:
    return reverse_complement(read.sequence) if read.reverse else read.sequence


class TestReadSimulator(unittest.TestCase):
    """Test cases for read sampling and error injection."""

    def setUp(self):
        """Set up test fixtures."""
        self.config = SimConfig(reference_length=5000, read_length_min=80, read_length_max=120,
                                depth=20, error_rate=0.005, seed=11)

    def test_error_free_reads_are_substrings(self):
        """Test that exact reads match the reference on their strand and position."""
        config = SimConfig(reference_length=2000, depth=5, error_rate=0.0, seed=3)
        result = simulate(config)
        self.assertEqual(len(result.reference), 2000)
        for read in result.reads:
            segment = result.reference[read.start:read.start + len(read.sequence)]
            self.assertEqual(forward_view(read), segment, read.name)

    def test_same_seed_same_fastq(self):
        """Test that a seed fixes the FASTQ text."""
        texts = []
        for _ in range(2):
            handle = io.StringIO()
            write_fastq(simulate(self.config).reads, handle)
            texts.append(handle.getvalue())
        self.assertEqual(texts[0], texts[1])
        other = io.StringIO()
        write_fastq(simulate(SimConfig(**{**self.config.__dict__, "seed": 12})).reads, other)
        self.assertNotEqual(texts[0], other.getvalue())

    def test_fastq_parses_back(self):
        """Test that written reads parse back to the same sequences."""
        result = simulate(self.config)
        handle = io.StringIO()
        written = write_fastq(result.reads, handle)
        self.assertEqual(written, len(result.reads))
        parsed = list(parse_fastq(io.StringIO(handle.getvalue())))
        self.assertEqual(parsed, result.sequences())
        self.assertTrue(handle.getvalue().startswith("@read_1 strand="))

    def test_mismatch_rate(self):
        """Test that the observed substitution rate is near the configured one."""
        result = simulate(self.config)
        mismatches = 0
        for read in result.reads:
            segment = result.reference[read.start:read.start + len(read.sequence)]
            mismatches += sum(a != b for a, b in zip(forward_view(read), segment))
        self.assertAlmostEqual(mismatches / result.total_bases, 0.005, delta=0.002)

    def test_strand_balance(self):
        """Test that about half of the reads come from the reverse strand."""
        result = simulate(self.config)
        fraction = sum(read.reverse for read in result.reads) / len(result.reads)
        self.assertGreaterEqual(fraction, 0.45)
        self.assertLessEqual(fraction, 0.55)

    def test_mean_coverage(self):
        """Test that total read length reaches the requested depth."""
        result = simulate(self.config)
        depth = result.total_bases / len(result.reference)
        self.assertGreaterEqual(depth, 20)
        self.assertLess(abs(depth - 20) / 20, 0.15)
        self.assertTrue(all(80 <= len(read.sequence) <= 120 for read in result.reads))

    def test_short_reference_rejected(self):
        """Test that a reference shorter than the minimum read length is an error."""
        with self.assertRaises(ConfigError):
            simulate(SimConfig(read_length_min=100, read_length_max=100), reference="ACGT" * 10)

    def test_explicit_reference(self):
        """Test that a given reference is sampled instead of a random one."""
        reference = "ACGTTGCA" * 50
        result = simulate(SimConfig(read_length_min=50, read_length_max=50, depth=2, error_rate=0.0),
                          reference=reference)
        self.assertEqual(result.reference, reference)
        self.assertTrue(all(forward_view(r) in reference for r in result.reads))

    def test_n_rate(self):
        """Test that a nonzero N rate masks bases."""
        result = simulate(SimConfig(reference_length=1000, depth=5, error_rate=0.0, n_rate=0.05, seed=1))
        self.assertTrue(any("N" in read.sequence for read in result.reads))

    def test_invalid_config(self):
        """Test settings validation."""
        with self.assertRaises(ConfigError):
            SimConfig(error_rate=1.5)
        with self.assertRaises(ConfigError):
            SimConfig(read_length_min=200, read_length_max=100)
        with self.assertRaises(ConfigError):
            SimConfig(depth=0)


class TestMutate(unittest.TestCase):
    """Test cases for substitution error injection."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(5)

    def test_zero_rate_is_identity(self):
        """Test that no errors leaves the segment unchanged."""
        segment = random_reference(500, self.rng)
        self.assertEqual(mutate(segment, self.rng, 0.0), segment)

    def test_substitutions_change_base(self):
        """Test that every substitution picks a different nucleotide."""
        segment = random_reference(2000, self.rng)
        mutated = mutate(segment, self.rng, 0.5)
        self.assertEqual(len(mutated), len(segment))
        self.assertTrue(set(mutated) <= set("ACGT"))
        changed = sum(a != b for a, b in zip(segment, mutated))
        self.assertGreater(changed, 800)
        self.assertLess(changed, 1200)


if __name__ == "__main__":
    unittest.main()
