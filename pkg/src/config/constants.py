"""
Numeric defaults shared across the assembler.
"""

# k-mer model
DEFAULT_K = 31
MAX_K = 31

# Error correction
DEFAULT_TIP_LENGTH = 80
DEFAULT_EDIT_DISTANCE = 5
DEFAULT_EXTRA_ROUNDS = 1

# Engine
DEFAULT_WORKERS = 4
DEFAULT_MAX_SUPERSTEPS = 10_000

# Output
FASTA_WRAP = 80
LONG_CONTIG_LENGTH = 500

# Read simulator
DEFAULT_READ_LENGTH = 100
DEFAULT_DEPTH = 30.0
DEFAULT_ERROR_RATE = 0.005
DEFAULT_REFERENCE_LENGTH = 20_000
DEFAULT_PHRED = 40
