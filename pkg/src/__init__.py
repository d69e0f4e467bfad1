"""
De Bruijn graph genome assembler on an in-process vertex-centric BSP engine.

This package contains:
- 2-bit k-mer and contig ID codec
- Superstep engine with aggregators, job chaining and a mini map-reduce
- Graph construction from reads with coverage filtering
- Contig labeling by list ranking or connected components
- Contig merging, bubble filtering and tip removal
- Read simulator and assembly metrics
"""

__version__ = "1.0.0"
__author__ = "Assembler Developer"
