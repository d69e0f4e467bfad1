"""
Graph vertices and the messages exchanged between them.
"""

from .base_vertex import Vertex
from .kmer_vertex import AdjItem, ContigTriplet, KmerVertex, Link, NeighborBitmap, VertexType
from .contig_vertex import ContigNeighbor, ContigTombstone, ContigVertex

__all__ = [
    'Vertex',
    'AdjItem',
    'ContigTriplet',
    'KmerVertex',
    'Link',
    'NeighborBitmap',
    'VertexType',
    'ContigNeighbor',
    'ContigTombstone',
    'ContigVertex',
]
