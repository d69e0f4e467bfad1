"""
Bit-exact encodings for nucleotides, k-mer IDs, contig IDs and packed sequences.

Layout of a 64-bit vertex ID:

    k-mer          0 0 .... 2k bits of sequence, first nucleotide most significant
    flipped k-mer  0 1 .... same sequence bits (contig-end marker)
    contig         1 <31-bit worker> <32-bit sequence number>
    NULL           1 0 .... 0
"""

import re
from enum import IntEnum
from typing import NamedTuple, Tuple

import numpy as np

from ..config.constants import MAX_K
from ..errors import InvalidIdError, InvalidKError, InvalidSequenceError, NotAKmerError

NUCLEOTIDES = "ACGT"

CONTIG_BIT = 1 << 63
FLIP_BIT = 1 << 62
NULL_ID = CONTIG_BIT
WORKER_LIMIT = 1 << 31
SEQ_NO_LIMIT = 1 << 32

_INVALID = re.compile(r"[^ACGT]")
_TO_DIGITS = str.maketrans("ACGT", "0123")
_FROM_DIGITS = str.maketrans("0123", "ACGT")
_COMPLEMENT = str.maketrans("ACGT", "TGCA")

_ASCII_TO_CODE = np.full(256, 255, dtype=np.uint8)
for _code, _base in enumerate(NUCLEOTIDES):
    _ASCII_TO_CODE[ord(_base)] = _code
_CODE_TO_ASCII = np.frombuffer(NUCLEOTIDES.encode("ascii"), dtype=np.uint8)


class Orientation(IntEnum):
    """L: observed as canonical. H: observed as the reverse complement."""
    L = 0
    H = 1

    def complement(self) -> "Orientation":
        return Orientation.H if self is Orientation.L else Orientation.L


class End(IntEnum):
    """One of the two ends of a vertex sequence, in canonical orientation."""
    FIVE_PRIME = 0
    THREE_PRIME = 1

    def opposite(self) -> "End":
        return End.THREE_PRIME if self is End.FIVE_PRIME else End.FIVE_PRIME


class EdgePolarity(NamedTuple):
    """Orientation labels of an edge's source and destination."""
    src: Orientation
    dst: Orientation

    @property
    def code(self) -> int:
        """LL=0, LH=1, HL=2, HH=3."""
        return (self.src << 1) | self.dst

    @classmethod
    def from_code(cls, code: int) -> "EdgePolarity":
        return cls(Orientation((code >> 1) & 1), Orientation(code & 1))

    def reversed(self) -> "EdgePolarity":
        """<X:Y> read from the other endpoint is <not Y : not X>."""
        return EdgePolarity(self.dst.complement(), self.src.complement())

    def __str__(self) -> str:
        return f"<{self.src.name}:{self.dst.name}>"


class IdClass(IntEnum):
    KMER = 0
    FLIPPED_KMER = 1
    CONTIG = 2
    NULL = 3
    INVALID = 4


def validate_sequence(seq: str) -> str:
    """Raise InvalidSequenceError unless seq is over A/C/G/T."""
    bad = _INVALID.search(seq)
    if bad:
        raise InvalidSequenceError(f"invalid nucleotide {bad.group()!r} at {bad.start()}")
    return seq


def complement_code(code: int) -> int:
    """A<->T, C<->G as bitwise NOT of the 2-bit code."""
    return ~code & 0b11


def encode_sequence(seq: str) -> int:
    """Pack up to 32 nucleotides into an integer, first nucleotide most significant."""
    validate_sequence(seq)
    if not seq:
        return 0
    return int(seq.translate(_TO_DIGITS), 4)


def decode_sequence(value: int, length: int) -> str:
    """Inverse of encode_sequence for a known length."""
    if length == 0:
        return ""
    return np.base_repr(value, base=4).rjust(length, "0").translate(_FROM_DIGITS)


def encode_kmer(seq: str, k: int) -> int:
    """
    Encode a k-mer as its vertex ID.

    Args:
        seq: Nucleotide string of length k
        k: k-mer length, 1..31

    Returns:
        ID with the 2-bit codes of seq in the low 2k bits
    """
    if not 1 <= k <= MAX_K:
        raise InvalidKError(f"k must be in 1..{MAX_K}, got {k}")
    if len(seq) != k:
        raise InvalidKError(f"sequence length {len(seq)} does not match k={k}")
    return encode_sequence(seq)


def decode_kmer(kmer_id: int, k: int) -> str:
    """Decode an unflipped k-mer ID back into its sequence."""
    if not 1 <= k <= MAX_K:
        raise InvalidKError(f"k must be in 1..{MAX_K}, got {k}")
    if kmer_id < 0 or kmer_id >> (2 * k):
        raise NotAKmerError(f"{kmer_id:#x} is not a {k}-mer ID")
    return decode_sequence(kmer_id, k)


def reverse_complement(seq: str) -> str:
    validate_sequence(seq)
    return seq.translate(_COMPLEMENT)[::-1]


def canonicalize(seq: str) -> Tuple[str, Orientation]:
    """
    Return the lexicographically smaller of seq and its reverse complement.

    Palindromes are reported with orientation L.
    """
    rc = reverse_complement(seq)
    if seq <= rc:
        return seq, Orientation.L
    return rc, Orientation.H


def reverse_complement_id(kmer_id: int, k: int) -> int:
    """Reverse complement on the integer encoding."""
    mask = (1 << (2 * k)) - 1
    value = ~kmer_id & mask
    result = 0
    for _ in range(k):
        result = (result << 2) | (value & 0b11)
        value >>= 2
    return result


def canonical_id(kmer_id: int, k: int) -> Tuple[int, Orientation]:
    rc = reverse_complement_id(kmer_id, k)
    if kmer_id <= rc:
        return kmer_id, Orientation.L
    return rc, Orientation.H


def make_contig_id(worker: int, seq_no: int) -> int:
    """Contig ID from a worker index and a per-worker sequence number; (0, 0) is reserved."""
    if not 0 <= worker < WORKER_LIMIT:
        raise InvalidIdError(f"worker index {worker} out of range")
    if not 0 <= seq_no < SEQ_NO_LIMIT:
        raise InvalidIdError(f"sequence number {seq_no} out of range")
    if worker == 0 and seq_no == 0:
        raise InvalidIdError("(0, 0) is reserved for the NULL sentinel")
    return CONTIG_BIT | (worker << 32) | seq_no


def contig_id_parts(contig_id: int) -> Tuple[int, int]:
    """(worker, seq_no) of a contig ID."""
    if classify_id(contig_id) is not IdClass.CONTIG:
        raise InvalidIdError(f"{contig_id:#x} is not a contig ID")
    return (contig_id >> 32) & (WORKER_LIMIT - 1), contig_id & (SEQ_NO_LIMIT - 1)


def is_contig_id(raw: int) -> bool:
    return classify_id(raw) is IdClass.CONTIG


def is_kmer_id(raw: int) -> bool:
    return 0 <= raw < FLIP_BIT


def flip_end_marker(kmer_id: int) -> int:
    """Toggle bit 62, the contig-end marker of a k-mer ID."""
    if kmer_id < 0 or kmer_id & CONTIG_BIT or kmer_id >> 64:
        raise NotAKmerError(f"{kmer_id:#x} cannot carry an end marker")
    return kmer_id ^ FLIP_BIT


def unflip(raw: int) -> int:
    """Clear the end marker of a k-mer ID; other IDs are returned unchanged."""
    if raw & CONTIG_BIT:
        return raw
    return raw & ~FLIP_BIT


def classify_id(raw: int) -> IdClass:
    if raw < 0 or raw >> 64:
        return IdClass.INVALID
    if raw == NULL_ID:
        return IdClass.NULL
    if raw & CONTIG_BIT:
        return IdClass.CONTIG
    if raw & FLIP_BIT:
        return IdClass.FLIPPED_KMER
    return IdClass.KMER


def format_id(raw: int, k: int) -> str:
    """Human readable rendering used in logs."""
    cls = classify_id(raw)
    if cls is IdClass.KMER:
        return decode_kmer(raw, k)
    if cls is IdClass.FLIPPED_KMER:
        return "~" + decode_kmer(unflip(raw), k)
    if cls is IdClass.CONTIG:
        worker, seq_no = contig_id_parts(raw)
        return f"contig_{worker}_{seq_no}"
    return cls.name


class PackedSequence:
    """Nucleotides packed four per byte, first nucleotide in the two high bits."""

    __slots__ = ("data", "length")

    def __init__(self, data: np.ndarray, length: int):
        self.data = data
        self.length = length

    @classmethod
    def from_string(cls, seq: str) -> "PackedSequence":
        validate_sequence(seq)
        codes = _ASCII_TO_CODE[np.frombuffer(seq.encode("ascii"), dtype=np.uint8)]
        padded = np.zeros(-(-len(codes) // 4) * 4, dtype=np.uint8)
        padded[:len(codes)] = codes
        quads = padded.reshape(-1, 4)
        packed = (quads[:, 0] << 6) | (quads[:, 1] << 4) | (quads[:, 2] << 2) | quads[:, 3]
        return cls(packed.astype(np.uint8), len(seq))

    def codes(self) -> np.ndarray:
        shifts = np.array([6, 4, 2, 0], dtype=np.uint8)
        unpacked = (self.data[:, None] >> shifts) & 0b11
        return unpacked.reshape(-1)[:self.length]

    def to_string(self) -> str:
        if self.length == 0:
            return ""
        return _CODE_TO_ASCII[self.codes()].tobytes().decode("ascii")

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def bit_string(self) -> str:
        """Space separated 2-bit codes, e.g. '11 10 01 01'."""
        return " ".join(format(int(c), "02b") for c in self.codes())

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        return (isinstance(other, PackedSequence) and self.length == other.length
                and np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        preview = self.to_string()
        if len(preview) > 20:
            preview = preview[:17] + "..."
        return f"PackedSequence({preview!r}, length={self.length})"


def encode_varint(value: int) -> bytes:
    """Little-endian base-128 varint, continuation bit set on all but the last byte."""
    if value < 0:
        raise ValueError("varint values must be non-negative")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(buffer: bytes, offset: int = 0) -> Tuple[int, int]:
    """Returns (value, next offset)."""
    value = 0
    shift = 0
    while True:
        if offset >= len(buffer):
            raise ValueError("truncated varint")
        byte = buffer[offset]
        offset += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, offset
        shift += 7
