"""
Message bodies exchanged between vertices.

Bodies are frozen dataclasses with integer fields so inboxes can be
ordered deterministically. The sender is carried by the engine envelope.
"""

from dataclasses import dataclass
from enum import IntEnum

from ..utils.kmer_codec import End


# contig labeling

@dataclass(frozen=True)
class IdBroadcast:
    """Sent by ambiguous vertices so unambiguous neighbors treat them as path ends."""


@dataclass(frozen=True)
class RankRequest:
    pass


@dataclass(frozen=True)
class RankResponse:
    entry_id: int
    entry_end: bool


@dataclass(frozen=True)
class NeighborParent:
    parent: int


@dataclass(frozen=True)
class ParentQuery:
    pass


@dataclass(frozen=True)
class ParentReply:
    parent: int


@dataclass(frozen=True)
class HookProposal:
    parent: int


# contig info attachment

@dataclass(frozen=True)
class ContigInfo:
    contig: int
    contig_end: End
    anchor: int
    anchor_end: End
    target_end: End
    other: int
    other_side: End
    length: int
    coverage: int
    link_coverage: int


@dataclass(frozen=True)
class DeletionNotice:
    anchor: int
    anchor_end: End
    target_end: End


# tip removal

class TipKind(IntEnum):
    REQUEST = 0
    DELETE = 1


@dataclass(frozen=True)
class TipMessage:
    kind: TipKind
    origin: int
    length: int
    sender_end: End
    contig: int


@dataclass(frozen=True)
class DeleteContig:
    pass
