"""
Base vertex record shared by every engine job.
"""

from dataclasses import dataclass
from typing import Any


@dataclass
class Vertex:
    """
    A vertex as the engine sees it.
    The value is job-defined; the engine only reads id and active.
    """

    id: int
    value: Any = None
    active: bool = True

    def __repr__(self) -> str:
        state = "active" if self.active else "halted"
        return f"Vertex({self.id:#x}, {type(self.value).__name__}, {state})"
