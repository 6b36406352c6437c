"""
Действие стороны в одном раунде канала (модель «говори или слушай»).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True, slots=True)
class RoundAction:
    """``bit is None`` — сторона слушает, иначе передаёт ``bit``."""

    bit: Optional[int] = None

    @property
    def transmits(self) -> bool:
        return self.bit is not None

    @staticmethod
    def transmit(bit: int) -> "RoundAction":
        return TRANSMIT_ONE if bit else TRANSMIT_ZERO

    @staticmethod
    def listen() -> "RoundAction":
        return LISTEN

    def __str__(self) -> str:
        return "L" if self.bit is None else f"T{self.bit}"


LISTEN = RoundAction(None)
TRANSMIT_ZERO = RoundAction(0)
TRANSMIT_ONE = RoundAction(1)
