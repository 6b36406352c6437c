"""
Точки встречи и ограниченная память мега-состояний.

M_a = {⌊a⌋_{2^j} − 2^j ≥ 0 : j ≥ 0} — точки, куда сторона на глубине a
может откатиться. Память хранит мега-состояния только для точек из
M_a ∪ {a}; при каждом шаге или прыжке лишние забываются, так что точка,
делящаяся на 2^j (но не на 2^{j+1}), живёт, пока глубина меньше p + 2^{j+1}.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple

from noisy_dialog.bits import Bits
from noisy_dialog.errors import ParameterError

STABLE_MAX = sys.maxsize  # 0 делится на любую степень двойки


@dataclass(frozen=True, slots=True)
class MegaState:
    """
    Контрольная точка симуляции.

    ``depth`` — глубина в итерациях (глубина v в Π, делённая на r);
    ``iter`` — итерация, когда (prev_hash, prev_seed) последний раз менялись.
    p.T не хранится: это срез общего T по глубине ≤ depth.
    """

    v: int
    depth: int
    prev_hash: Optional[Bits] = None
    prev_seed: Optional[Bits] = None
    iter: int = 0

    def __post_init__(self):
        if (self.prev_hash is None) != (self.prev_seed is None):
            raise ParameterError("prev_hash and prev_seed must be both set or both None")


# ---------------------------------------------------------------------------
#   Арифметика точек
# ---------------------------------------------------------------------------
def floor_mult(x: int, y: int) -> int:
    """⌊x⌋_y — наибольшее кратное y, не превосходящее x."""
    if y < 1:
        raise ParameterError(f"floor_mult needs y >= 1, got {y}")
    return (x // y) * y


def mp_set(a: int) -> Set[int]:
    points = set()
    step = 1
    while step <= a:
        points.add(floor_mult(a, step) - step)
        step <<= 1
    return points


def j_stable(p: int) -> int:
    if p == 0:
        return STABLE_MAX
    return (p & -p).bit_length() - 1


def transition_candidates(j: int, ell: int) -> Tuple[Optional[int], Optional[int], Optional[int]]:
    """
    (MP1, MP2, MP3) для масштаба j на глубине ell.

    MP1/MP2 — точки масштабов j+1 и j (None, если отрицательные); MP3 —
    самая глубокая точка математического M_ell, делящаяся на 2^j. Есть ли
    соответствующее мега-состояние в памяти, проверяется отдельно.
    """
    mp1 = floor_mult(ell, 2 ** (j + 1)) - 2 ** (j + 1)
    mp2 = floor_mult(ell, 2 ** j) - 2 ** j
    divisible = [p for p in mp_set(ell) if p % (2 ** j) == 0]
    return (
        mp1 if mp1 >= 0 else None,
        mp2 if mp2 >= 0 else None,
        max(divisible) if divisible else None,
    )


def memory_bound(depth: int) -> int:
    return 2 * math.ceil(math.log2(depth + 2)) + 2


# ---------------------------------------------------------------------------
#   Хранилище
# ---------------------------------------------------------------------------
class MemoryStore:
    """Множество точек M и мега-состояния, которые оно индексирует."""

    __slots__ = ("mega",)

    def __init__(self, initial: Optional[MegaState] = None):
        self.mega: Dict[int, MegaState] = {}
        if initial is not None:
            self.mega[initial.depth] = initial

    @property
    def points(self) -> List[int]:
        return sorted(self.mega)

    def get(self, point: Optional[int]) -> Optional[MegaState]:
        return None if point is None else self.mega.get(point)

    def replace(self, state: MegaState) -> None:
        if state.depth not in self.mega:
            raise KeyError(f"no mega-state at depth {state.depth} to replace")
        self.mega[state.depth] = state

    def copy(self) -> "MemoryStore":
        clone = MemoryStore()
        clone.mega = dict(self.mega)
        return clone

    def __contains__(self, point: object) -> bool:
        return point in self.mega

    def __getitem__(self, point: int) -> MegaState:
        return self.mega[point]

    def __iter__(self) -> Iterator[MegaState]:
        return iter(self.mega[p] for p in self.points)

    def __len__(self) -> int:
        return len(self.mega)

    def __repr__(self) -> str:
        return f"MemoryStore(points={self.points})"


def maintain_avmps(p: MegaState, store: MemoryStore, add: bool) -> MemoryStore:
    """M ← (M ∩ M_a) ∪ {a}, a = p.depth; при add кладёт копию p (перезаписывая старую)."""
    a = p.depth
    keep = mp_set(a)
    for q in [q for q in store.mega if q != a and q not in keep]:
        del store.mega[q]
    if add:
        store.mega[a] = p
    elif a not in store.mega:
        raise ParameterError(f"jump target {a} is not in memory")
    return store
