"""
Исходный протокол Π как DAG-игра с фишкой.

Состояние — целое число (индекс). Нетерминальное состояние принадлежит
одной из сторон и имеет ровно два ребра с метками 0 и 1; владелец знает
бит перехода τ(v) (входы «зашиты» в переходы). Глубина ребёнка всегда на
единицу больше глубины родителя, поэтому граф ацикличен, а все терминалы
лежат на глубине d.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from noisy_dialog.bits import Bits
from noisy_dialog.errors import DagFormatError, ParameterError
from noisy_dialog.logger import get_logger

logger = get_logger(__name__)

StateId = int


class Party(str, Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Party":
        return Party.B if self is Party.A else Party.A


@dataclass(frozen=True)
class ProtocolDag:
    """
    Таблица смежности Π.

    ``children[v]`` равно ``None`` для терминалов. ``base_depth`` — глубина
    до добивки (см. :func:`pad_dag`); у недобитого DAG совпадает с ``depth``.
    Оба участника читают DAG совместно, в учёт памяти он не входит.
    """

    root: StateId
    owner: Tuple[Party, ...]
    children: Tuple[Optional[Tuple[StateId, StateId]], ...]
    transition: Tuple[int, ...]
    depth_of: Tuple[int, ...]
    depth: int
    base_depth: int

    @property
    def state_count(self) -> int:
        return len(self.owner)

    def is_terminal(self, v: StateId) -> bool:
        return self.children[v] is None

    # на терминале «говорит» A и шлёт нули, этим добивается хвост раундов
    def owner_of(self, v: StateId) -> Party:
        return Party.A if self.children[v] is None else self.owner[v]

    def transition_bit(self, v: StateId) -> int:
        return 0 if self.children[v] is None else self.transition[v]

    def step(self, v: StateId, bit: int) -> StateId:
        kids = self.children[v]
        return v if kids is None else kids[bit]

    def validate(self) -> None:
        """Проверяет инварианты ProtocolDag, иначе DagFormatError."""
        n = self.state_count
        if not (len(self.children) == len(self.transition) == len(self.depth_of) == n):
            raise DagFormatError("state tables have different lengths")
        if not 0 <= self.root < n or self.depth_of[self.root] != 0:
            raise DagFormatError(f"root {self.root} must exist and have depth 0")
        for v in range(n):
            if self.transition[v] not in (0, 1):
                raise DagFormatError(f"state {v}: transition bit must be 0 or 1")
            kids = self.children[v]
            if kids is None:
                if self.depth_of[v] != self.depth:
                    raise DagFormatError(f"terminal {v} at depth {self.depth_of[v]}, expected {self.depth}")
                continue
            for child in kids:
                if not 0 <= child < n:
                    raise DagFormatError(f"state {v}: child {child} does not exist")
                if self.depth_of[child] != self.depth_of[v] + 1:
                    raise DagFormatError(f"state {v}: child {child} is not one level deeper")


# ---------------------------------------------------------------------------
#   Генерация тестовых экземпляров
# ---------------------------------------------------------------------------
def _level_owner(level: int, rng: random.Random, single_owner: Optional[Party]) -> Party:
    if single_owner is not None:
        return single_owner
    # в каждом окне из 4 уровней есть уровень A (δ≡0) и уровень B (δ≡2)
    if level % 4 == 0:
        return Party.A
    if level % 4 == 2:
        return Party.B
    return Party.A if rng.random() < 0.5 else Party.B


def build_random_dag(
        depth: int,
        state_budget: int,
        rng_seed: int,
        *,
        single_owner: Optional[Party] = None,
) -> ProtocolDag:
    """
    Случайный послойный DAG глубины ``depth`` не более чем из ``state_budget`` состояний.

    Результат — детерминированная функция аргументов.
    """
    if depth < 1:
        raise ParameterError(f"depth must be >= 1, got {depth}")
    if state_budget < depth + 1:
        raise ParameterError(
            f"state_budget={state_budget} is too small for depth={depth} (need >= {depth + 1})"
        )
    rng = random.Random(rng_seed)

    # ширины уровней: по одному состоянию на уровень, остаток раскидываем случайно,
    # уровень δ не шире 2^δ
    widths = [1] * (depth + 1)
    open_levels = [lvl for lvl in range(1, depth + 1) if widths[lvl] < 2 ** lvl]
    for _ in range(state_budget - depth - 1):
        if not open_levels:
            break
        idx = rng.randrange(len(open_levels))
        lvl = open_levels[idx]
        widths[lvl] += 1
        if lvl < 63 and widths[lvl] >= 2 ** lvl:
            open_levels[idx] = open_levels[-1]
            open_levels.pop()

    first_id: List[int] = []
    total = 0
    for w in widths:
        first_id.append(total)
        total += w

    owner: List[Party] = []
    children: List[Optional[Tuple[int, int]]] = []
    transition: List[int] = []
    depth_of: List[int] = []
    for lvl, w in enumerate(widths):
        for _ in range(w):
            owner.append(_level_owner(lvl, rng, single_owner))
            depth_of.append(lvl)
            transition.append(rng.getrandbits(1))
            if lvl == depth:
                children.append(None)
                continue
            nxt_first, nxt_w = first_id[lvl + 1], widths[lvl + 1]
            if nxt_w == 1:
                children.append((nxt_first, nxt_first))
            else:
                c0, c1 = rng.sample(range(nxt_first, nxt_first + nxt_w), 2)
                children.append((c0, c1))

    dag = ProtocolDag(
        root=0,
        owner=tuple(owner),
        children=tuple(children),
        transition=tuple(transition),
        depth_of=tuple(depth_of),
        depth=depth,
        base_depth=depth,
    )
    logger.debug(f"[Dag] built depth={depth} states={total} seed={rng_seed}")
    return dag


def pad_dag(dag: ProtocolDag, r: int) -> ProtocolDag:
    """
    Добивает глубину до кратной r цепочкой состояний A с τ=0.

    Все терминалы получают общего ребёнка — первое звено цепочки.
    """
    padded = r * math.ceil(dag.depth / r)
    extra = padded - dag.depth
    if extra == 0:
        return dag
    n = dag.state_count
    chain = list(range(n, n + extra))
    children = [
        (chain[0], chain[0]) if kids is None else kids
        for kids in dag.children
    ]
    for i, v in enumerate(chain):
        children.append(None if i == extra - 1 else (v + 1, v + 1))
    # бывшие терминалы становятся звеньями добивки: говорит A, шлёт 0
    owner = tuple(Party.A if kids is None else p for p, kids in zip(dag.owner, dag.children))
    transition = tuple(0 if kids is None else t for t, kids in zip(dag.transition, dag.children))
    return ProtocolDag(
        root=dag.root,
        owner=owner + (Party.A,) * extra,
        children=tuple(children),
        transition=transition + (0,) * extra,
        depth_of=dag.depth_of + tuple(range(dag.depth + 1, padded + 1)),
        depth=padded,
        base_depth=dag.base_depth,
    )


def noiseless_run(dag: ProtocolDag) -> Bits:
    """Транскрипт Π без шума: ведём фишку от корня по битам перехода."""
    v = dag.root
    out: List[int] = []
    while not dag.is_terminal(v):
        bit = dag.transition[v]
        out.append(bit)
        v = dag.step(v, bit)
    return tuple(out)


# ---------------------------------------------------------------------------
#   Текстовый формат
# ---------------------------------------------------------------------------
def _fmt_child(kids: Optional[Sequence[int]], idx: int) -> str:
    return "-" if kids is None else str(kids[idx])


def dump_dag(dag: ProtocolDag, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"d={dag.depth} s={dag.state_count} root={dag.root}\n")
        for v in range(dag.state_count):
            kids = dag.children[v]
            f.write(
                f"{v} {dag.owner[v].value} {dag.depth_of[v]} "
                f"{_fmt_child(kids, 0)} {_fmt_child(kids, 1)} {dag.transition[v]}\n"
            )


def load_dag(path: str | Path) -> ProtocolDag:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines:
        raise DagFormatError(f"{path}: empty file")
    try:
        header = dict(item.split("=", 1) for item in lines[0].split())
        depth, count, root = int(header["d"]), int(header["s"]), int(header["root"])
    except (KeyError, ValueError) as exc:
        raise DagFormatError(f"{path}: bad header «{lines[0]}»") from exc
    if len(lines) - 1 != count:
        raise DagFormatError(f"{path}: header says s={count}, found {len(lines) - 1} states")

    owner: List[Party] = [Party.A] * count
    children: List[Optional[Tuple[int, int]]] = [None] * count
    transition = [0] * count
    depth_of = [0] * count
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 6:
            raise DagFormatError(f"{path}: bad state line «{ln}»")
        try:
            v = int(parts[0])
            owner[v] = Party(parts[1])
            depth_of[v] = int(parts[2])
            if (parts[3] == "-") != (parts[4] == "-"):
                raise DagFormatError(f"{path}: state {v} has exactly one child")
            children[v] = None if parts[3] == "-" else (int(parts[3]), int(parts[4]))
            transition[v] = int(parts[5])
        except (ValueError, IndexError) as exc:
            raise DagFormatError(f"{path}: bad state line «{ln}»") from exc

    dag = ProtocolDag(
        root=root,
        owner=tuple(owner),
        children=tuple(children),
        transition=tuple(transition),
        depth_of=tuple(depth_of),
        depth=depth,
        base_depth=depth,
    )
    dag.validate()
    return dag
