"""
Побитовый канал с моделью «говори или слушай» поверх simpy.

* передаёт ровно одна сторона — слушатель получает бит, противник может
  его перевернуть за единицу бюджета;
* передают обе — никто ничего не получает;
* молчат обе — противник бесплатно выбирает, что услышит каждая.

Стороны сдают в канал сегменты действий (список раундов с общей меткой
расписания). Когда сегменты обеих сторон собраны, канал проходит их
раунд за раундом, на каждом спрашивая противника, и через len(segment)
единиц времени возвращает сторонам доставленные биты. Время simpy равно
номеру раунда.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Hashable, List, Optional, Sequence, Tuple

import simpy

from noisy_dialog.errors import ScheduleDesyncError
from noisy_dialog.logger import get_logger
from noisy_dialog.protocol.dag import Party
from noisy_dialog.rounds import LISTEN, RoundAction

if TYPE_CHECKING:
    from noisy_dialog.adversaries.base import AdversaryStrategy

logger = get_logger(__name__)

__all__ = [
    "Budget",
    "Channel",
    "Endpoint",
    "RoundAction",
    "RoundContext",
    "RoundRecord",
    "Verdict",
    "deliver_round",
    "LISTEN",
]


@dataclass(slots=True)
class Budget:
    total_rounds: int
    limit: int
    spent: int = 0
    violations: int = 0  # подавленные попытки сверх лимита

    @classmethod
    def for_rounds(cls, total_rounds: int, epsilon: float) -> "Budget":
        return cls(total_rounds=total_rounds, limit=math.floor(epsilon * total_rounds))

    @property
    def remaining(self) -> int:
        return self.limit - self.spent


@dataclass(frozen=True, slots=True)
class Verdict:
    """Решение противника на раунд: перевернуть бит или что вбросить в тишину."""

    flip: bool = False
    inject_a: int = 0
    inject_b: int = 0


NO_TAMPER = Verdict()


@dataclass(frozen=True, slots=True)
class RoundContext:
    index: int  # глобальный номер раунда
    label: Hashable  # метка сегмента расписания
    offset: int  # номер раунда внутри сегмента
    a_action: RoundAction
    b_action: RoundAction


@dataclass(frozen=True, slots=True)
class RoundRecord:
    index: int
    a_action: RoundAction
    b_action: RoundAction
    delivered_a: Optional[int]
    delivered_b: Optional[int]
    spent: int


def deliver_round(
        a_act: RoundAction,
        b_act: RoundAction,
        adv: "AdversaryStrategy",
        budget: Budget,
        ctx: Optional[RoundContext] = None,
) -> Tuple[Optional[int], Optional[int]]:
    if ctx is None:
        ctx = RoundContext(-1, None, 0, a_act, b_act)
    verdict = adv.decide(ctx, budget)

    if a_act.transmits and b_act.transmits:
        return None, None
    if not a_act.transmits and not b_act.transmits:
        return verdict.inject_a & 1, verdict.inject_b & 1

    bit = a_act.bit if a_act.transmits else b_act.bit
    if verdict.flip:
        if budget.remaining > 0:
            budget.spent += 1
            bit ^= 1
        else:
            budget.violations += 1
            logger.warning(f"[Channel] round {ctx.index}: over-budget flip suppressed ({adv.name})")
    return (None, bit) if a_act.transmits else (bit, None)


@dataclass(slots=True)
class _Submission:
    actions: Sequence[RoundAction]
    label: Hashable
    event: simpy.Event


class Channel:
    """Канал одного испытания; ведёт счёт раундов, бюджет и (по флагу) журнал."""

    def __init__(
            self,
            env: simpy.Environment,
            adversary: "AdversaryStrategy",
            budget: Budget,
            *,
            trace: bool = False,
    ):
        self.env = env
        self.adversary = adversary
        self.budget = budget
        self.trace = trace
        self.round = 0
        self.log: List[RoundRecord] = []
        self._pending: Dict[Party, _Submission] = {}

    def endpoint(self, role: Party) -> "Endpoint":
        return Endpoint(self, role)

    def exchange(self, role: Party, actions: Sequence[RoundAction], label: Hashable) -> simpy.Event:
        """Сдать сегмент; событие сработает со списком доставленных битов."""
        event = self.env.event()
        if role in self._pending:
            raise ScheduleDesyncError(f"{role.value} submitted twice before the segment resolved")
        self._pending[role] = _Submission(actions, label, event)
        if len(self._pending) == 2:
            self._resolve()
        return event

    def _resolve(self) -> None:
        sub_a = self._pending.pop(Party.A)
        sub_b = self._pending.pop(Party.B)
        if sub_a.label != sub_b.label or len(sub_a.actions) != len(sub_b.actions):
            logger.error(
                f"[Channel] t={self.env.now}: schedule desync A={sub_a.label}/{len(sub_a.actions)} "
                f"B={sub_b.label}/{len(sub_b.actions)}"
            )
            raise ScheduleDesyncError(f"parties disagree on segment: {sub_a.label} vs {sub_b.label}")

        got_a: List[Optional[int]] = []
        got_b: List[Optional[int]] = []
        for offset, (a_act, b_act) in enumerate(zip(sub_a.actions, sub_b.actions)):
            ctx = RoundContext(self.round, sub_a.label, offset, a_act, b_act)
            recv_a, recv_b = deliver_round(a_act, b_act, self.adversary, self.budget, ctx)
            self.adversary.observe(ctx, recv_a, recv_b)
            got_a.append(recv_a)
            got_b.append(recv_b)
            if self.trace:
                self.log.append(RoundRecord(self.round, a_act, b_act, recv_a, recv_b, self.budget.spent))
            self.round += 1

        delay = self.env.timeout(len(sub_a.actions))

        def _deliver(_event):
            sub_a.event.succeed(got_a)
            sub_b.event.succeed(got_b)

        delay.callbacks.append(_deliver)

    def export_trace(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["round", "a_action", "b_action", "delivered_a", "delivered_b", "spent"])
            for rec in self.log:
                writer.writerow([
                    rec.index, rec.a_action, rec.b_action,
                    "" if rec.delivered_a is None else rec.delivered_a,
                    "" if rec.delivered_b is None else rec.delivered_b,
                    rec.spent,
                ])
        logger.info(f"[Channel] trace of {len(self.log)} rounds exported to {path}")
        return path


@dataclass(slots=True)
class Endpoint:
    """Сторона канала, привязанная к роли."""

    channel: Channel
    role: Party

    def transfer(self, actions: Sequence[RoundAction], label: Hashable) -> simpy.Event:
        return self.channel.exchange(self.role, actions, label)

    def listen(self, n: int, label: Hashable) -> simpy.Event:
        return self.transfer([LISTEN] * n, label)
