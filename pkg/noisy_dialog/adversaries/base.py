# noisy_dialog/adversaries/base.py

import random
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Mapping, Optional

from noisy_dialog.channel import Budget, RoundContext, Verdict
from noisy_dialog.protocol.dag import Party

if TYPE_CHECKING:
    from noisy_dialog.ghost import GhostState
    from noisy_dialog.params import RunConfig
    from noisy_dialog.party import RobustParty


class AdversaryStrategy(ABC):
    """
    Базовый класс стратегий противника.

    Канал спрашивает стратегию на каждом раунде, видя только действия
    сторон в этом раунде. Сценарным стратегиям симулятор дополнительно
    передаёт через :meth:`bind` конфигурацию, «призрак» (GhostState) и
    объекты сторон.
    """

    name = "base"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)
        self.config: Optional["RunConfig"] = None
        self.ghost: Optional["GhostState"] = None
        self.parties: Mapping[Party, "RobustParty"] = {}

    def bind(
            self,
            *,
            config: Optional["RunConfig"] = None,
            ghost: Optional["GhostState"] = None,
            parties: Optional[Mapping[Party, "RobustParty"]] = None,
    ) -> None:
        self.config = config
        self.ghost = ghost
        self.parties = parties or {}

    @abstractmethod
    def decide(self, ctx: RoundContext, budget: Budget) -> Verdict:
        """
        Решение на один раунд.

        :param ctx: номер раунда, метка расписания и действия обеих сторон
        :param budget: текущий бюджет (перевороты сверх лимита канал подавит)
        :return: Verdict — переворот бита и/или вброс в тишину
        """
        ...

    def observe(self, ctx: RoundContext, recv_a: Optional[int], recv_b: Optional[int]) -> None:
        """Вызывается после доставки раунда; по умолчанию история не копится."""

    @staticmethod
    def eligible(ctx: RoundContext) -> bool:
        """Передаёт ровно одна сторона — только такой бит можно перевернуть."""
        return ctx.a_action.transmits != ctx.b_action.transmits
