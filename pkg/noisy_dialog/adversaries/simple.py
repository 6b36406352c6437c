"""
Простые противники: без шума, случайные перевороты, пачка ошибок.
"""

from noisy_dialog.adversaries.base import AdversaryStrategy
from noisy_dialog.channel import NO_TAMPER, Budget, RoundContext, Verdict
from noisy_dialog.errors import ParameterError
from noisy_dialog.logger import get_logger

logger = get_logger(__name__)

FLIP = Verdict(flip=True)


class NoiseFreeStrategy(AdversaryStrategy):
    """Ничего не портит; в тишину вбрасывает нули."""

    name = "noise_free"

    def decide(self, ctx: RoundContext, budget: Budget) -> Verdict:
        return NO_TAMPER


class RandomFlipStrategy(AdversaryStrategy):
    """Переворачивает каждый допустимый бит с вероятностью p, пока есть бюджет."""

    name = "random_flip"

    def __init__(self, p: float, seed: int = 0):
        super().__init__(seed)
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"flip probability must lie in [0, 1], got {p}")
        self.p = p
        logger.info(f"[Adversary] random_flip p={p} seed={seed}")

    def decide(self, ctx: RoundContext, budget: Budget) -> Verdict:
        if budget.remaining <= 0 or not self.eligible(ctx):
            return NO_TAMPER
        return FLIP if self.rng.random() < self.p else NO_TAMPER


class BurstStrategy(AdversaryStrategy):
    """Переворачивает все допустимые биты в раундах [start, start + length)."""

    name = "burst"

    def __init__(self, start: int, length: int, seed: int = 0):
        super().__init__(seed)
        if start < 0 or length < 0:
            raise ParameterError(f"burst window must be non-negative, got start={start} length={length}")
        self.start = start
        self.length = length

    def decide(self, ctx: RoundContext, budget: Budget) -> Verdict:
        in_window = self.start <= ctx.index < self.start + self.length
        if in_window and budget.remaining > 0 and self.eligible(ctx):
            return FLIP
        return NO_TAMPER
