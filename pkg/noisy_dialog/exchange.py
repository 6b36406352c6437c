"""
Обмен случайностью по зашумлённому каналу.

Отправитель генерирует равномерную строку и передаёт её кодовое слово
бит за битом, получатель слушает block_len раундов и декодирует. Все
функции — генераторы для simpy-процесса стороны: ``R = yield from ...``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Generator, Hashable

from noisy_dialog.bits import Bits, random_bits
from noisy_dialog.channel import Endpoint
from noisy_dialog.ecc import EccConfig, ecc_decode, ecc_encode
from noisy_dialog.hashing.bias import BiasExtender, extend_range
from noisy_dialog.rounds import RoundAction

ExchangeProcess = Generator[object, object, Bits]


def randomness_exchange(
        length: int,
        send: bool,
        link: Endpoint,
        ecc: EccConfig,
        rng: random.Random,
        label: Hashable,
) -> ExchangeProcess:
    if send:
        value = random_bits(rng, length)
        yield link.transfer([RoundAction.transmit(b) for b in ecc_encode(value, ecc)], label)
        return value
    received = yield link.listen(ecc.block_len, label)
    return ecc_decode([b or 0 for b in received], ecc)


@dataclass(frozen=True)
class ExtendedSeed:
    """Короткий seed и способ лениво получать куски δ-смещённой строки."""

    seed: Bits
    extender: BiasExtender

    def chunk(self, index: int, width: int) -> Bits:
        """index-й кусок (с нуля) длины width."""
        return extend_range(self.seed, index * width, (index + 1) * width, self.extender)


def pseudo_rand_exchange(
        extender: BiasExtender,
        send: bool,
        link: Endpoint,
        ecc: EccConfig,
        rng: random.Random,
        label: Hashable,
) -> Generator[object, object, ExtendedSeed]:
    seed = yield from randomness_exchange(extender.seed_len, send, link, ecc, rng, label)
    return ExtendedSeed(seed, extender)
