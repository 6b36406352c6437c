"""
Малый и большой хеши протокола и сериализация хешируемых переменных.

h^s(x, R_iter, R_chunk) = h₂(h₁(x, R_chunk), R_iter) — короткий (o₂ бит)
хеш состояния на каждой итерации; h^b — цепочечный хеш мега-состояний в
конце блока. Все поля сериализации имеют фиксированную при данной
конфигурации ширину либо явный счётчик, поэтому кодирование инъективно.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

from noisy_dialog.bits import Bits, from_hex, int_to_bits, random_bits, to_hex
from noisy_dialog.errors import InputTooLongError, PayloadOverflowError
from noisy_dialog.hashing.pairwise import HashParams, pairwise_hash

if TYPE_CHECKING:
    from noisy_dialog.params import RunConfig
    from noisy_dialog.protocol.simulate import TranscriptChunk

INT_FIELD_BITS = 32
T_COUNT_BITS = 16
PRESENT, ABSENT = (1,), (0,)


class HashSuite:
    """Хеш-функции и сериализация для одной конфигурации запуска."""

    def __init__(self, config: "RunConfig"):
        self.inner: HashParams = config.inner
        self.outer: HashParams = config.outer
        self.big: HashParams = config.big
        self.iter_bits = config.iter_bits

    # ---- сериализация ----
    @staticmethod
    def encode_int(value: int) -> Bits:
        return int_to_bits(value, INT_FIELD_BITS)

    @staticmethod
    def tagged(bits: Optional[Bits]) -> Bits:
        """Метка присутствия: None кодируется как 0 и нули."""
        if bits is None:
            return ABSENT + (0,) * INT_FIELD_BITS
        return PRESENT + bits

    @staticmethod
    def _optional(bits: Optional[Bits]) -> Bits:
        return ABSENT if bits is None else PRESENT + bits

    def encode_b_tuple(
            self,
            prev_hash: Optional[Bits],
            prev_seed: Optional[Bits],
            transcript: Sequence["TranscriptChunk"],
            iteration: int,
    ) -> Bits:
        out: List[int] = []
        out.extend(self._optional(prev_hash))
        out.extend(self._optional(prev_seed))
        out.extend(int_to_bits(len(transcript), T_COUNT_BITS))
        for chunk in transcript:
            out.extend(chunk.bits)
            out.extend(int_to_bits(chunk.iteration, self.iter_bits))
        out.extend(int_to_bits(iteration, self.iter_bits))
        return tuple(out)

    # ---- хеши ----
    def small_hash(self, x: Sequence[int], r_iter: Sequence[int], r_block_chunk: Sequence[int]) -> Bits:
        return pairwise_hash(pairwise_hash(x, r_block_chunk, self.inner), r_iter, self.outer)

    def big_hash(
            self,
            payload: Tuple[Optional[Bits], Optional[Bits], Sequence["TranscriptChunk"], int],
            r_block_b: Sequence[int],
    ) -> Bits:
        bits = self.encode_b_tuple(*payload)
        return self.big_hash_bits(bits, r_block_b)

    def big_hash_bits(self, bits: Sequence[int], r_block_b: Sequence[int]) -> Bits:
        try:
            return pairwise_hash(bits, r_block_b, self.big)
        except InputTooLongError as exc:
            raise PayloadOverflowError(
                f"big-hash payload of {len(bits)} bits does not fit t3={self.big.t}"
            ) from exc


# ---------------------------------------------------------------------------
#   Эталонные векторы
# ---------------------------------------------------------------------------
def golden_vectors(params: Iterable[HashParams], per_params: int = 4, seed: int = 0) -> List[str]:
    """Строки «t o sd input seed output» (поля в hex с длиной) для pairwise_hash."""
    rng = random.Random(seed)
    lines = []
    for p in params:
        for _ in range(per_params):
            x = random_bits(rng, rng.randint(0, p.t))
            s = random_bits(rng, p.sd)
            lines.append(f"{p.t} {p.o} {p.sd} {to_hex(x)} {to_hex(s)} {to_hex(pairwise_hash(x, s, p))}")
    return lines


def verify_vectors(path: str | Path) -> int:
    """Пересчитывает файл векторов; возвращает число несовпадений."""
    mismatches = 0
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip() or line.startswith("#"):
                continue
            t, o, sd, x, s, h = line.split()
            params = HashParams(t=int(t), o=int(o), sd=int(sd))
            if pairwise_hash(from_hex(x), from_hex(s), params) != from_hex(h):
                mismatches += 1
    return mismatches
