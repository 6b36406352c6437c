"""
δ-смещённый генератор с произвольным доступом.

Seed — пара (α, β) ∈ GF(2^m)²; i-й бит равен скалярному произведению
битовых векторов α^i и β по модулю 2. Смещение любой непустой XOR-комбинации
не больше (ℓ−1)/2^m, поэтому берём m = ⌈log₂(ℓ/δ)⌉ + 1. Бит считается
возведением в степень, строка целиком не материализуется.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

from noisy_dialog.bits import Bits, bits_to_int
from noisy_dialog.errors import IndexOutOfRangeError, ParameterError
from noisy_dialog.hashing.field import gf


@dataclass(frozen=True)
class BiasExtender:
    target_len: int  # ℓ
    delta: float  # δ
    field_order: int  # m

    @classmethod
    def for_target(cls, target_len: int, delta: float) -> "BiasExtender":
        if target_len < 1 or not 0 < delta < 1:
            raise ParameterError(f"bad extender sizing ℓ={target_len}, δ={delta}")
        m = math.ceil(math.log2(target_len) - math.log2(delta)) + 1
        return cls(target_len=target_len, delta=delta, field_order=m)

    @property
    def seed_len(self) -> int:
        return 2 * self.field_order

    def __post_init__(self):
        if 2 ** self.field_order * self.delta <= self.target_len:
            raise ParameterError(f"2^m must exceed ℓ/δ: {self}")


def _split(seed: Sequence[int], cfg: BiasExtender):
    if len(seed) != cfg.seed_len:
        raise ParameterError(f"extender seed must have {cfg.seed_len} bits, got {len(seed)}")
    m = cfg.field_order
    return gf(m)(bits_to_int(seed[:m])), bits_to_int(seed[m:])


def extend_bit(seed: Sequence[int], index: int, cfg: BiasExtender) -> int:
    if not 0 <= index < cfg.target_len:
        raise IndexOutOfRangeError(f"index {index} outside [0, {cfg.target_len})")
    alpha, beta = _split(seed, cfg)
    return (int(alpha ** index) & beta).bit_count() & 1


def extend_range(seed: Sequence[int], start: int, stop: int, cfg: BiasExtender) -> Bits:
    """Биты [start, stop): одна экспонента, дальше умножение на α."""
    if not 0 <= start <= stop <= cfg.target_len:
        raise IndexOutOfRangeError(f"range [{start}, {stop}) outside [0, {cfg.target_len})")
    alpha, beta = _split(seed, cfg)
    power = alpha ** start
    out: List[int] = []
    for _ in range(start, stop):
        out.append((int(power) & beta).bit_count() & 1)
        power = power * alpha
    return tuple(out)


def extend_all(seed: Sequence[int], cfg: BiasExtender) -> Bits:
    return extend_range(seed, 0, cfg.target_len, cfg)
