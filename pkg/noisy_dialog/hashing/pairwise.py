"""
Попарно-независимое хеширование вычислением многочлена над GF(2^o).

Вход кодируется как 32-битный префикс длины + сами биты + нули до
n·o бит, где n = ⌈(t + 32)/o⌉. Куски c₀..c_{n−1} по o бит дают
h(x) = Σ cᵢ·α^{i+1} + β, seed = (α, β), sd = 2o. Для x ≠ y вероятность
коллизии по равномерному seed не больше n·2^{−o}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import galois
import numpy as np

from noisy_dialog.bits import Bits, bits_to_int, int_to_bits
from noisy_dialog.errors import InputTooLongError, ParameterError
from noisy_dialog.hashing.field import MAX_FIELD_BITS, gf

LENGTH_PREFIX_BITS = 32


@dataclass(frozen=True)
class HashParams:
    t: int  # максимальная длина входа
    o: int  # длина выхода
    sd: int  # длина seed

    def __post_init__(self):
        if min(self.t, self.o, self.sd) < 1:
            raise ParameterError(f"hash params must be positive: {self}")
        if self.o > MAX_FIELD_BITS:
            raise ParameterError(f"output length o={self.o} exceeds {MAX_FIELD_BITS}")
        if self.sd != 2 * self.o:
            raise ParameterError(f"polynomial hashing needs sd = 2·o, got sd={self.sd}, o={self.o}")

    @property
    def n_chunks(self) -> int:
        return math.ceil((self.t + LENGTH_PREFIX_BITS) / self.o)

    @property
    def collision_bound(self) -> float:
        return self.n_chunks / 2 ** self.o


def _chunks(x: Sequence[int], params: HashParams) -> np.ndarray:
    o, n = params.o, params.n_chunks
    framed = np.zeros(n * o, dtype=np.uint8)
    framed[:LENGTH_PREFIX_BITS] = int_to_bits(len(x), LENGTH_PREFIX_BITS)
    framed[LENGTH_PREFIX_BITS:LENGTH_PREFIX_BITS + len(x)] = np.asarray(x, dtype=np.uint8)
    weights = np.left_shift(np.int64(1), np.arange(o - 1, -1, -1, dtype=np.int64))
    return framed.reshape(n, o).astype(np.int64) @ weights


def pairwise_hash(x: Sequence[int], seed: Sequence[int], params: HashParams) -> Bits:
    if len(x) > params.t:
        raise InputTooLongError(f"input of {len(x)} bits exceeds t={params.t}")
    if len(seed) != params.sd:
        raise ParameterError(f"seed must have {params.sd} bits, got {len(seed)}")
    field = gf(params.o)
    alpha = field(bits_to_int(seed[:params.o]))
    beta = field(bits_to_int(seed[params.o:]))
    # старший коэффициент первым: c_{n-1}, ..., c_0
    poly = galois.Poly(field(np.ascontiguousarray(_chunks(x, params)[::-1])), field=field)
    value = poly(alpha) * alpha + beta
    return int_to_bits(int(value), params.o)
