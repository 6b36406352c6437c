"""
Битовые строки.

Внутри протокола биты хранятся как кортежи 0/1 (хешируемые, сравнимые);
хеши и ECC переводят их в numpy-массивы uint8.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence, Tuple

import numpy as np

Bits = Tuple[int, ...]


def int_to_bits(value: int, width: int) -> Bits:
    """Старший бит первым; value должен помещаться в width бит."""
    if value < 0 or value >> width:
        raise ValueError(f"value {value} does not fit into {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Iterable[int]) -> int:
    acc = 0
    for b in bits:
        acc = (acc << 1) | (b & 1)
    return acc


def random_bits(rng: random.Random, n: int) -> Bits:
    if n == 0:
        return ()
    return int_to_bits(rng.getrandbits(n), n)


def hamming(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise ValueError("hamming distance of strings with different lengths")
    return sum(x != y for x, y in zip(a, b))


def as_array(bits: Sequence[int]) -> np.ndarray:
    return np.asarray(bits, dtype=np.uint8)


def to_hex(bits: Sequence[int]) -> str:
    """Hex с длиной в битах: '13:1a2b' (ведущие нули не теряются)."""
    width = (len(bits) + 3) // 4
    return f"{len(bits)}:{bits_to_int(bits):0{width}x}" if bits else "0:"


def from_hex(text: str) -> Bits:
    length, _, digits = text.partition(":")
    n = int(length)
    return int_to_bits(int(digits, 16), n) if n else ()
