"""
Код Рида–Соломона для обмена случайностью.

Сообщение из ℓ бит пакуется в m-битные символы, к ним добавляется
4·I_block + 1 проверочный символ. Кодовое расстояние в символах
4·I_block + 2, а один перевёрнутый бит портит не больше одного символа,
поэтому любые ≤ 2·I_block битовых ошибок исправляются однозначно.

Код укороченный: используем RS(2^m − 1, k) из galois, дописывая слева
нулевые символы сообщения, которые по каналу не передаются.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import galois
import numpy as np

from noisy_dialog.bits import Bits
from noisy_dialog.errors import LengthMismatchError, ParameterError
from noisy_dialog.hashing.field import gf
from noisy_dialog.logger import get_logger

logger = get_logger(__name__)

C_ECC = 5  # block_len ≤ C_ECC·(ℓ + I_block·m)
MIN_SYMBOL_BITS = 3


@dataclass(frozen=True)
class EccConfig:
    msg_len: int  # ℓ
    guard: int  # I_block
    symbol_bits: int  # m
    block_len: int

    @classmethod
    def for_message(cls, msg_len: int, guard: int) -> "EccConfig":
        if msg_len < 1 or guard < 1:
            raise ParameterError(f"bad ECC sizing ℓ={msg_len}, I_block={guard}")
        m = MIN_SYMBOL_BITS
        while 2 ** m - 1 < math.ceil(msg_len / m) + 4 * guard + 1:
            m += 1
        block_len = (math.ceil(msg_len / m) + 4 * guard + 1) * m
        return cls(msg_len=msg_len, guard=guard, symbol_bits=m, block_len=block_len)

    def __post_init__(self):
        if self.block_len < self.msg_len:
            raise ParameterError(f"block shorter than message: {self}")
        # паритет 4g+1 символов по m бит: граница 5·(ℓ + g·m) в битах, а не 3·(ℓ + g)
        if self.block_len > C_ECC * (self.msg_len + self.guard * self.symbol_bits):
            raise ParameterError(f"ECC rate bound violated: {self}")

    @property
    def msg_symbols(self) -> int:
        return math.ceil(self.msg_len / self.symbol_bits)

    @property
    def parity_symbols(self) -> int:
        return 4 * self.guard + 1

    @property
    def correctable_bits(self) -> int:
        return 2 * self.guard


@lru_cache(maxsize=None)
def _code(m: int, parity: int) -> galois.ReedSolomon:
    n = 2 ** m - 1
    return galois.ReedSolomon(n, n - parity, field=gf(m))


def _pack(bits: Sequence[int], cfg: EccConfig) -> np.ndarray:
    m = cfg.symbol_bits
    padded = np.zeros(cfg.msg_symbols * m, dtype=np.int64)
    padded[:len(bits)] = bits
    weights = np.left_shift(np.int64(1), np.arange(m - 1, -1, -1, dtype=np.int64))
    return padded.reshape(-1, m) @ weights


def _unpack(symbols: np.ndarray, m: int) -> np.ndarray:
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((symbols.astype(np.int64)[:, None] >> shifts) & 1).reshape(-1)


def ecc_encode(msg: Sequence[int], cfg: EccConfig) -> Bits:
    """Систематическое кодирование: биты сообщения, затем проверочные символы."""
    if len(msg) != cfg.msg_len:
        raise LengthMismatchError(f"message has {len(msg)} bits, expected {cfg.msg_len}")
    code = _code(cfg.symbol_bits, cfg.parity_symbols)
    shortened = code.k - cfg.msg_symbols
    full = np.concatenate([np.zeros(shortened, dtype=np.int64), _pack(msg, cfg)])
    codeword = code.encode(code.field(full)).view(np.ndarray).astype(np.int64)[shortened:]
    return tuple(int(b) for b in _unpack(codeword, cfg.symbol_bits))


def ecc_decode(received: Sequence[int], cfg: EccConfig) -> Bits:
    """
    Декодирование с исправлением до 2·I_block битовых ошибок.

    За пределами радиуса возвращается какое-то сообщение длины ℓ —
    протокол переживает испорченную случайность, исключения здесь не нужны.
    """
    if len(received) != cfg.block_len:
        raise LengthMismatchError(f"received {len(received)} bits, expected {cfg.block_len}")
    m = cfg.symbol_bits
    code = _code(m, cfg.parity_symbols)
    shortened = code.k - cfg.msg_symbols
    weights = np.left_shift(np.int64(1), np.arange(m - 1, -1, -1, dtype=np.int64))
    symbols = np.asarray(received, dtype=np.int64).reshape(-1, m) @ weights
    full = np.concatenate([np.zeros(shortened, dtype=np.int64), symbols])
    decoded, n_errors = code.decode(code.field(full), errors=True)
    if n_errors < 0:
        logger.debug(f"[Ecc] block of {cfg.block_len} bits is beyond the decoding radius")
    msg_bits = _unpack(decoded.view(np.ndarray).astype(np.int64)[shortened:], m)
    return tuple(int(b) for b in msg_bits[:cfg.msg_len])
