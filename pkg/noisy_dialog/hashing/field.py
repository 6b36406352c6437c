"""
Поля GF(2^m) через galois.

galois по умолчанию берёт полиномы Конвея — фиксированные опубликованные
неприводимые полиномы, так что результаты воспроизводимы между запусками
и реализациями.
"""

from functools import lru_cache
from typing import Type

import galois

from noisy_dialog.errors import ParameterError

MAX_FIELD_BITS = 62


@lru_cache(maxsize=None)
def gf(m: int) -> Type[galois.FieldArray]:
    if not 1 <= m <= MAX_FIELD_BITS:
        raise ParameterError(f"GF(2^{m}) is outside the supported range [1, {MAX_FIELD_BITS}]")
    return galois.GF(2 ** m)
