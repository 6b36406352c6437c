"""
Интерактивная симуляция r раундов Π.

:func:`simulate_rounds` — сопрограмма: отдаёт наружу ``RoundAction`` на
каждый раунд и получает через ``send()`` доставленный бит (``None`` для
передающей стороны). Так один и тот же код работает и в simpy-процессе
стороны, и в синхронных тестах через :func:`drive_rounds`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generator, List, Optional, Tuple

from noisy_dialog.bits import Bits
from noisy_dialog.errors import ParameterError
from noisy_dialog.protocol.dag import Party, ProtocolDag, StateId
from noisy_dialog.rounds import LISTEN, RoundAction


@dataclass(frozen=True, slots=True)
class TranscriptChunk:
    """
    Транскрипт одной итерации: r бит и номер итерации, в которой они
    просимулированы. ``depth`` — глубина (в итерациях), на которую вывел
    этот кусок; по ней режется T^{≤p}.
    """

    bits: Bits
    iteration: int
    depth: int


SimulationCoroutine = Generator[RoundAction, Optional[int], Tuple[Bits, StateId]]


def simulate_rounds(dag: ProtocolDag, start: StateId, r: int, role: Party) -> SimulationCoroutine:
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    v = start
    bits: List[int] = []
    for _ in range(r):
        if dag.owner_of(v) is role:
            bit = dag.transition_bit(v)
            yield RoundAction.transmit(bit)
        else:
            received = yield LISTEN
            bit = received or 0
        bits.append(bit)
        v = dag.step(v, bit)
    return tuple(bits), v


def drive_rounds(
        dag: ProtocolDag,
        start: StateId,
        r: int,
        role: Party,
        io: Callable[[RoundAction], Optional[int]],
) -> Tuple[Bits, StateId]:
    """Прогоняет :func:`simulate_rounds` с обычным посраундовым хуком ``io``."""
    coro = simulate_rounds(dag, start, r, role)
    action = next(coro)
    while True:
        try:
            action = coro.send(io(action))
        except StopIteration as stop:
            return stop.value


def couple_lossless(dag: ProtocolDag, start: StateId, r: int) -> Tuple[Tuple[Bits, StateId], Tuple[Bits, StateId]]:
    """Две стороны, соединённые идеальным каналом; результат (A, B)."""
    coro_a = simulate_rounds(dag, start, r, Party.A)
    coro_b = simulate_rounds(dag, start, r, Party.B)
    act_a, act_b = next(coro_a), next(coro_b)
    result_a = result_b = None
    while result_a is None or result_b is None:
        to_a = act_b.bit if not act_a.transmits else None
        to_b = act_a.bit if not act_b.transmits else None
        try:
            act_a = coro_a.send(to_a)
        except StopIteration as stop:
            result_a = stop.value
        try:
            act_b = coro_b.send(to_b)
        except StopIteration as stop:
            result_b = stop.value
    return result_a, result_b
