"""
Метрики испытания: успех, накладные расходы по раундам, пиковая память
сторон и счётчики событий «призрака».
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Sequence

from noisy_dialog.logger import get_logger
from noisy_dialog.params import RunConfig
from noisy_dialog.party import PartyState
from noisy_dialog.protocol.dag import Party

logger = get_logger(__name__)

COUNTERS_PER_PARTY = 8  # k, E, v⁽¹⁾..v⁽³⁾, j, I_current, I_cnt


def measure_memory_bits(state: PartyState, config: RunConfig) -> int:
    """
    Рабочая память стороны в битах; общий граф Π только читается и не считается.

    точки M по ⌈log₂ d⌉ бит, мега-состояния по ⌈log₂ s⌉ + o₃ + sd₃ + 2⌈log₂ d⌉,
    куски T по r + ⌈log₂ d⌉, счётчики шириной ⌈log₂ I_total⌉ + флаг Rew,
    плюс seed'ы, которые сторона держит в данный момент.
    """
    log_d = config.i_block
    log_s = (config.states - 1).bit_length()
    counter = config.i_total.bit_length()

    bits = len(state.store) * log_d
    bits += len(state.store) * (log_s + config.big.o + config.big.sd + 2 * log_d)
    bits += len(state.T) * (config.r + log_d)
    bits += COUNTERS_PER_PARTY * counter + 1
    if state.block_seed is not None:
        bits += config.extender.seed_len
    if state.r_iter is not None:
        bits += config.outer.sd
    bits += sum(len(half) for half in state.r_big if half is not None)
    return bits


@dataclass
class TrialResult:
    trial: int
    seed: int
    success: bool
    total_rounds: int
    overhead: float
    peak_memory_bits_A: int
    peak_memory_bits_B: int
    jumps: int
    error_resets: int
    dangerous_iterations: int
    small_collisions: int
    big_collisions: int
    budget_spent: int
    wall_time: float
    # сверх обязательных полей
    final_depth_A: int = 0
    final_depth_B: int = 0
    correct_length: int = 0
    corrupted_iterations: int = 0
    corrupted_randomness: int = 0
    budget_violations: int = 0
    bvc_violations: int = 0
    progress_violations: int = 0
    block_violations: int = 0
    upper_violations: int = 0
    max_rewind: int = 0
    mean_rewind: float = 0.0
    near_zero_rewinds: int = 0
    sneaky_windows: int = 0
    simulated_iterations_A: int = 0
    simulated_iterations_B: int = 0
    dummy_iterations_A: int = 0
    dummy_iterations_B: int = 0

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> Dict[str, Any]:
        return asdict(self)


class MetricsCollector:
    """Сбор метрик одного испытания."""

    def __init__(self, config: RunConfig):
        self.config = config
        # ---- память ----
        self.peak_memory: Dict[Party, int] = {Party.A: 0, Party.B: 0}

        # ---- счётчики итераций ----
        self.simulated: Dict[Party, int] = {Party.A: 0, Party.B: 0}
        self.dummy: Dict[Party, int] = {Party.A: 0, Party.B: 0}

    # ------------------------------------------------------------------ #
    #   Методы-регистраторы                                              #
    # ------------------------------------------------------------------ #
    def record_memory(self, role: Party, state: PartyState) -> int:
        bits = measure_memory_bits(state, self.config)
        self.peak_memory[role] = max(self.peak_memory[role], bits)
        return bits

    def record_iteration(self, record) -> None:
        if record.simulated:
            self.simulated[record.role] += 1
        else:
            self.dummy[record.role] += 1


def overhead(total_rounds: int, depth: int) -> float:
    return total_rounds / depth - 1


def success_of(path_bits: Sequence[int], oracle: Sequence[int]) -> bool:
    """Правильный путь покрывает весь дополненный Π и совпадает с бесшумным прогоном."""
    return len(path_bits) >= len(oracle) and tuple(path_bits[:len(oracle)]) == tuple(oracle)
