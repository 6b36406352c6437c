from noisy_dialog.adversaries.base import AdversaryStrategy
from noisy_dialog.adversaries.scripted import (
    Phase,
    PhasedDesyncStrategy,
    PhaseWindow,
    figure1_attack,
    greedy_desync,
    sneaky_attack,
)
from noisy_dialog.adversaries.simple import BurstStrategy, NoiseFreeStrategy, RandomFlipStrategy
from noisy_dialog.config import AdversarySection

__all__ = [
    "AdversaryStrategy",
    "BurstStrategy",
    "NoiseFreeStrategy",
    "Phase",
    "PhaseWindow",
    "PhasedDesyncStrategy",
    "RandomFlipStrategy",
    "build_adversary",
    "figure1_attack",
    "greedy_desync",
    "sneaky_attack",
]


def build_adversary(section: AdversarySection, seed: int = 0) -> AdversaryStrategy:
    """Стратегия по секции ``adversary:`` конфига."""
    name = section.name
    if name == "noise_free":
        return NoiseFreeStrategy(seed)
    if name == "random_flip":
        return RandomFlipStrategy(section.p, seed)
    if name == "burst":
        return BurstStrategy(section.start, section.length, seed)
    if name == "figure1_attack":
        return figure1_attack(
            warmup=section.warmup,
            dive=section.dive,
            small_dive=section.small_dive,
            gap=section.gap,
            repeats=section.repeats,
            seed=seed,
        )
    if name == "sneaky_attack":
        return sneaky_attack(
            warmup=section.warmup,
            scale=section.scale,
            gap=section.gap,
            repeats=section.repeats,
            seed=seed,
        )
    if name == "greedy_desync":
        return greedy_desync(seed)
    raise ValueError(f"Unknown adversary «{name}»")
