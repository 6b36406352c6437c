"""
Самопроверка на полном масштабе: переборные наборы свойств точек встречи,
радиус декодирования кода и частота коллизий малого хеша.

Каждая функция возвращает число нарушений; :func:`run_selftest` собирает
их в отчёт. Ненулевой итог — повод вернуть из CLI код 1.
"""

import random
from typing import Dict, Iterator, Optional, Tuple

from noisy_dialog.bits import random_bits
from noisy_dialog.ecc import EccConfig, ecc_decode, ecc_encode
from noisy_dialog.hashing.suite import HashSuite
from noisy_dialog.logger import get_logger
from noisy_dialog.memory import (
    MegaState,
    MemoryStore,
    j_stable,
    maintain_avmps,
    memory_bound,
    mp_set,
    transition_candidates,
)
from noisy_dialog.params import RunConfig, derive_params

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
#   Точки встречи
# ---------------------------------------------------------------------------
def check_membership(max_point: int = 2 ** 12, max_depth: int = 2 ** 13) -> int:
    """p ∈ M_a ∪ {a} ⇔ a ∈ [p, p + 2^{j+1} − 1] для j-стабильной p > 0; 0 ∈ M_a при a ≥ 1."""
    def top(p: int) -> int:
        return p + 2 ** (j_stable(p) + 1) - 1

    violations = 0
    hits = [0] * (max_point + 1)
    for a in range(max_depth + 1):
        members = mp_set(a) | {a}
        violations += a > 0 and 0 not in members
        for p in members:
            if not 1 <= p <= max_point:
                continue
            if p <= a <= top(p):
                hits[p] += 1
            else:
                violations += 1
    # каждая точка встречается ровно на всём своём отрезке
    for p in range(1, max_point + 1):
        violations += hits[p] != min(top(p), max_depth) - p + 1
    return violations


def check_common_point(max_depth: int = 2 ** 10, max_scale: int = 8) -> int:
    """MP1(j, ℓ_A) ∈ {MP1(j, ℓ_B), MP2(j, ℓ_B)} при 0 ≤ ℓ_A − ℓ_B ≤ 2^{j−3}."""
    violations = 0
    for j in range(3, max_scale + 1):
        gap = 2 ** (j - 3)
        for ell_b in range(max_depth + 1):
            mp1_b, mp2_b, _ = transition_candidates(j, ell_b)
            for ell_a in range(ell_b, min(ell_b + gap, max_depth) + 1):
                if transition_candidates(j, ell_a)[0] not in (mp1_b, mp2_b):
                    violations += 1
    return violations


def random_walk(rng: random.Random, steps: int, jump_prob: float = 0.2) -> Iterator[Tuple[int, MemoryStore, Optional[int]]]:
    """Шаги +1 и прыжки в сохранённые точки; отдаёт (глубина, память, цель прыжка)."""
    store = MemoryStore(MegaState(v=0, depth=0))
    depth = 0
    for _ in range(steps):
        target = None
        if depth > 0 and rng.random() < jump_prob:
            target = rng.choice([p for p in store.points if p < depth] or [0])
            depth = target
            maintain_avmps(store[target], store, add=False)
        else:
            depth += 1
            maintain_avmps(MegaState(v=depth, depth=depth), store, add=True)
        yield depth, store, target


def check_walks(n_walks: int = 1000, steps: int = 400, seed: int = 0) -> Dict[str, int]:
    """
    Забывание: p в памяти ⇔ после последнего посещения p глубина не
    доходила до p + 2^{j+1}. Прыжки: после забывания w-стабильной p первый
    прыжок ниже p + 2^w попадает не выше p. Плюс оценка размера памяти.
    """
    rng = random.Random(seed)
    forgetting = jumps = bound = 0
    for _ in range(n_walks):
        peak_since: Dict[int, int] = {0: 0}
        dropped: Dict[int, int] = {}
        before = {0}
        for depth, store, target in random_walk(rng, steps):
            peak_since[depth] = depth
            dropped.pop(depth, None)
            for p in list(peak_since):
                peak = max(peak_since[p], depth)
                if p > depth or (p and peak >= p + 2 ** (j_stable(p) + 1)):
                    del peak_since[p]
                else:
                    peak_since[p] = peak
            forgetting += set(peak_since) != set(store.points)

            if target is not None:
                for p, w in list(dropped.items()):
                    if target < p + 2 ** w:
                        jumps += target > p
                        del dropped[p]
            now = set(store.points)
            for p in before - now:
                dropped[p] = j_stable(p)
            before = now
            bound += len(store) > memory_bound(depth)
    return {"forgetting": forgetting, "jump_discipline": jumps, "memory_bound": bound}


# ---------------------------------------------------------------------------
#   Код и хеши
# ---------------------------------------------------------------------------
def check_ecc_radius(config: RunConfig, trials: int = 10_000, seed: int = 0) -> int:
    """Ровно 2·I_block перевёрнутых бит всегда декодируются точно."""
    rng = random.Random(seed)
    cfg = EccConfig.for_message(config.inner.sd * config.i_block, config.i_block)
    failures = 0
    for _ in range(trials):
        msg = random_bits(rng, cfg.msg_len)
        word = list(ecc_encode(msg, cfg))
        for pos in rng.sample(range(cfg.block_len), 2 * config.i_block):
            word[pos] ^= 1
        failures += ecc_decode(word, cfg) != msg
    return failures


def small_hash_collision_rate(config: RunConfig, draws: int = 100_000, seed: int = 0) -> Tuple[float, float]:
    """(наблюдаемая частота, аналитическая граница) для различных случайных входов."""
    rng = random.Random(seed)
    suite = HashSuite(config)
    collisions = 0
    for _ in range(draws):
        x = random_bits(rng, config.inner.t)
        y = random_bits(rng, config.inner.t)
        if x == y:
            continue
        r_iter = random_bits(rng, config.outer.sd)
        r_chunk = random_bits(rng, config.inner.sd)
        collisions += suite.small_hash(x, r_iter, r_chunk) == suite.small_hash(y, r_iter, r_chunk)
    bound = config.inner.collision_bound + config.outer.collision_bound
    return collisions / draws, bound


def run_selftest(
        *,
        epsilon: float = 0.01,
        depth: int = 4096,
        walks: int = 1000,
        ecc_trials: int = 10_000,
        hash_draws: int = 100_000,
        seed: int = 0,
) -> Dict[str, int]:
    config = derive_params(epsilon, depth, seed=seed)
    report: Dict[str, int] = {
        "membership": check_membership(),
        "common_point": check_common_point(),
    }
    report.update(check_walks(walks, seed=seed))
    report["ecc_radius"] = check_ecc_radius(config, ecc_trials, seed)
    rate, bound = small_hash_collision_rate(config, hash_draws, seed)
    report["hash_bound"] = int(rate > 2 * bound)
    for name, count in report.items():
        log = logger.info if count == 0 else logger.error
        log(f"[Selftest] {name}: {count} violation(s)")
    logger.info(f"[Selftest] small-hash collision rate {rate:.2e} vs bound {bound:.2e}")
    return report
