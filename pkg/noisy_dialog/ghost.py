"""
«Призрак» — всевидящий наблюдатель за испытанием.

Стороны его не видят (кроме сценарных противников). После каждой
итерации и каждого большого хеша он пересчитывает с нуля пути сторон,
расходящуюся точку b, ℓ⁺/ℓ⁻/L⁻, счётчики BVC и потенциал Φ, а также
считает события: опасные итерации, испорченные итерации и случайность,
коллизии малого и большого хеша, откаты.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from noisy_dialog.config import GhostSection
from noisy_dialog.errors import ParameterError
from noisy_dialog.logger import get_logger
from noisy_dialog.memory import floor_mult
from noisy_dialog.party import FIELDS, BlockRecord, IterationRecord, PartyState
from noisy_dialog.protocol.dag import Party
from noisy_dialog.protocol.simulate import TranscriptChunk

logger = get_logger(__name__)

ROLES = (Party.A, Party.B)
NEAR_ZERO_TARGET = 2
NEAR_ZERO_FROM = 8

TRACE_COLUMNS = [
    "I", "ell_plus", "ell_minus", "L_minus", "b", "k_A", "k_B", "E_A", "E_B",
    "BVC_AB", "phi", "dangerous", "corrupted",
]


def check_constants(cfg: GhostSection) -> None:
    """Неравенства, на которых держится анализ потенциала."""
    c = [cfg.c1, cfg.c2, cfg.c3, cfg.c4, cfg.c5, cfg.c6]
    problems = []
    if cfg.c_star < 3:
        problems.append(f"c* = {cfg.c_star} < 3")
    if cfg.c1 < 0.5:
        problems.append(f"C1 = {cfg.c1} < 0.5")
    if cfg.c4 < 4 * (1 + cfg.c2 + cfg.c3) / 0.06:
        problems.append(f"C4 = {cfg.c4} < 4(1 + C2 + C3)/0.06")
    if cfg.c2 < 2 ** (cfg.c_star + 2) * cfg.c1:
        problems.append(f"C2 = {cfg.c2} < 2^(c*+2)·C1")
    if cfg.c6 <= 16 * cfg.c1:
        problems.append(f"C6 = {cfg.c6} <= 16·C1")
    if any(a >= b for a, b in zip(c, c[1:])):
        problems.append(f"C1..C6 must be strictly increasing, got {c}")
    if problems:
        raise ParameterError("ghost constants violate: " + "; ".join(problems))


def phi(
        ell_plus: int,
        ell_minus: int,
        big_l_minus: int,
        k: Mapping[Party, int],
        e: Mapping[Party, int],
        bvc: Mapping[Party, int],
        cfg: GhostSection,
) -> Fraction:
    """Потенциал; ветка выбирается по k_A = k_B, x_AB = x_A + x_B."""
    c = {name: Fraction(str(getattr(cfg, name))) for name in ("c1", "c2", "c3", "c4", "c5", "c6")}
    k_ab = k[Party.A] + k[Party.B]
    e_ab = e[Party.A] + e[Party.B]
    bvc_ab = bvc[Party.A] + bvc[Party.B]
    value = Fraction(ell_plus) - c["c3"] * ell_minus - c["c2"] * big_l_minus
    if k[Party.A] == k[Party.B]:
        return value + c["c1"] * k_ab - c["c5"] * e_ab - 2 * c["c6"] * bvc_ab
    return value - Fraction(9, 10) * c["c4"] * k_ab + c["c4"] * e_ab - c["c6"] * bvc_ab


def common_prefix(a: Sequence[TranscriptChunk], b: Sequence[TranscriptChunk]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


# ---------------------------------------------------------------------------
#   История
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GhostSnapshot:
    """Состояние после итерации; ``*_start`` — на её начале."""

    iteration: int
    ell: Dict[Party, int]
    b: Optional[int]
    ell_minus: int
    k_start: Dict[Party, int]
    jumps: Dict[Party, Optional[Tuple[int, int]]]
    simulated: Dict[Party, bool]
    memory: Dict[Party, FrozenSet[int]]


@dataclass(frozen=True)
class RewindEvent:
    iteration: int
    role: Party
    source: int
    target: int

    @property
    def distance(self) -> int:
        return self.source - self.target

    @property
    def near_zero(self) -> bool:
        return self.target <= NEAR_ZERO_TARGET and self.source >= NEAR_ZERO_FROM


@dataclass(frozen=True)
class SneakyWindow:
    role: Party
    point: int
    scale: int
    diving: Tuple[int, ...]
    voting: Tuple[int, int]

    def iterations(self) -> FrozenSet[int]:
        return frozenset(self.diving) | frozenset(range(self.voting[0], self.voting[1] + 1))


# ---------------------------------------------------------------------------
#   Призрак
# ---------------------------------------------------------------------------
@dataclass
class GhostState:
    cfg: GhostSection = field(default_factory=GhostSection)
    keep_trace: bool = False
    full: bool = True  # иначе только пути, ℓ-величины и счётчики событий

    paths: Dict[Party, List[TranscriptChunk]] = field(default_factory=lambda: {r: [] for r in ROLES})
    b: Optional[int] = None
    ell_plus: int = 0
    ell_minus: int = 0
    big_l_minus: int = 0
    bvc: Dict[Party, int] = field(default_factory=lambda: {r: 0 for r in ROLES})
    phi: Fraction = Fraction(0)

    # ---- счётчики событий ----
    iterations: int = 0
    dangerous_iterations: int = 0
    corrupted_iterations: int = 0
    corrupted_randomness: int = 0
    small_collisions: int = 0
    dangerous_collisions: int = 0
    big_collisions: int = 0
    jumps: int = 0
    error_resets: int = 0
    bvc_violations: int = 0  # рост BVC без порчи/коллизии
    progress_violations: int = 0  # чистая итерация, а Φ вырос меньше чем на 1
    block_violations: int = 0  # Φ изменился на большом хеше с целой случайностью
    upper_violations: int = 0  # Φ > ℓ⁺ + c_upper·(Q + HC)

    rewinds: List[RewindEvent] = field(default_factory=list)
    history: List[GhostSnapshot] = field(default_factory=list)
    trace: List[list] = field(default_factory=list)
    _spent: int = 0

    def __post_init__(self):
        check_constants(self.cfg)

    @property
    def ell(self) -> Dict[Party, int]:
        return {r: len(self.paths[r]) for r in ROLES}

    @property
    def bvc_ab(self) -> int:
        return self.bvc[Party.A] + self.bvc[Party.B]

    # ---- ℓ-величины ----
    def recompute(self, states: Mapping[Party, PartyState]) -> None:
        """Пути и мега-состояния сравниваются только там, где есть у обеих сторон."""
        path_a, path_b = self.paths[Party.A], self.paths[Party.B]
        agreed = common_prefix(path_a, path_b)
        store_a, store_b = states[Party.A].store, states[Party.B].store
        for point in sorted(set(store_a.points) & set(store_b.points)):
            if point > agreed:
                break
            if store_a[point] != store_b[point]:
                agreed = max(point - 1, 0)
                break

        ell_a, ell_b = len(path_a), len(path_b)
        fully = agreed == ell_a == ell_b
        self.b = None if fully else agreed
        self.ell_plus = ell_a if self.b is None else self.b
        self.ell_minus = ell_a + ell_b - 2 * self.ell_plus
        self.big_l_minus = 0 if self.ell_minus == 0 else max(self.big_l_minus, self.ell_minus)

    def potential(self, states: Mapping[Party, PartyState]) -> Fraction:
        return phi(
            self.ell_plus,
            self.ell_minus,
            self.big_l_minus,
            {r: states[r].k for r in ROLES},
            {r: states[r].E for r in ROLES},
            self.bvc,
            self.cfg,
        )

    # ---- итерация ----
    def update_after_iteration(
            self,
            records: Mapping[Party, IterationRecord],
            states: Mapping[Party, PartyState],
            spent: int,
    ) -> None:
        rec_a, rec_b = records[Party.A], records[Party.B]
        iteration = rec_a.iteration
        self.iterations += 1

        dangerous = self.ell_minus > 0 or rec_a.k_start > 1 or rec_b.k_start > 1
        corrupted = spent > self._spent
        self._spent = spent
        bad_randomness = rec_a.r_iter != rec_b.r_iter or rec_a.r_chunk != rec_b.r_chunk
        collision = self._small_collision(rec_a, rec_b) if not bad_randomness else False

        self.dangerous_iterations += dangerous
        self.corrupted_iterations += corrupted
        self.corrupted_randomness += bad_randomness
        self.small_collisions += collision
        self.dangerous_collisions += collision and dangerous

        bvc_grew = self.full and any(
            [self._update_bvc(rec_a, rec_b), self._update_bvc(rec_b, rec_a)]
        )
        if bvc_grew and not (corrupted or bad_randomness or collision):
            self.bvc_violations += 1
            logger.warning(f"[Ghost] I={iteration}: BVC grew without corruption or collision")

        for rec in records.values():
            if rec.simulated:
                path = self.paths[rec.role]
                del path[rec.chunk.depth - 1:]
                path.append(rec.chunk)
            if rec.jump is not None:
                del self.paths[rec.role][rec.jump[1]:]
                self.jumps += 1
                self.rewinds.append(RewindEvent(iteration, rec.role, *rec.jump))
            self.error_resets += rec.error_reset

        previous = self.phi
        self.recompute(states)
        if not self.full:
            return
        self.phi = self.potential(states)
        clean = not (corrupted or bad_randomness or collision)
        if clean and self.phi - previous < 1:
            self.progress_violations += 1
            logger.debug(f"[Ghost] I={iteration}: clean iteration with ΔΦ={float(self.phi - previous):.1f}")
        bound = self.ell_plus + Fraction(str(self.cfg.c_upper)) * (
                self.corrupted_iterations + self.corrupted_randomness + self.dangerous_collisions
        )
        if self.phi > bound:
            self.upper_violations += 1

        self.history.append(GhostSnapshot(
            iteration=iteration,
            ell=self.ell,
            b=self.b,
            ell_minus=self.ell_minus,
            k_start={r: records[r].k_start for r in ROLES},
            jumps={r: records[r].jump for r in ROLES},
            simulated={r: records[r].simulated for r in ROLES},
            memory={r: frozenset(states[r].store.points) for r in ROLES},
        ))
        if self.keep_trace:
            self.trace.append([
                iteration, self.ell_plus, self.ell_minus, self.big_l_minus,
                "" if self.b is None else self.b,
                states[Party.A].k, states[Party.B].k, states[Party.A].E, states[Party.B].E,
                self.bvc_ab, float(self.phi), int(dangerous), int(corrupted),
            ])

    def _small_collision(self, rec_a: IterationRecord, rec_b: IterationRecord) -> bool:
        """Разные входы дали одинаковый хеш в одной из сравниваемых пар полей."""
        pairs = [(f, f) for f in ("k", "v", "b")]
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                pairs += [(f"q{i}.{x}", f"q{j}.{x}") for x in ("v", "b", "depth")]
        for fa, fb in pairs:
            if rec_a.inputs[fa] != rec_b.inputs[fb] and rec_a.own[fa] == rec_b.own[fb]:
                return True
        return False

    def _update_bvc(self, rec: IterationRecord, other: IterationRecord) -> bool:
        """Счёт «плохих голосов»; при расхождении H_k голоса не обновлялись."""
        grew = False
        if not rec.k_mismatch:
            for i, q in enumerate(rec.cand_states, start=1):
                if q is None:
                    continue
                shared = any(
                    other.cand_states[j - 1] is not None
                    and all(rec.inputs[f"q{i}.{x}"] == other.inputs[f"q{j}.{x}"] for x in ("v", "b", "depth"))
                    for j in (1, 2, 3)
                )
                if shared != rec.votes_inc[i - 1]:
                    self.bvc[rec.role] += 1
                    grew = True
        if rec.votes_reset or rec.error_reset:
            self.bvc[rec.role] = 0
        return grew

    # ---- блок ----
    def update_after_block(
            self,
            blocks: Mapping[Party, BlockRecord],
            states: Mapping[Party, PartyState],
    ) -> None:
        blk_a, blk_b = blocks[Party.A], blocks[Party.B]
        intact = blk_a.r_big == blk_b.r_big and states[Party.A].block_seed == states[Party.B].block_seed
        if not intact:
            self.corrupted_randomness += 1
        else:
            for depth in set(blk_a.payloads) & set(blk_b.payloads):
                if blk_a.payloads[depth] != blk_b.payloads[depth] and blk_a.hashes[depth] == blk_b.hashes[depth]:
                    self.big_collisions += 1

        before = self.phi
        self.recompute(states)
        if not self.full:
            return
        self.phi = self.potential(states)
        if intact and self.phi != before:
            self.block_violations += 1
            logger.debug(f"[Ghost] block {blk_a.block}: Φ changed {float(before):.1f} → {float(self.phi):.1f}")

    # ---- отчёты ----
    def rewind_stats(self) -> Dict[str, float]:
        distances = [ev.distance for ev in self.rewinds]
        return {
            "rewinds": len(distances),
            "max_rewind": max(distances, default=0),
            "mean_rewind": sum(distances) / len(distances) if distances else 0.0,
            "near_zero_rewinds": sum(ev.near_zero for ev in self.rewinds),
        }

    def export_trace(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(self.trace)
        logger.info(f"[Ghost] trace of {len(self.trace)} iterations exported to {path}")
        return path


# ---------------------------------------------------------------------------
#   Поиск «подлых» атак
# ---------------------------------------------------------------------------
def _last_index(history: Sequence[GhostSnapshot], role: Party, depth: int, before: int, after: int = -1) -> Optional[int]:
    for u in range(before - 1, after, -1):
        if history[u].ell[role] == depth:
            return u
    return None


def _match_attack(
        history: Sequence[GhostSnapshot],
        t: int,
        x: Party,
        point: int,
        scale: int,
        c_star: int,
) -> Optional[SneakyWindow]:
    y = x.other
    prev = history[t - 1]
    k = history[t].k_start[x]
    if k > 2 ** (scale + 1):
        return None
    p_hat = point + 2 ** scale
    q = point + 2 ** (scale - 1)
    c_q = q + 2 ** scale
    slack = Fraction(2) ** (scale - c_star)

    t_cq = _last_index(history, x, c_q, t)
    if t_cq is None:
        return None
    t_phat = _last_index(history, x, p_hat, t_cq)
    if t_phat is None:
        return None
    t_qhat = next((u for u in range(t_cq + 1, t) if history[u].ell_minus == 0), None)
    if t_qhat is None or not history[t_qhat].ell[x] == history[t_qhat].ell[y] == p_hat:
        return None

    b = prev.b
    if b is None or b < p_hat - slack:
        return None
    t_b = next((u for u in range(t - 1, t_qhat, -1)
                if history[u].jumps[y] is not None and history[u].jumps[y][1] == b), None)
    if t_b is None or any(history[u].b != b for u in range(t_b, t)):
        return None
    if any(history[u].ell[y] >= p_hat + slack for u in range(t_phat, t_b)):
        return None
    if prev.ell[y] >= p_hat + Fraction(2) ** (scale - 2):
        return None
    if q in prev.memory[x]:
        return None

    last_at: Dict[int, int] = {}
    for u in range(t_phat, t_cq + 1):
        depth = history[u].ell[x]
        if history[u].simulated[x] and p_hat < depth <= c_q:
            last_at[depth] = u
    diving = tuple(sorted(history[u].iteration for u in last_at.values() if history[u].ell_minus > 0))
    iteration = history[t].iteration
    return SneakyWindow(x, point, scale, diving, (iteration - k + 1, iteration))


def detect_sneaky_window(ghost: GhostState, history: Optional[Sequence[GhostSnapshot]] = None) -> List[SneakyWindow]:
    """
    Завершённые «подлые» атаки: общий прыжок в точку p, закрывающий
    плохой отрезок, которому предшествовали нырок одной стороны, общий
    откат в p̂ и короткий откат второй стороны к b ≥ p̂ − 2^{w−c*}.
    """
    history = ghost.history if history is None else history
    found: List[SneakyWindow] = []
    for t in range(1, len(history)):
        snap, prev = history[t], history[t - 1]
        if prev.ell_minus == 0 or snap.ell_minus != 0:
            continue
        if snap.k_start[Party.A] != snap.k_start[Party.B]:
            continue
        targets = {jump[1] for jump in snap.jumps.values() if jump is not None}
        for point in targets:
            for x in ROLES:
                depth = prev.ell[x]
                for scale in range(1, depth.bit_length() + 1):
                    if floor_mult(depth, 2 ** scale) - 2 ** scale != point:
                        continue
                    window = _match_attack(history, t, x, point, scale, ghost.cfg.c_star)
                    if window is not None:
                        found.append(window)
    if found:
        logger.info(f"[Ghost] detected {len(found)} completed sneaky attack(s)")
    return found


def windows_disjoint(windows: Sequence[SneakyWindow]) -> bool:
    seen: set = set()
    for w in windows:
        its = w.iterations()
        if seen & its:
            return False
        seen |= its
    return True
