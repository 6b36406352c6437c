"""
Сценарные атаки на рассинхронизацию.

Сценарий — список фаз; фаза длится заданное число итераций (или, для
``resolve`` и ``nudge``, до наступления события). Противник портит только
биты хешей в сегменте проверки; видит «призрак», состояния сторон и уже
переданные seed'ы, по которым сам пересчитывает их хеши.

Примитивы:

* ``push(X)`` — X идёт вперёд один: X слышит свои же хеши k, v, b, а
  второй стороне портится бит H_k, если хеши k совпали бы;
* ``nudge(Y)`` — Y один делает короткий откат: Y слышит свои же хеши k и
  кандидатов (голоса копятся без ошибок), один бит H_v портится, чтобы Y
  не симулировал; вторая сторона сбрасывается по H_k;
* ``resolve`` — не вмешиваться, пока ℓ⁻ = 0 и k ≤ 1 у обеих сторон;
* ``greedy`` — переворачивать бит H_k от A к B каждый раз, когда «призрак»
  видит синхронизацию.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Optional

from noisy_dialog.adversaries.base import AdversaryStrategy
from noisy_dialog.adversaries.simple import FLIP
from noisy_dialog.channel import NO_TAMPER, Budget, RoundContext, Verdict
from noisy_dialog.logger import get_logger
from noisy_dialog.party import FIELDS, STATE_FIELDS, Hashes, RobustParty, hash_inputs, verify_slot
from noisy_dialog.protocol.dag import Party

logger = get_logger(__name__)

PhaseKind = Literal["clean", "push", "resolve", "nudge", "greedy"]
FOREVER = 1 << 62


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    length: int
    party: Optional[Party] = None


@dataclass
class PhaseWindow:
    """Итерации [first, last], в которые фаза реально действовала."""

    kind: PhaseKind
    party: Optional[Party]
    first: int
    last: int
    skipped: bool = False


def predicted_hashes(party: RobustParty) -> Hashes:
    """
    Малые хеши, которые сторона отправит в текущей итерации.

    Считаются по состоянию стороны и seed'ам, уже прошедшим через канал
    (R_iter этой итерации и seed блока), а не по ещё не переданным битам.
    """
    s = party.state
    r_chunk = s.block_seed.chunk(s.i_cnt - 1, party.config.inner.sd)
    inputs = hash_inputs(s, party.suite)
    return {name: party.suite.small_hash(inputs[name], s.r_iter, r_chunk) for name in FIELDS}


class PhasedDesyncStrategy(AdversaryStrategy):
    name = "phased"

    def __init__(self, phases: Iterable[Phase], seed: int = 0):
        super().__init__(seed)
        self.phases: List[Phase] = list(phases)
        self.windows: List[PhaseWindow] = []
        self.iteration = 0
        self._idx = 0
        self._used = 0
        self._skipping = False
        self._in_sync = False
        self._predicted: Dict[Party, Hashes] = {}

    @property
    def current(self) -> Optional[Phase]:
        return self.phases[self._idx] if self._idx < len(self.phases) else None

    # ---- продвижение по сценарию ----
    def _own(self, role: Party, field: str):
        if role not in self._predicted:
            self._predicted[role] = predicted_hashes(self.parties[role])
        return self._predicted[role][field]

    def _resolved(self) -> bool:
        if any(p.state.k > 1 for p in self.parties.values()):
            return False
        return self.ghost is None or self.ghost.ell_minus == 0

    def _phase_done(self, phase: Phase) -> bool:
        if self._used >= phase.length:
            return True
        if phase.kind == "resolve":
            return self._resolved()
        if phase.kind == "nudge" and self._used > 0:
            record = self.parties[phase.party].last_record
            return record is not None and record.jump is not None
        return False

    def _phase_cost(self, phase: Phase) -> int:
        o2 = self.config.outer.o
        if phase.kind == "push":
            return phase.length * (3 * o2 // 2 + 1)
        if phase.kind == "nudge":
            return phase.length * (5 * o2 + 2)
        return 0

    def _enter_iteration(self, iteration: int, budget: Budget) -> None:
        self.iteration = iteration
        self._predicted = {}
        while self.current is not None and self._phase_done(self.current):
            self._idx += 1
            self._used = 0
        phase = self.current
        if phase is None:
            return
        if self._used == 0:
            cost = self._phase_cost(phase)
            self._skipping = cost > budget.remaining
            if self._skipping:
                logger.warning(
                    f"[Adversary] {self.name}: {phase.kind} phase needs ~{cost} flips, "
                    f"{budget.remaining} left; degrading to clean"
                )
            self.windows.append(PhaseWindow(phase.kind, phase.party, iteration, iteration, self._skipping))
        self._used += 1
        self.windows[-1].last = iteration
        self._in_sync = self.ghost is not None and self.ghost.ell_minus == 0

    # ---- решение на раунд ----
    def decide(self, ctx: RoundContext, budget: Budget) -> Verdict:
        label = ctx.label
        if not (isinstance(label, tuple) and label[0] == "verify"):
            return NO_TAMPER
        if label[1] != self.iteration:
            self._enter_iteration(label[1], budget)
        phase = self.current
        if phase is None or self._skipping or budget.remaining <= 0 or not self.eligible(ctx):
            return NO_TAMPER

        field, sender, bit = verify_slot(ctx.offset, self.config.outer.o)
        sent = (ctx.a_action if sender is Party.A else ctx.b_action).bit
        receiver = sender.other
        flip = False

        if phase.kind == "push":
            leader = phase.party
            if receiver is leader and field in STATE_FIELDS:
                flip = sent != self._own(leader, field)[bit]
            elif sender is leader and field == "k" and bit == 0:
                flip = self._own(leader, "k") == self._own(receiver, "k")
        elif phase.kind == "nudge":
            mover = phase.party
            if receiver is mover:
                if field == "v":
                    flip = bit == 0 and self._own(sender, "v") == self._own(mover, "v")
                elif field != "b":
                    flip = sent != self._own(mover, field)[bit]
            elif field == "k" and bit == 0:
                flip = self._own(sender, "k") == self._own(receiver, "k")
        elif phase.kind == "greedy":
            flip = (
                    self._in_sync
                    and sender is Party.A
                    and field == "k"
                    and bit == 0
                    and self._own(Party.A, "k") == self._own(Party.B, "k")
            )
        return FLIP if flip else NO_TAMPER


# ---------------------------------------------------------------------------
#   Готовые сценарии
# ---------------------------------------------------------------------------
def figure1_attack(
        *,
        warmup: int,
        dive: int,
        small_dive: int,
        gap: int,
        repeats: int,
        resolve_cap: int = 256,
        seed: int = 0,
) -> PhasedDesyncStrategy:
    """Глубокая рассинхронизация, затем повторные мелкие после того, как точки забыты."""
    phases = [
        Phase("clean", warmup),
        Phase("push", dive, Party.A),
        Phase("resolve", resolve_cap),
    ]
    for _ in range(repeats):
        phases += [
            Phase("clean", gap),
            Phase("push", small_dive, Party.A),
            Phase("resolve", resolve_cap),
        ]
    strategy = PhasedDesyncStrategy(phases, seed)
    strategy.name = "figure1_attack"
    return strategy


def sneaky_attack(
        *,
        warmup: int,
        scale: int,
        gap: int,
        repeats: int,
        resolve_cap: int = 256,
        seed: int = 0,
) -> PhasedDesyncStrategy:
    """
    A уходит вглубь одна (и забывает ранние точки), пока B стоит; после
    общего отката B делает короткий откат к точке, которую A уже не помнит.
    """
    dive = 3 * 2 ** (scale - 1)
    phases = [Phase("clean", warmup)]
    for i in range(repeats):
        if i:
            phases.append(Phase("clean", gap))
        phases += [
            Phase("push", dive, Party.A),
            Phase("resolve", resolve_cap),
            Phase("nudge", 8, Party.B),
            Phase("resolve", resolve_cap),
        ]
    strategy = PhasedDesyncStrategy(phases, seed)
    strategy.name = "sneaky_attack"
    return strategy


def greedy_desync(seed: int = 0) -> PhasedDesyncStrategy:
    strategy = PhasedDesyncStrategy([Phase("greedy", FOREVER)], seed)
    strategy.name = "greedy_desync"
    return strategy
