"""
Устойчивая сторона: машина состояний одной стороны.

Расписание блока:
  обмен seed'ом R_block^s (передаёт A) →
  I_block итераций [R_iter (передаёт A) → проверка → вычисление → переход] →
  обмен R^{b,1} (передаёт A) и R^{b,2} (передаёт B) → большой хеш.

Число раундов каждого сегмента не зависит от содержимого, так что стороны
остаются выровнены по раундам, даже когда расходятся по состоянию.

Решающая логика вынесена в чистые функции над :class:`PartyState`
(их удобно гонять в тестах без канала); :class:`RobustParty` — simpy-процесс,
который связывает их с каналом.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Dict, Generator, List, Optional, Sequence, Tuple

from noisy_dialog.bits import Bits
from noisy_dialog.channel import Endpoint
from noisy_dialog.exchange import ExtendedSeed, pseudo_rand_exchange, randomness_exchange
from noisy_dialog.hashing.suite import HashSuite
from noisy_dialog.logger import get_logger
from noisy_dialog.memory import MegaState, MemoryStore, maintain_avmps, transition_candidates
from noisy_dialog.params import RunConfig
from noisy_dialog.protocol.dag import Party, ProtocolDag
from noisy_dialog.protocol.simulate import TranscriptChunk, simulate_rounds
from noisy_dialog.rounds import LISTEN, TRANSMIT_ZERO, RoundAction

logger = get_logger(__name__)

FIELDS: Tuple[str, ...] = (
    "k", "v", "b",
    "q1.v", "q1.b", "q1.depth",
    "q2.v", "q2.b", "q2.depth",
    "q3.v", "q3.b", "q3.depth",
)
STATE_FIELDS = ("k", "v", "b")

Hashes = Dict[str, Bits]
Candidates = Tuple[Optional[int], Optional[int], Optional[int]]


def verify_slot(offset: int, o2: int) -> Tuple[str, Party, int]:
    """(поле, кто передаёт, номер бита) для раунда offset сегмента проверки."""
    f_idx, within = divmod(offset, 2 * o2)
    sender = Party.A if within < o2 else Party.B
    return FIELDS[f_idx], sender, within % o2


# ---------------------------------------------------------------------------
#   Состояние и журналы
# ---------------------------------------------------------------------------
@dataclass(eq=False)
class PartyState:
    role: Party
    cur: MegaState
    store: MemoryStore
    rng: random.Random
    k: int = 0
    E: int = 0
    votes: List[int] = field(default_factory=lambda: [0, 0, 0])
    j: int = 0
    rew: bool = False
    T: List[TranscriptChunk] = field(default_factory=list)
    i_current: int = 0
    i_cnt: int = 0
    block: int = 0
    block_start_iter: int = 0
    block_seed: Optional[ExtendedSeed] = None
    r_iter: Optional[Bits] = None
    r_big: Tuple[Optional[Bits], Optional[Bits]] = (None, None)
    candidates: Candidates = (None, None, None)
    outgoing: Hashes = field(default_factory=dict)

    @classmethod
    def initial(cls, role: Party, dag: ProtocolDag, rng_seed: int) -> "PartyState":
        root = MegaState(v=dag.root, depth=0)
        return cls(role=role, cur=root, store=MemoryStore(root), rng=random.Random(rng_seed))

    def t_view(self, ms: MegaState) -> Tuple[TranscriptChunk, ...]:
        """T^{≤p}: пусто для мега-состояний из прошлых блоков."""
        if ms.iter <= self.block_start_iter:
            return ()
        return tuple(c for c in self.T if c.depth <= ms.depth)

    def candidate_states(self) -> Tuple[Optional[MegaState], ...]:
        return tuple(self.store.get(mp) for mp in self.candidates)

    def reset_counters(self) -> None:
        self.k = 0
        self.E = 0
        self.votes = [0, 0, 0]


@dataclass
class IterationRecord:
    """Что произошло у стороны за итерацию; читает «призрак»."""

    role: Party
    iteration: int
    block: int
    k_start: int
    depth_start: int
    candidates: Candidates
    cand_states: Tuple[Optional[MegaState], ...] = ()
    inputs: Hashes = field(default_factory=dict)
    own: Hashes = field(default_factory=dict)
    received: Hashes = field(default_factory=dict)
    r_iter: Bits = ()
    r_chunk: Bits = ()
    k_mismatch: bool = False
    votes_inc: Tuple[bool, bool, bool] = (False, False, False)
    simulated: bool = False
    chunk: Optional[TranscriptChunk] = None
    error_reset: bool = False
    votes_reset: bool = False
    jump: Optional[Tuple[int, int]] = None
    depth_end: int = 0


@dataclass
class BlockRecord:
    role: Party
    block: int
    r_big: Bits
    payloads: Dict[int, Bits]
    hashes: Dict[int, Bits]


@dataclass
class TransitionOutcome:
    error_reset: bool = False
    votes_reset: bool = False
    jump: Optional[Tuple[int, int]] = None


# ---------------------------------------------------------------------------
#   Чистые шаги алгоритма
# ---------------------------------------------------------------------------
def start_iteration(state: PartyState) -> None:
    state.i_current += 1
    state.i_cnt += 1
    state.k += 1
    state.j = state.k.bit_length() - 1
    state.candidates = transition_candidates(state.j, state.cur.depth)


def hash_inputs(state: PartyState, suite: HashSuite) -> Hashes:
    """Сериализованные входы всех 12 хешируемых полей."""
    cur = state.cur

    def b_tuple(ms: MegaState) -> Bits:
        return suite.encode_b_tuple(ms.prev_hash, ms.prev_seed, state.t_view(ms), ms.iter)

    inputs = {
        "k": suite.tagged(suite.encode_int(state.k)),
        "v": suite.tagged(suite.encode_int(cur.v)),
        "b": suite.tagged(b_tuple(cur)),
    }
    for i, q in enumerate(state.candidate_states(), start=1):
        inputs[f"q{i}.v"] = suite.tagged(None if q is None else suite.encode_int(q.v))
        inputs[f"q{i}.b"] = suite.tagged(None if q is None else b_tuple(q))
        inputs[f"q{i}.depth"] = suite.tagged(None if q is None else suite.encode_int(q.depth))
    return inputs


def apply_verification(
        state: PartyState,
        own: Hashes,
        received: Hashes,
        config: RunConfig,
) -> Tuple[bool, Tuple[bool, bool, bool]]:
    """
    E += 1 при расхождении H_k, иначе голосование за кандидатов.

    Кандидат i получает голос, если его хеши v и b совпали с хешами
    какого-то кандидата j′ собеседника; хеш глубины в буквальном режиме
    сравнивается с тем же индексом i, в согласованном — с j′.
    """
    if own["k"] != received["k"]:
        state.E += 1
        return True, (False, False, False)

    increments = [False, False, False]
    for i, q in enumerate(state.candidate_states(), start=1):
        if q is None:
            continue
        for jj in (1, 2, 3):
            depth_idx = i if config.vote_depth_match == "literal" else jj
            if (
                    own[f"q{i}.v"] == received[f"q{jj}.v"]
                    and own[f"q{i}.b"] == received[f"q{jj}.b"]
                    and own[f"q{i}.depth"] == received[f"q{depth_idx}.depth"]
            ):
                state.votes[i - 1] += 1
                increments[i - 1] = True
                break
    return False, tuple(increments)


def may_simulate(state: PartyState, own: Hashes, received: Hashes) -> bool:
    return (
            state.k == 1
            and state.E == 0
            and not state.rew
            and own["b"] == received["b"]
            and own["v"] == received["v"]
    )


def finish_simulation(state: PartyState, bits: Bits, v: int) -> TranscriptChunk:
    """Дописывает кусок в T, сдвигает текущее мега-состояние и сбрасывает счётчики."""
    depth = state.cur.depth + 1
    chunk = TranscriptChunk(bits=bits, iteration=state.i_current, depth=depth)
    state.T.append(chunk)
    state.cur = replace(state.cur, v=v, depth=depth, iter=state.i_current)
    maintain_avmps(state.cur, state.store, add=True)
    state.reset_counters()
    return chunk


def transition_phase(state: PartyState, config: RunConfig) -> TransitionOutcome:
    outcome = TransitionOutcome()
    if 2 * state.E >= state.k:
        outcome.error_reset = state.k > 0
        outcome.votes_reset = True
        state.reset_counters()
        if config.rew_reset_on_error and outcome.error_reset:
            state.rew = False
        return outcome

    if state.k == 2 ** (state.j + 1) - 1:
        if state.k > 1:
            threshold = config.vote_threshold * 2 ** state.j
            order = (3, 2, 1) if config.mp3_enabled else (2, 1)
            for i in order:
                target = state.candidates[i - 1]
                if state.votes[i - 1] >= threshold and target is not None and target in state.store:
                    outcome.jump = (state.cur.depth, target)
                    state.cur = state.store[target]
                    state.T = [c for c in state.T if c.depth <= target]
                    maintain_avmps(state.cur, state.store, add=False)
                    state.rew = False
                    # прыжок сбрасывает статус: k, E и голоса
                    state.reset_counters()
                    break
        state.votes = [0, 0, 0]
        outcome.votes_reset = True
    return outcome


def big_hash_update(state: PartyState, r_big: Bits, suite: HashSuite) -> BlockRecord:
    """Сцепляет хеши мега-состояний, созданных в этом блоке, и очищает T."""
    payloads: Dict[int, Bits] = {}
    hashes: Dict[int, Bits] = {}
    for ms in list(state.store):
        if ms.iter <= state.block_start_iter:
            continue
        payload = suite.encode_b_tuple(ms.prev_hash, ms.prev_seed, state.t_view(ms), ms.iter)
        digest = suite.big_hash_bits(payload, r_big)
        payloads[ms.depth] = payload
        hashes[ms.depth] = digest
        state.store.replace(replace(ms, prev_hash=digest, prev_seed=tuple(r_big)))
    state.cur = state.store[state.cur.depth]
    state.T = []
    return BlockRecord(state.role, state.block, tuple(r_big), payloads, hashes)


def verify_actions(own: Hashes, role: Party, o2: int) -> List[RoundAction]:
    actions: List[RoundAction] = []
    for name in FIELDS:
        mine = [RoundAction.transmit(b) for b in own[name]]
        if role is Party.A:
            actions.extend(mine)
            actions.extend([LISTEN] * o2)
        else:
            actions.extend([LISTEN] * o2)
            actions.extend(mine)
    return actions


def split_received(delivered: Sequence[Optional[int]], role: Party, o2: int) -> Hashes:
    offset = o2 if role is Party.A else 0
    received = {}
    for idx, name in enumerate(FIELDS):
        start = idx * 2 * o2 + offset
        received[name] = tuple(b or 0 for b in delivered[start:start + o2])
    return received


# ---------------------------------------------------------------------------
#   simpy-процесс
# ---------------------------------------------------------------------------
class RobustParty:
    """
    Одна сторона устойчивого протокола.

    ``rendezvous`` (необязательно) — точка встречи обеих сторон в конце
    итерации и блока; через неё симулятор обновляет «призрак» и метрики.
    """

    def __init__(
            self,
            role: Party,
            config: RunConfig,
            dag: ProtocolDag,
            link: Endpoint,
            *,
            suite: Optional[HashSuite] = None,
            rng_seed: int = 0,
            rendezvous=None,
    ):
        self.role = role
        self.config = config
        self.dag = dag
        self.link = link
        self.suite = suite or HashSuite(config)
        self.rendezvous = rendezvous
        self.state = PartyState.initial(role, dag, rng_seed)
        self.last_record: Optional[IterationRecord] = None
        self.last_block: Optional[BlockRecord] = None

    @property
    def now(self) -> float:
        return self.link.channel.env.now

    # ---- внешние циклы ----
    def run(self) -> Generator[object, object, PartyState]:
        for block in range(1, self.config.b_total + 1):
            yield from self.block_randomness(block)
            for _ in range(self.config.i_block):
                yield from self.iteration()
            yield from self.big_hash_phase(block)
        logger.info(
            f"[Party {self.role.value}] t={self.now}: finished at depth={self.state.cur.depth} "
            f"after {self.state.i_current} iterations"
        )
        return self.state

    def block_randomness(self, block: int):
        s = self.state
        s.block = block
        s.block_start_iter = s.i_current
        s.i_cnt = 0
        s.block_seed = yield from pseudo_rand_exchange(
            self.config.extender,
            self.role is Party.A,
            self.link,
            self.config.ecc_block_seed,
            s.rng,
            ("block_seed", block),
        )

    def iteration(self):
        s, cfg = self.state, self.config
        start_iteration(s)
        record = IterationRecord(
            role=self.role,
            iteration=s.i_current,
            block=s.block,
            k_start=s.k,
            depth_start=s.cur.depth,
            candidates=s.candidates,
            cand_states=s.candidate_states(),
        )
        s.r_iter = yield from randomness_exchange(
            cfg.outer.sd, self.role is Party.A, self.link, cfg.ecc_iter, s.rng, ("riter", s.i_current)
        )
        yield from self.verification_phase(record)
        yield from self.computation_phase(record)

        outcome = transition_phase(s, cfg)
        record.error_reset = outcome.error_reset
        record.votes_reset = record.simulated or outcome.votes_reset
        record.jump = outcome.jump
        record.depth_end = s.cur.depth
        if outcome.jump is not None:
            logger.debug(
                f"[Party {self.role.value}] t={self.now}: I={s.i_current} jump "
                f"{outcome.jump[0]} → {outcome.jump[1]}"
            )
        self.last_record = record
        if self.rendezvous is not None:
            yield self.rendezvous.arrive(self.role, ("iter", s.i_current), record)

    def verification_phase(self, record: IterationRecord):
        s, cfg = self.state, self.config
        r_chunk = s.block_seed.chunk(s.i_cnt - 1, cfg.inner.sd)
        inputs = hash_inputs(s, self.suite)
        own = {name: self.suite.small_hash(inputs[name], s.r_iter, r_chunk) for name in FIELDS}
        s.outgoing = own

        delivered = yield self.link.transfer(verify_actions(own, self.role, cfg.outer.o), ("verify", s.i_current))
        received = split_received(delivered, self.role, cfg.outer.o)
        mismatch, increments = apply_verification(s, own, received, cfg)

        record.inputs, record.own, record.received = inputs, own, received
        record.r_iter, record.r_chunk = s.r_iter, r_chunk
        record.k_mismatch, record.votes_inc = mismatch, increments

    def computation_phase(self, record: IterationRecord):
        s, cfg = self.state, self.config
        if may_simulate(s, record.own, record.received):
            coro = simulate_rounds(self.dag, s.cur.v, cfg.r, self.role)
            action = next(coro)
            rnd = 0
            while True:
                delivered = yield self.link.transfer([action], ("compute", s.i_current, rnd))
                rnd += 1
                try:
                    action = coro.send(delivered[0])
                except StopIteration as stop:
                    bits, v = stop.value
                    break
            record.chunk = finish_simulation(s, bits, v)
            record.simulated = True
            logger.debug(f"[Party {self.role.value}] t={self.now}: I={s.i_current} simulated depth={s.cur.depth}")
            return

        for rnd in range(cfg.r):
            yield self.link.transfer([TRANSMIT_ZERO], ("compute", s.i_current, rnd))
        s.rew = True
        logger.debug(
            f"[Party {self.role.value}] t={self.now}: I={s.i_current} dummy rounds "
            f"(k={s.k}, E={s.E}, votes={s.votes})"
        )

    def big_hash_phase(self, block: int):
        s, cfg = self.state, self.config
        half_1 = yield from randomness_exchange(
            cfg.big.o, self.role is Party.A, self.link, cfg.ecc_big_half, s.rng, ("big1", block)
        )
        half_2 = yield from randomness_exchange(
            cfg.big.o, self.role is Party.B, self.link, cfg.ecc_big_half, s.rng, ("big2", block)
        )
        s.r_big = (half_1, half_2)
        self.last_block = big_hash_update(s, half_1 + half_2, self.suite)
        if self.rendezvous is not None:
            yield self.rendezvous.arrive(self.role, ("block", block), self.last_block)


def run_party(
        config: RunConfig,
        dag: ProtocolDag,
        link: Endpoint,
        role: Party,
        **kwargs,
) -> Generator[object, object, PartyState]:
    """Полное расписание одной стороны; значение процесса — итоговый PartyState."""
    party = RobustParty(role, config, dag, link, **kwargs)
    return (yield from party.run())
