import pytest
import simpy
from hypothesis import given, settings
from hypothesis import strategies as st

from noisy_dialog.adversaries import BurstStrategy, NoiseFreeStrategy
from noisy_dialog.channel import Budget, Channel
from noisy_dialog.memory import transition_candidates
from noisy_dialog.party import (
    FIELDS,
    PartyState,
    RobustParty,
    apply_verification,
    big_hash_update,
    finish_simulation,
    hash_inputs,
    may_simulate,
    split_received,
    start_iteration,
    transition_phase,
    verify_actions,
    verify_slot,
)
from noisy_dialog.protocol.dag import Party
from noisy_dialog.simulator import Rendezvous


def _walk(state, steps, r):
    for _ in range(steps):
        start_iteration(state)
        finish_simulation(state, (0,) * r, v=100 + state.cur.depth)


@pytest.fixture
def state(small_dag, small_config):
    s = PartyState.initial(Party.A, small_dag, rng_seed=1)
    _walk(s, 8, small_config.r)
    return s


# ---- расписание проверки ----
def test_verify_slot_layout():
    assert verify_slot(0, 12) == ("k", Party.A, 0)
    assert verify_slot(12, 12) == ("k", Party.B, 0)
    assert verify_slot(25, 12) == ("v", Party.A, 1)
    assert verify_slot(12 * 24 - 1, 12) == ("q3.depth", Party.B, 11)


def test_verify_actions_interleave_and_split():
    o2 = 3
    own_a = {name: (i % 2, 1, 0) for i, name in enumerate(FIELDS)}
    own_b = {name: (1, i % 2, 1) for i, name in enumerate(FIELDS)}
    acts_a = verify_actions(own_a, Party.A, o2)
    acts_b = verify_actions(own_b, Party.B, o2)
    assert len(acts_a) == len(acts_b) == len(FIELDS) * 2 * o2
    assert all(a.transmits != b.transmits for a, b in zip(acts_a, acts_b))

    heard_by_a = [b.bit if b.transmits else None for b in acts_b]
    heard_by_b = [a.bit if a.transmits else None for a in acts_a]
    assert split_received(heard_by_a, Party.A, o2) == own_b
    assert split_received(heard_by_b, Party.B, o2) == own_a


# ---- чистые шаги ----
def test_walk_builds_transcript_and_memory(state, small_config):
    assert state.cur.depth == 8
    assert [c.depth for c in state.T] == list(range(1, 9))
    assert state.store.points == [0, 4, 6, 7, 8]
    assert state.k == 0 and state.i_current == 8
    assert state.t_view(state.store[4]) == tuple(state.T[:4])
    assert state.t_view(state.store[0]) == ()


def test_start_iteration_picks_candidates(state):
    start_iteration(state)
    start_iteration(state)
    start_iteration(state)
    assert state.k == 3 and state.j == 1
    assert state.candidates == transition_candidates(1, 8) == (4, 6, 6)
    assert [q.depth for q in state.candidate_states()] == [4, 6, 6]


def test_hash_inputs_cover_all_fields(state, suite):
    start_iteration(state)
    inputs = hash_inputs(state, suite)
    assert set(inputs) == set(FIELDS)
    assert inputs["k"] == suite.tagged(suite.encode_int(1))
    state.candidates = (None, 6, 6)
    assert hash_inputs(state, suite)["q1.v"] == suite.tagged(None)


def _hashes(**overrides):
    base = {name: (0, 0) for name in FIELDS}
    base.update({k.replace("_", "."): v for k, v in overrides.items()})
    return base


def test_k_mismatch_counts_an_error(state, small_config):
    start_iteration(state)
    mismatch, inc = apply_verification(state, _hashes(k=(1, 0)), _hashes(k=(0, 1)), small_config)
    assert mismatch and inc == (False, False, False)
    assert state.E == 1 and state.votes == [0, 0, 0]


def test_votes_follow_depth_match_mode(state, small_config):
    for _ in range(3):
        start_iteration(state)
    own = _hashes(q1_v=(1, 0), q1_b=(1, 1), q1_depth=(0, 1))
    received = _hashes(q1_v=(1, 0), q1_b=(1, 1), q1_depth=(1, 1), q2_v=(1, 0), q2_b=(1, 1), q2_depth=(0, 1))

    _, literal = apply_verification(state, own, received, small_config)
    assert literal[0] is False

    consistent = small_config.model_copy(update={"vote_depth_match": "consistent"})
    state.votes = [0, 0, 0]
    _, inc = apply_verification(state, own, received, consistent)
    assert inc[0] is True and state.votes[0] == 1


def test_may_simulate(state):
    start_iteration(state)
    same = _hashes(v=(1, 1), b=(0, 1))
    assert may_simulate(state, same, dict(same))
    assert not may_simulate(state, same, _hashes(v=(1, 0), b=(0, 1)))
    state.rew = True
    assert not may_simulate(state, same, dict(same))


def test_error_reset(state, small_config):
    start_iteration(state)
    start_iteration(state)
    state.E = 1
    state.rew = True
    outcome = transition_phase(state, small_config)
    assert outcome.error_reset and outcome.votes_reset and outcome.jump is None
    assert (state.k, state.E, state.votes) == (0, 0, [0, 0, 0])
    assert state.rew

    state.rew = True
    start_iteration(state)
    state.E = 1
    transition_phase(state, small_config.model_copy(update={"rew_reset_on_error": True}))
    assert not state.rew


@pytest.mark.parametrize("votes, mp3, target", [
    ([2, 0, 0], True, 4),
    ([0, 2, 0], True, 6),
    ([2, 0, 2], True, 6),
    ([2, 0, 2], False, 4),
    ([0, 0, 0], True, None),
])
def test_transition_jumps_by_votes(state, small_config, votes, mp3, target):
    for _ in range(3):
        start_iteration(state)
    state.votes = list(votes)
    state.rew = True
    cfg = small_config.model_copy(update={"mp3_enabled": mp3})
    outcome = transition_phase(state, cfg)
    assert outcome.votes_reset and state.votes == [0, 0, 0]
    if target is None:
        assert outcome.jump is None and state.cur.depth == 8
        return
    assert outcome.jump == (8, target)
    assert state.cur.depth == target and not state.rew
    assert (state.k, state.E) == (0, 0)
    assert max(c.depth for c in state.T) == target
    assert state.store.points[-1] == target


def _voting_window(dag, depth, j, r):
    s = PartyState.initial(Party.A, dag, rng_seed=1)
    _walk(s, depth, r)
    for _ in range(2 ** (j + 1) - 1):
        start_iteration(s)
    return s


@given(
    depth=st.integers(1, 40),
    j=st.integers(1, 4),
    votes=st.lists(st.integers(0, 31), min_size=3, max_size=3),
)
@settings(max_examples=100, deadline=None)
def test_third_candidate_never_rewinds_deeper(small_dag, small_config, depth, j, votes):
    """С MP3 цель прыжка не глубже (по номеру не меньше), чем без него."""
    outcomes = {}
    for mp3 in (True, False):
        s = _voting_window(small_dag, depth, j, small_config.r)
        s.votes = [min(v, 2 ** j) for v in votes]
        s.rew = True
        outcome = transition_phase(s, small_config.model_copy(update={"mp3_enabled": mp3}))
        outcomes[mp3] = outcome.jump
        if outcome.jump is not None:
            assert outcome.jump[0] == depth and s.cur.depth == outcome.jump[1] <= depth
    if outcomes[False] is not None:
        assert outcomes[True] is not None
        assert outcomes[True][1] >= outcomes[False][1]


def test_big_hash_chains_states_of_the_block(state, suite, small_config):
    r_big = (1, 0) * small_config.big.o
    record = big_hash_update(state, r_big, suite)
    assert set(record.payloads) == {4, 6, 7, 8}
    assert state.T == []
    for depth in (4, 6, 7, 8):
        ms = state.store[depth]
        assert ms.prev_hash == record.hashes[depth] and ms.prev_seed == r_big
    assert state.store[0].prev_hash is None
    assert state.cur == state.store[8]


# ---- процесс стороны ----
def _pair(config, dag, adversary):
    env = simpy.Environment()
    channel = Channel(env, adversary, Budget.for_rounds(config.total_rounds, config.epsilon))
    records = {}
    rendezvous = Rendezvous(env, lambda label, payloads: records.setdefault(label, payloads))
    parties = {
        role: RobustParty(role, config, dag, channel.endpoint(role), rng_seed=seed, rendezvous=rendezvous)
        for role, seed in ((Party.A, 1), (Party.B, 2))
    }
    for party in parties.values():
        env.process(party.run())
    env.run()
    return channel, parties, records


def test_noise_free_parties_advance_every_iteration(small_config, padded_dag):
    channel, parties, records = _pair(small_config, padded_dag, NoiseFreeStrategy())
    assert channel.round == small_config.total_rounds
    a, b = parties[Party.A].state, parties[Party.B].state
    assert a.cur == b.cur
    assert a.cur.depth == small_config.iterations_run
    iterations = [payloads for label, payloads in records.items() if label[0] == "iter"]
    assert len(iterations) == small_config.iterations_run
    assert all(rec.simulated for payloads in iterations for rec in payloads.values())


def test_corrupted_k_hash_stops_the_listener(small_config, padded_dag):
    first_verify = small_config.ecc_block_seed.block_len + small_config.ecc_iter.block_len
    _, _, records = _pair(small_config, padded_dag, BurstStrategy(start=first_verify, length=1))
    first = records[("iter", 1)]
    assert first[Party.B].k_mismatch and not first[Party.B].simulated and first[Party.B].error_reset
    assert first[Party.A].simulated and not first[Party.A].k_mismatch
