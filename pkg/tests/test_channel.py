import csv
import random

import pytest
import simpy

from noisy_dialog.adversaries import AdversaryStrategy, BurstStrategy, NoiseFreeStrategy, RandomFlipStrategy
from noisy_dialog.channel import Budget, Channel, RoundContext, Verdict, deliver_round
from noisy_dialog.ecc import EccConfig
from noisy_dialog.errors import ParameterError, ScheduleDesyncError
from noisy_dialog.exchange import pseudo_rand_exchange, randomness_exchange
from noisy_dialog.hashing.bias import BiasExtender
from noisy_dialog.protocol.dag import Party
from noisy_dialog.rounds import LISTEN, RoundAction


class FixedVerdict(AdversaryStrategy):
    name = "fixed"

    def __init__(self, verdict: Verdict):
        super().__init__(0)
        self.verdict = verdict

    def decide(self, ctx, budget):
        return self.verdict


ONE, ZERO = RoundAction.transmit(1), RoundAction.transmit(0)


def test_one_speaker_is_heard():
    budget = Budget(total_rounds=10, limit=1)
    assert deliver_round(ONE, LISTEN, NoiseFreeStrategy(), budget) == (None, 1)
    assert deliver_round(LISTEN, ZERO, NoiseFreeStrategy(), budget) == (0, None)
    assert budget.spent == 0


def test_flip_costs_budget_and_is_suppressed_when_exhausted():
    budget = Budget(total_rounds=10, limit=1)
    flipper = FixedVerdict(Verdict(flip=True))
    assert deliver_round(ONE, LISTEN, flipper, budget) == (None, 0)
    assert budget.spent == 1 and budget.remaining == 0
    assert deliver_round(ONE, LISTEN, flipper, budget) == (None, 1)
    assert budget.spent == 1 and budget.violations == 1


def test_collision_and_silence():
    budget = Budget(total_rounds=10, limit=0)
    injector = FixedVerdict(Verdict(inject_a=1, inject_b=0))
    assert deliver_round(ONE, ZERO, injector, budget) == (None, None)
    assert deliver_round(LISTEN, LISTEN, injector, budget) == (1, 0)
    assert budget.spent == 0


def test_budget_for_rounds():
    budget = Budget.for_rounds(1000, 0.02)
    assert budget.limit == 20 and budget.remaining == 20


def test_eligible_rounds():
    ctx = RoundContext(0, None, 0, ONE, LISTEN)
    assert AdversaryStrategy.eligible(ctx)
    assert not AdversaryStrategy.eligible(RoundContext(0, None, 0, ONE, ONE))
    assert not AdversaryStrategy.eligible(RoundContext(0, None, 0, LISTEN, LISTEN))


def test_adversary_parameter_checks():
    with pytest.raises(ParameterError):
        RandomFlipStrategy(1.5)
    with pytest.raises(ParameterError):
        BurstStrategy(-1, 4)


def _run_segments(channel, segments_a, segments_b):
    got = {Party.A: [], Party.B: []}

    def proc(role, segments):
        for actions, label in segments:
            bits = yield channel.endpoint(role).transfer(actions, label)
            got[role].append(bits)

    channel.env.process(proc(Party.A, segments_a))
    channel.env.process(proc(Party.B, segments_b))
    channel.env.run()
    return got


def test_channel_lockstep_and_trace(tmp_path):
    env = simpy.Environment()
    channel = Channel(env, NoiseFreeStrategy(), Budget(total_rounds=5, limit=0), trace=True)
    got = _run_segments(
        channel,
        [([ONE, ZERO, LISTEN], "s1"), ([LISTEN, LISTEN], "s2")],
        [([LISTEN, LISTEN, ONE], "s1"), ([ZERO, LISTEN], "s2")],
    )
    assert got[Party.A] == [[None, None, 1], [0, 0]]
    assert got[Party.B] == [[1, 0, None], [None, 0]]
    assert env.now == 5 and channel.round == 5

    path = channel.export_trace(tmp_path / "channel.csv")
    with open(path, encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 5
    assert rows[0]["a_action"] == "T1" and rows[0]["delivered_b"] == "1"


def test_schedule_desync_is_detected():
    env = simpy.Environment()
    channel = Channel(env, NoiseFreeStrategy(), Budget(total_rounds=2, limit=0))
    with pytest.raises(ScheduleDesyncError):
        _run_segments(channel, [([ONE], "x")], [([LISTEN], "y")])


def test_randomness_exchange_survives_burst_within_radius():
    ecc = EccConfig.for_message(24, 3)
    env = simpy.Environment()
    channel = Channel(env, BurstStrategy(start=5, length=6), Budget(total_rounds=ecc.block_len, limit=6))
    out = {}

    def proc(role):
        out[role] = yield from randomness_exchange(
            24, role is Party.A, channel.endpoint(role), ecc, random.Random(1), "riter"
        )

    env.process(proc(Party.A))
    env.process(proc(Party.B))
    env.run()
    assert channel.budget.spent == 6
    assert out[Party.A] == out[Party.B]
    assert len(out[Party.A]) == 24


def test_pseudo_rand_exchange_shares_the_extension():
    extender = BiasExtender.for_target(48, 2.0 ** -6)
    ecc = EccConfig.for_message(extender.seed_len, 2)
    env = simpy.Environment()
    channel = Channel(env, NoiseFreeStrategy(), Budget(total_rounds=ecc.block_len, limit=0))
    out = {}

    def proc(role):
        out[role] = yield from pseudo_rand_exchange(
            extender, role is Party.A, channel.endpoint(role), ecc, random.Random(2), "block_seed"
        )

    env.process(proc(Party.A))
    env.process(proc(Party.B))
    env.run()
    assert out[Party.A] == out[Party.B]
    assert out[Party.A].chunk(2, 8) == out[Party.B].chunk(2, 8)
