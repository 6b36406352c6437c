import hypothesis.strategies as st
import pytest
from hypothesis import given, settings
from hypothesis.stateful import RuleBasedStateMachine, initialize, invariant, precondition, rule

from noisy_dialog.errors import ParameterError
from noisy_dialog.memory import (
    MegaState,
    MemoryStore,
    floor_mult,
    j_stable,
    maintain_avmps,
    memory_bound,
    mp_set,
    transition_candidates,
)
from noisy_dialog.selftest import check_common_point, check_membership, check_walks


def test_floor_mult():
    assert floor_mult(13, 4) == 12
    assert floor_mult(12, 4) == 12
    with pytest.raises(ParameterError):
        floor_mult(3, 0)


@pytest.mark.parametrize("a, expected", [
    (0, set()),
    (1, {0}),
    (5, {0, 2, 4}),
    (13, {0, 8, 10, 12}),
    (16, {0, 8, 12, 14, 15}),
])
def test_mp_set_examples(a, expected):
    assert mp_set(a) == expected


def test_j_stable():
    assert j_stable(12) == 2
    assert j_stable(7) == 0
    assert j_stable(0) > 64


def test_transition_candidates():
    assert transition_candidates(2, 13) == (0, 8, 12)
    assert transition_candidates(0, 13) == (10, 12, 12)
    assert transition_candidates(3, 5) == (None, None, 0)
    assert transition_candidates(4, 5) == (None, None, 0)


@given(a=st.integers(0, 5000))
@settings(max_examples=200)
def test_mp_set_is_logarithmic_and_below_a(a):
    points = mp_set(a)
    assert all(0 <= p < a for p in points)
    assert len(points) <= memory_bound(a)


def test_megastate_pairs_prev_fields():
    with pytest.raises(ParameterError):
        MegaState(v=0, depth=0, prev_hash=(1,), prev_seed=None)


def test_maintain_drops_points_outside_mp_set():
    store = MemoryStore(MegaState(v=0, depth=0))
    for depth in range(1, 17):
        maintain_avmps(MegaState(v=depth, depth=depth), store, add=True)
    assert set(store.points) == mp_set(16) | {16}
    maintain_avmps(store[8], store, add=False)
    assert set(store.points) == {0, 8}
    with pytest.raises(ParameterError):
        maintain_avmps(MegaState(v=99, depth=9), store, add=False)
    with pytest.raises(KeyError):
        store.replace(MegaState(v=1, depth=3))


def test_exhaustive_point_properties_small():
    assert check_membership(max_point=256, max_depth=1024) == 0
    assert check_common_point(max_depth=256, max_scale=6) == 0


def test_random_walks_forget_and_jump_correctly():
    report = check_walks(n_walks=40, steps=200, seed=3)
    assert report == {"forgetting": 0, "jump_discipline": 0, "memory_bound": 0}


class MemoryWalk(RuleBasedStateMachine):
    """Шаги вперёд и прыжки в сохранённые точки; память сверяется с оракулом."""

    @initialize()
    def setup(self):
        self.store = MemoryStore(MegaState(v=0, depth=0))
        self.depth = 0
        self.peak_since = {0: 0}

    def _track(self):
        self.peak_since[self.depth] = self.depth
        for p in list(self.peak_since):
            peak = max(self.peak_since[p], self.depth)
            if p > self.depth or (p and peak >= p + 2 ** (j_stable(p) + 1)):
                del self.peak_since[p]
            else:
                self.peak_since[p] = peak

    @rule(steps=st.integers(1, 8))
    def advance(self, steps):
        for _ in range(steps):
            self.depth += 1
            maintain_avmps(MegaState(v=self.depth, depth=self.depth), self.store, add=True)
            self._track()

    @precondition(lambda self: self.depth > 0)
    @rule(data=st.data())
    def jump(self, data):
        target = data.draw(st.sampled_from([p for p in self.store.points if p < self.depth]))
        self.depth = target
        maintain_avmps(self.store[target], self.store, add=False)
        self._track()

    @invariant()
    def memory_matches_forgetting_rule(self):
        assert set(self.store.points) == set(self.peak_since)

    @invariant()
    def memory_is_small(self):
        assert self.depth in self.store
        assert len(self.store) <= memory_bound(self.depth)


MemoryWalk.TestCase.settings = settings(max_examples=50, stateful_step_count=60, deadline=None)
TestMemoryWalk = MemoryWalk.TestCase
