import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisy_dialog.errors import DagFormatError, ParameterError
from noisy_dialog.protocol import (
    Party,
    build_random_dag,
    couple_lossless,
    drive_rounds,
    dump_dag,
    load_dag,
    noiseless_run,
    pad_dag,
    simulate_rounds,
)
from noisy_dialog.rounds import LISTEN, TRANSMIT_ZERO


def test_random_dag_is_deterministic_and_valid():
    a = build_random_dag(64, 256, rng_seed=3)
    b = build_random_dag(64, 256, rng_seed=3)
    assert a == b
    a.validate()
    assert a.state_count == 256
    assert a.depth == a.base_depth == 64


@given(depth=st.integers(1, 40), extra=st.integers(0, 200), seed=st.integers(0, 2 ** 32))
@settings(max_examples=50, deadline=None)
def test_random_dag_invariants(depth, extra, seed):
    dag = build_random_dag(depth, depth + 1 + extra, seed)
    dag.validate()
    assert dag.state_count <= depth + 1 + extra
    for v in range(dag.state_count):
        if dag.is_terminal(v):
            assert dag.depth_of[v] == depth
        elif dag.depth_of[v] % 4 == 0:
            assert dag.owner[v] is Party.A
        elif dag.depth_of[v] % 4 == 2:
            assert dag.owner[v] is Party.B


def test_single_owner():
    dag = build_random_dag(32, 100, rng_seed=1, single_owner=Party.B)
    assert all(dag.owner_of(v) is Party.B for v in range(dag.state_count) if not dag.is_terminal(v))


@pytest.mark.parametrize("depth, budget", [(0, 10), (10, 5)])
def test_bad_sizes(depth, budget):
    with pytest.raises(ParameterError):
        build_random_dag(depth, budget, 0)


def test_padding_adds_a_owned_zero_chain(small_dag):
    padded = pad_dag(small_dag, 13)
    padded.validate()
    assert padded.depth == 65
    assert padded.base_depth == 64
    tail = noiseless_run(padded)
    assert len(tail) == 65
    assert tail[:64] == noiseless_run(small_dag)
    assert tail[64] == 0
    # добивка не нужна, DAG не меняется
    assert pad_dag(small_dag, 16) is small_dag


def test_terminal_is_self_loop_spoken_by_a(small_dag):
    terminal = next(v for v in range(small_dag.state_count) if small_dag.is_terminal(v))
    assert small_dag.owner_of(terminal) is Party.A
    assert small_dag.transition_bit(terminal) == 0
    assert small_dag.step(terminal, 1) == terminal

    coro = simulate_rounds(small_dag, terminal, 3, Party.B)
    assert next(coro) == LISTEN
    bits, v = drive_rounds(small_dag, terminal, 3, Party.A, lambda action: None)
    assert bits == (0, 0, 0) and v == terminal
    assert TRANSMIT_ZERO.transmits


def test_lossless_coupling_matches_noiseless_run(padded_dag):
    r = 16
    (bits_a, v_a), (bits_b, v_b) = couple_lossless(padded_dag, padded_dag.root, r)
    assert bits_a == bits_b == noiseless_run(padded_dag)[:r]
    assert v_a == v_b
    assert padded_dag.depth_of[v_a] == r


@given(depth=st.integers(1, 48), extra=st.integers(0, 120), seed=st.integers(0, 2 ** 32))
@settings(max_examples=120, deadline=None)
def test_lossless_coupling_whole_protocol(depth, extra, seed):
    dag = build_random_dag(depth, depth + 1 + extra, seed)
    (bits_a, v_a), (bits_b, v_b) = couple_lossless(dag, dag.root, depth)
    assert bits_a == bits_b == noiseless_run(dag)
    assert v_a == v_b and dag.is_terminal(v_a)


@given(depth=st.integers(1, 48), r=st.integers(1, 16), seed=st.integers(0, 2 ** 32))
@settings(max_examples=120, deadline=None)
def test_lossless_coupling_in_chunks(depth, r, seed):
    dag = pad_dag(build_random_dag(depth, 2 * depth + 8, seed), r)
    v, bits, prev_depth = dag.root, (), 0
    for _ in range(dag.depth // r):
        (chunk_a, v_a), (chunk_b, v_b) = couple_lossless(dag, v, r)
        assert chunk_a == chunk_b and v_a == v_b
        assert dag.depth_of[v_a] == prev_depth + r
        prev_depth = dag.depth_of[v_a]
        v, bits = v_a, bits + chunk_a
    assert dag.is_terminal(v)
    assert bits == noiseless_run(dag)


def test_dump_and_load(tmp_path, small_dag):
    path = tmp_path / "dag.txt"
    dump_dag(small_dag, path)
    assert load_dag(path) == small_dag


@pytest.mark.parametrize("text", [
    "",
    "d=2 s=2 root=0\n0 A 0 1 1 0\n",
    "d=1 s=2 root=0\n0 A 0 1 - 0\n1 A 1 - - 0\n",
    "d=1 s=2 root=0\n0 A 0 1 1 2\n1 A 1 - - 0\n",
    "depth=1\n",
])
def test_load_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(DagFormatError):
        load_dag(path)
