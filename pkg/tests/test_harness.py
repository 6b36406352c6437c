import csv
import json

import pytest

from noisy_dialog.adversaries import BurstStrategy, RandomFlipStrategy
from noisy_dialog.adversaries.scripted import predicted_hashes
from noisy_dialog.ghost import detect_sneaky_window, windows_disjoint
from noisy_dialog.harness import CSV_COLUMNS, aggregate, attack_experiment, run_trials, sign_test, validate
from noisy_dialog.metrics import measure_memory_bits, overhead, success_of
from noisy_dialog.params import config_from_section
from noisy_dialog.party import PartyState
from noisy_dialog.protocol.dag import Party
from noisy_dialog.simulator import Simulator


def test_noise_free_trial_succeeds(settings):
    settings.output.ghost_trace = True
    sim = Simulator(settings)
    result = sim.run()
    config = sim.config

    assert result.success
    assert result.total_rounds == config.total_rounds
    assert result.budget_spent == 0
    assert result.overhead == pytest.approx(config.total_rounds / config.depth - 1)
    assert result.jumps == result.error_resets == 0
    assert result.dangerous_iterations == 0
    assert result.correct_length == result.final_depth_A == result.final_depth_B == config.iterations_run
    assert (result.bvc_violations, result.progress_violations, result.block_violations) == (0, 0, 0)
    assert result.upper_violations == 0
    assert result.peak_memory_bits_A > 0
    assert result.simulated_iterations_A == result.simulated_iterations_B == config.iterations_run
    assert result.dummy_iterations_A == result.dummy_iterations_B == 0

    trace = sim.ghost.export_trace(settings.output.path + "_ghost_check.csv")
    with open(trace, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert len(rows) == config.iterations_run + 1
    assert [int(r[1]) for r in rows[1:]] == list(range(1, config.iterations_run + 1))


def test_phi_grows_by_one_per_clean_iteration(settings):
    sim = Simulator(settings)
    sim.run()
    assert sim.ghost.phi == sim.config.iterations_run
    assert [snap.ell[Party.A] for snap in sim.ghost.history] == list(range(1, sim.config.iterations_run + 1))


def test_paths_only_ghost_still_decides_success(settings):
    settings.ghost.enabled = False
    sim = Simulator(settings)
    result = sim.run()
    assert result.success
    assert sim.ghost.history == [] and sim.ghost.phi == 0


def test_trials_are_reproducible(settings, tmp_path):
    settings.adversary.name = "random_flip"
    settings.adversary.p = 0.005
    first, summary = run_trials(settings, 2, out=tmp_path / "a")
    second, _ = run_trials(settings, 2, out=tmp_path / "b")

    assert [r.seed for r in first] == [11, 12]
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    for r in first:
        assert 0 < r.budget_spent <= int(settings.run.epsilon * r.total_rounds)
        assert r.budget_violations == 0

    with open(tmp_path / "a.json", encoding="utf-8") as f:
        stored = json.load(f)
    assert stored["v"] == 1 and stored["trials"] == 2
    assert stored["adversary"] == "random_flip"
    assert summary["success_rate"] == pytest.approx(sum(r.success for r in first) / 2)
    with open(tmp_path / "a.csv", encoding="utf-8") as f:
        assert next(csv.reader(f)) == CSV_COLUMNS
    assert "wall_time" not in CSV_COLUMNS


@pytest.mark.parametrize("name", ["burst", "greedy_desync", "figure1_attack", "sneaky_attack"])
def test_adversaries_keep_the_schedule(settings, name):
    settings.adversary.name = name
    settings.adversary.start = 500
    settings.adversary.length = 40
    settings.adversary.warmup = 2
    settings.adversary.dive = 3
    settings.adversary.small_dive = 1
    settings.adversary.gap = 1
    settings.adversary.repeats = 1
    settings.adversary.scale = 2
    result = Simulator(settings).run()
    assert result.total_rounds == config_from_section(settings.run).total_rounds
    assert result.budget_violations == 0
    assert result.budget_spent <= int(settings.run.epsilon * result.total_rounds)


def test_attack_experiment_pairs_arms(settings, tmp_path):
    settings.adversary.warmup = 2
    settings.adversary.dive = 3
    settings.adversary.small_dive = 1
    settings.adversary.gap = 1
    settings.adversary.repeats = 1
    report = attack_experiment(settings, "figure1_attack", 1, out=tmp_path / "attack")
    assert set(report) >= {"mp3_on", "mp3_off", "sign_test_p"}
    assert 0.0 <= report["sign_test_p"] <= 1.0
    assert (tmp_path / "attack_mp3_on.csv").exists()
    assert (tmp_path / "attack.json").exists()


def test_validate_rejects_bad_runs(settings):
    settings.run.epsilon = 0.2
    with pytest.raises(ValueError):
        validate(settings)


def test_aggregate_of_nothing(settings):
    summary = aggregate([], settings, validate(settings))
    assert summary["trials"] == 0 and summary["success_rate"] == 0.0
    assert summary["overhead_without_ecc"] < summary["total_rounds"] / summary["depth"] - 1


def test_sign_test():
    assert sign_test([(2, 1)] * 5) == pytest.approx(1 / 32)
    assert sign_test([(1, 1)] * 4) == 1.0
    assert sign_test([(1, 2)] * 3) == 1.0
    assert sign_test([(2, 1), (1, 2)]) == pytest.approx(0.75)


def test_metrics_helpers(small_config, small_dag):
    assert overhead(200, 100) == 1.0
    assert success_of((0, 1, 1, 0), (0, 1, 1))
    assert not success_of((0, 1), (0, 1, 1))
    assert not success_of((1, 1, 1), (0, 1, 1))

    state = PartyState.initial(Party.A, small_dag, rng_seed=0)
    base = measure_memory_bits(state, small_config)
    state.r_iter = (0,) * small_config.outer.sd
    assert measure_memory_bits(state, small_config) == base + small_config.outer.sd


# ---- устойчивость к шуму ----
def test_single_flipped_hash_bit_is_recovered(settings):
    """Один испорченный бит H_k: A уходит вперёд одна, обе откатываются в 0 и доигрывают."""
    config = config_from_section(settings.run, seed=settings.run.seed)
    verify_start = config.ecc_block_seed.block_len + 2 * config.iteration_rounds + config.ecc_iter.block_len
    sim = Simulator(settings, adversary=BurstStrategy(verify_start, 1))
    result = sim.run()

    assert result.budget_spent == 1
    assert result.success
    assert result.error_resets == 1
    assert result.jumps == 2
    assert {ev.role: (ev.source, ev.target) for ev in sim.ghost.rewinds} == {Party.A: (3, 0), Party.B: (2, 0)}
    assert len(sim.ghost.rewinds) == 2
    assert result.max_rewind == 3 and result.near_zero_rewinds == 0
    assert (result.simulated_iterations_A, result.dummy_iterations_A) == (config.iterations_run - 3, 3)
    assert (result.simulated_iterations_B, result.dummy_iterations_B) == (config.iterations_run - 4, 4)
    assert result.final_depth_A == result.final_depth_B == result.correct_length == 6


def test_random_flip_trials_spend_budget_and_succeed(settings, tmp_path):
    settings.run.c_i = 40.0
    settings.adversary.name = "random_flip"
    settings.adversary.p = 2e-4
    results, summary = run_trials(settings, 3, out=tmp_path / "flips")
    assert all(r.success for r in results)
    assert sum(r.budget_spent for r in results) > 0
    assert summary["success_rate"] == 1.0


def test_sneaky_attack_dives_and_rewinds(settings):
    settings.run.c_i = 40.0
    settings.adversary.name = "sneaky_attack"
    settings.adversary.warmup = 4
    settings.adversary.scale = 2
    settings.adversary.gap = 1
    settings.adversary.repeats = 1
    sim = Simulator(settings)
    result = sim.run()

    push = next(w for w in sim.adversary.windows if w.kind == "push")
    assert not push.skipped
    assert (push.first, push.last) == (5, 10)
    lead = max(snap.ell[Party.A] - snap.ell[Party.B] for snap in sim.ghost.history)
    assert lead >= 6
    assert result.budget_spent >= 6
    assert result.jumps >= 1
    assert result.max_rewind >= 6

    windows = detect_sneaky_window(sim.ghost)
    assert result.sneaky_windows == len(windows)
    assert windows_disjoint(windows)
    for w in windows:
        assert all(i < w.voting[0] for i in w.diving)


def test_scripted_adversary_predicts_outgoing_hashes(settings):
    """Хеши, пересчитанные по состоянию и переданным seed'ам, совпадают с отправленными."""
    checked = []

    class Checking(RandomFlipStrategy):
        def decide(self, ctx, budget):
            label = ctx.label
            if isinstance(label, tuple) and label[0] == "verify" and ctx.offset == 0:
                for party in self.parties.values():
                    checked.append(predicted_hashes(party) == party.state.outgoing)
            return super().decide(ctx, budget)

    sim = Simulator(settings, adversary=Checking(0.002, seed=5))
    sim.run()
    assert len(checked) == 2 * sim.config.iterations_run
    assert all(checked)


def test_attack_arms_share_seeds(settings, tmp_path):
    settings.adversary.warmup = 2
    settings.adversary.dive = 3
    settings.adversary.small_dive = 1
    settings.adversary.gap = 1
    settings.adversary.repeats = 1
    report = attack_experiment(settings, "figure1_attack", 2, out=tmp_path / "attack")

    rows = {}
    for arm in ("mp3_on", "mp3_off"):
        with open(tmp_path / f"attack_{arm}.csv", encoding="utf-8") as f:
            rows[arm] = list(csv.DictReader(f))
    assert [r["seed"] for r in rows["mp3_on"]] == [r["seed"] for r in rows["mp3_off"]] == ["11", "12"]
    for arm in ("mp3_on", "mp3_off"):
        assert all(int(r["budget_spent"]) > 0 for r in rows[arm])
    pairs = [(int(off["max_rewind"]), int(on["max_rewind"])) for on, off in zip(rows["mp3_on"], rows["mp3_off"])]
    assert report["sign_test_p"] == pytest.approx(sign_test(pairs))
