# noisy_dialog/simulator.py

import random
import time
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, Optional, Tuple

import simpy

from noisy_dialog.adversaries import AdversaryStrategy, build_adversary
from noisy_dialog.channel import Budget, Channel
from noisy_dialog.config import Settings
from noisy_dialog.errors import ScheduleDesyncError
from noisy_dialog.ghost import GhostState, detect_sneaky_window
from noisy_dialog.hashing.suite import HashSuite
from noisy_dialog.logger import get_logger
from noisy_dialog.metrics import MetricsCollector, TrialResult, overhead, success_of
from noisy_dialog.params import RunConfig, config_from_section
from noisy_dialog.party import RobustParty
from noisy_dialog.protocol.dag import Party, ProtocolDag, build_random_dag, noiseless_run, pad_dag

logger = get_logger(__name__)


class Rendezvous:
    """
    Точка встречи двух сторон в нулевое время.

    Каждая сторона сдаёт метку и полезную нагрузку; когда пришли обе,
    вызывается ``on_complete(label, payloads)`` и обе продолжают работу.
    """

    def __init__(self, env: simpy.Environment, on_complete: Callable[[Hashable, Dict[Party, Any]], None]):
        self.env = env
        self.on_complete = on_complete
        self._arrived: Dict[Party, Tuple[Hashable, Any, simpy.Event]] = {}

    def arrive(self, role: Party, label: Hashable, payload: Any) -> simpy.Event:
        event = self.env.event()
        self._arrived[role] = (label, payload, event)
        if len(self._arrived) == 2:
            (label_a, pay_a, ev_a), (label_b, pay_b, ev_b) = self._arrived[Party.A], self._arrived[Party.B]
            self._arrived.clear()
            if label_a != label_b:
                raise ScheduleDesyncError(f"parties met at different points: {label_a} vs {label_b}")
            self.on_complete(label_a, {Party.A: pay_a, Party.B: pay_b})
            ev_a.succeed()
            ev_b.succeed()
        return event


class Simulator:
    """
    Фасад одного испытания: строит Π и его дополнение, канал с противником,
    обе стороны и «призрак», затем гонит DES до конца расписания.
    """

    def __init__(
            self,
            settings: Settings,
            *,
            trial: int = 0,
            config: Optional[RunConfig] = None,
            dag: Optional[ProtocolDag] = None,
            adversary: Optional[AdversaryStrategy] = None,
    ):
        self.cfg = settings
        self.trial = trial
        self.seed = settings.run.seed + trial
        self.env = simpy.Environment()

        # 1) Параметры
        self.config = config or config_from_section(settings.run, seed=self.seed)
        self.metrics = MetricsCollector(self.config)

        # 2) Протокол Π, дополненный до кратной r глубины
        owner = Party(settings.run.single_owner) if settings.run.single_owner else None
        base = dag or build_random_dag(self.config.depth, self.config.states, self.seed, single_owner=owner)
        self.dag = pad_dag(base, self.config.r)
        self.oracle = noiseless_run(self.dag)

        # 3) «Призрак»; без ghost.enabled он ведёт только пути сторон
        self.ghost = GhostState(settings.ghost, keep_trace=settings.output.ghost_trace, full=settings.ghost.enabled)

        # 4) Канал и противник
        self.adversary = adversary or build_adversary(settings.adversary, self.seed)
        self.budget = Budget.for_rounds(self.config.total_rounds, self.config.epsilon)
        self.channel = Channel(self.env, self.adversary, self.budget, trace=settings.output.trace)

        # 5) Стороны
        rng = random.Random(self.seed)
        suite = HashSuite(self.config)
        self.rendezvous = Rendezvous(self.env, self._on_rendezvous)
        self.parties: Dict[Party, RobustParty] = {
            role: RobustParty(
                role,
                self.config,
                self.dag,
                self.channel.endpoint(role),
                suite=suite,
                rng_seed=rng.getrandbits(64),
                rendezvous=self.rendezvous,
            )
            for role in (Party.A, Party.B)
        }
        self.adversary.bind(config=self.config, ghost=self.ghost, parties=self.parties)

    def _on_rendezvous(self, label: Hashable, payloads: Dict[Party, Any]) -> None:
        states = {role: p.state for role, p in self.parties.items()}
        if label[0] == "iter":
            self.ghost.update_after_iteration(payloads, states, self.budget.spent)
            for role, record in payloads.items():
                self.metrics.record_iteration(record)
                self.metrics.record_memory(role, states[role])
        elif label[0] == "block":
            self.ghost.update_after_block(payloads, states)
            for role, state in states.items():
                self.metrics.record_memory(role, state)

    def correct_path_bits(self) -> Tuple[int, ...]:
        chunks = self.ghost.paths[Party.A][:self.ghost.ell_plus]
        return tuple(bit for chunk in chunks for bit in chunk.bits)

    def run(self) -> TrialResult:
        logger.info(
            f"=== Trial {self.trial} start: ε={self.config.epsilon} d={self.config.depth} "
            f"rounds={self.config.total_rounds} adversary={self.adversary.name} ==="
        )
        started = time.perf_counter()
        for party in self.parties.values():
            self.env.process(party.run())
        self.env.run()
        wall = time.perf_counter() - started

        if self.channel.round != self.config.total_rounds:
            raise ScheduleDesyncError(
                f"ran {self.channel.round} rounds, schedule predicts {self.config.total_rounds}"
            )

        ghost = self.ghost
        windows = detect_sneaky_window(ghost) if ghost.full else []
        rewinds = ghost.rewind_stats()
        success = success_of(self.correct_path_bits(), self.oracle)
        result = TrialResult(
            trial=self.trial,
            seed=self.seed,
            success=success,
            total_rounds=self.channel.round,
            overhead=overhead(self.channel.round, self.config.depth),
            peak_memory_bits_A=self.metrics.peak_memory[Party.A],
            peak_memory_bits_B=self.metrics.peak_memory[Party.B],
            jumps=ghost.jumps,
            error_resets=ghost.error_resets,
            dangerous_iterations=ghost.dangerous_iterations,
            small_collisions=ghost.small_collisions,
            big_collisions=ghost.big_collisions,
            budget_spent=self.budget.spent,
            wall_time=wall,
            final_depth_A=ghost.ell[Party.A],
            final_depth_B=ghost.ell[Party.B],
            correct_length=ghost.ell_plus,
            corrupted_iterations=ghost.corrupted_iterations,
            corrupted_randomness=ghost.corrupted_randomness,
            budget_violations=self.budget.violations,
            bvc_violations=ghost.bvc_violations,
            progress_violations=ghost.progress_violations,
            block_violations=ghost.block_violations,
            upper_violations=ghost.upper_violations,
            max_rewind=rewinds["max_rewind"],
            mean_rewind=rewinds["mean_rewind"],
            near_zero_rewinds=rewinds["near_zero_rewinds"],
            sneaky_windows=len(windows),
            simulated_iterations_A=self.metrics.simulated[Party.A],
            simulated_iterations_B=self.metrics.simulated[Party.B],
            dummy_iterations_A=self.metrics.dummy[Party.A],
            dummy_iterations_B=self.metrics.dummy[Party.B],
        )
        level = logger.info if success else logger.warning
        level(
            f"[Simulator] trial {self.trial}: success={success} correct={ghost.ell_plus}/"
            f"{self.config.target_iterations} spent={self.budget.spent}/{self.budget.limit} wall={wall:.2f}s"
        )
        self._export_traces()
        return result

    def _export_traces(self) -> None:
        out = self.cfg.output
        if not out.path:
            return
        prefix = Path(out.path)
        if out.trace:
            self.channel.export_trace(prefix.with_name(f"{prefix.name}_trial{self.trial}_channel.csv"))
        if out.ghost_trace:
            self.ghost.export_trace(prefix.with_name(f"{prefix.name}_trial{self.trial}_ghost.csv"))


def run_trial(settings: Settings, trial: int = 0) -> TrialResult:
    """Точка входа для пула процессов: одно испытание с seed = run.seed + trial."""
    return Simulator(settings, trial=trial).run()
