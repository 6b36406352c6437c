"""
Серии испытаний: параллельный прогон, агрегаты, развёртки по ε и
парные эксперименты с атаками (MP3 включён/выключен).

Испытания независимы; seed испытания i равен run.seed + i, поэтому
повторный прогон даёт те же строки CSV независимо от числа воркеров.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from noisy_dialog.adversaries import build_adversary
from noisy_dialog.config import Settings
from noisy_dialog.ghost import check_constants
from noisy_dialog.logger import get_logger
from noisy_dialog.metrics import TrialResult
from noisy_dialog.params import RunConfig, config_from_section
from noisy_dialog.simulator import run_trial

logger = get_logger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = [c for c in TrialResult.columns() if c != "wall_time"]


def validate(settings: Settings) -> RunConfig:
    """Все ошибки конфигурации — до первого испытания."""
    config = config_from_section(settings.run)
    check_constants(settings.ghost)
    build_adversary(settings.adversary)
    return config


def ecc_rounds(config: RunConfig) -> int:
    """Раунды, потраченные на обмен случайностью (кодовые слова)."""
    per_block = (
            config.ecc_block_seed.block_len
            + config.i_block * config.ecc_iter.block_len
            + 2 * config.ecc_big_half.block_len
    )
    return config.b_total * per_block


def aggregate(results: Sequence[TrialResult], settings: Settings, config: RunConfig) -> Dict:
    peaks = [max(r.peak_memory_bits_A, r.peak_memory_bits_B) for r in results]
    return {
        "v": SCHEMA_VERSION,
        "trials": len(results),
        "epsilon": config.epsilon,
        "depth": config.depth,
        "states": config.states,
        "adversary": settings.adversary.name,
        "mp3_enabled": config.mp3_enabled,
        "seed_base": settings.run.seed,
        "total_rounds": config.total_rounds,
        "success_rate": float(np.mean([r.success for r in results])) if results else 0.0,
        "mean_overhead": float(np.mean([r.overhead for r in results])) if results else 0.0,
        "overhead_without_ecc": (config.total_rounds - ecc_rounds(config)) / config.depth - 1,
        "p95_memory_bits": float(np.percentile(peaks, 95)) if peaks else 0.0,
        "mean_budget_spent": float(np.mean([r.budget_spent for r in results])) if results else 0.0,
        "mean_max_rewind": float(np.mean([r.max_rewind for r in results])) if results else 0.0,
        "near_zero_rewinds": int(sum(r.near_zero_rewinds for r in results)),
        "mean_dummy_iterations": (
            float(np.mean([r.dummy_iterations_A + r.dummy_iterations_B for r in results])) / 2 if results else 0.0
        ),
        "violations": {
            "bvc": int(sum(r.bvc_violations for r in results)),
            "progress": int(sum(r.progress_violations for r in results)),
            "block": int(sum(r.block_violations for r in results)),
            "upper": int(sum(r.upper_violations for r in results)),
            "budget": int(sum(r.budget_violations for r in results)),
        },
        "wall_time": float(sum(r.wall_time for r in results)),
    }


def write_results(results: Sequence[TrialResult], summary: Dict, prefix: str | Path) -> Tuple[Path, Path]:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for r in results:
            writer.writerow(r.as_row())
    with open(json_path, "w", encoding="utf-8") as out:
        json.dump(summary, out, indent=2, ensure_ascii=False)
    logger.info(f"[Harness] {len(results)} trials exported to {csv_path} and {json_path}")
    return csv_path, json_path


def run_trials(
        settings: Settings,
        n_trials: int,
        *,
        workers: int = 1,
        out: Optional[str | Path] = None,
) -> Tuple[List[TrialResult], Dict]:
    config = validate(settings)
    logger.info(
        f"[Harness] {n_trials} trials: ε={config.epsilon} d={config.depth} "
        f"adversary={settings.adversary.name} workers={workers}"
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, repeat(settings), range(n_trials)))
    else:
        results = [run_trial(settings, i) for i in range(n_trials)]

    summary = aggregate(results, settings, config)
    if out:
        write_results(results, summary, out)
    return results, summary


def sweep(
        settings: Settings,
        epsilons: Sequence[float],
        n_trials: int,
        *,
        workers: int = 1,
        out: Optional[str | Path] = None,
) -> List[Dict]:
    """По строке агрегата на каждое ε."""
    rows = []
    for eps in epsilons:
        variant = settings.model_copy(deep=True)
        variant.run.epsilon = eps
        _, summary = run_trials(variant, n_trials, workers=workers)
        rows.append(summary)
    if out:
        path = Path(out).with_suffix(".json")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"v": SCHEMA_VERSION, "rows": rows}, f, indent=2, ensure_ascii=False)
        logger.info(f"[Harness] sweep over {len(rows)} ε values exported to {path}")
    return rows


def sign_test(pairs: Sequence[Tuple[float, float]]) -> float:
    """Односторонний критерий знаков: p-value гипотезы «первый не больше второго»."""
    plus = sum(a > b for a, b in pairs)
    minus = sum(a < b for a, b in pairs)
    n = plus + minus
    if n == 0:
        return 1.0
    return sum(math.comb(n, i) for i in range(plus, n + 1)) / 2 ** n


def attack_experiment(
        settings: Settings,
        attack: str,
        n_trials: int,
        *,
        workers: int = 1,
        out: Optional[str | Path] = None,
) -> Dict:
    """Парные прогоны с одинаковыми seed'ами при mp3_enabled = on/off."""
    arms: Dict[str, List[TrialResult]] = {}
    for arm, enabled in (("mp3_on", True), ("mp3_off", False)):
        variant = settings.model_copy(deep=True)
        variant.adversary.name = attack
        variant.run.mp3_enabled = enabled
        arm_out = None if out is None else Path(out).with_name(f"{Path(out).name}_{arm}")
        arms[arm], _ = run_trials(variant, n_trials, workers=workers, out=arm_out)

    report: Dict = {"v": SCHEMA_VERSION, "attack": attack, "trials": n_trials}
    for arm, results in arms.items():
        report[arm] = {
            "success_rate": float(np.mean([r.success for r in results])),
            "mean_rewind": float(np.mean([r.mean_rewind for r in results])),
            "max_rewind": int(max((r.max_rewind for r in results), default=0)),
            "near_zero_rewinds": int(sum(r.near_zero_rewinds for r in results)),
            "mean_dummy_iterations": float(np.mean([r.dummy_iterations_A + r.dummy_iterations_B for r in results])) / 2,
            "sneaky_windows": int(sum(r.sneaky_windows for r in results)),
        }
    pairs = [(off.max_rewind, on.max_rewind) for on, off in zip(arms["mp3_on"], arms["mp3_off"])]
    report["sign_test_p"] = sign_test(pairs)
    logger.info(
        f"[Harness] {attack}: success on={report['mp3_on']['success_rate']:.2f} "
        f"off={report['mp3_off']['success_rate']:.2f} sign-test p={report['sign_test_p']:.4f}"
    )
    if out:
        path = Path(out).with_suffix(".json")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, ensure_ascii=False)
    return report
