# scripts/run_simulation.py

import argparse
import json
import random
import sys
from pathlib import Path

from noisy_dialog.bits import random_bits, to_hex
from noisy_dialog.config import Settings
from noisy_dialog.ecc import ecc_encode
from noisy_dialog.harness import attack_experiment, run_trials, sweep
from noisy_dialog.hashing.suite import golden_vectors, verify_vectors
from noisy_dialog.logger import get_logger, setup_logging
from noisy_dialog.params import config_from_section
from noisy_dialog.selftest import run_selftest

logger = get_logger(__name__)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-c", "--config",
        metavar="PATH",
        type=str,
        default=None,
        help="Путь до YAML-конфига (по умолчанию: CONFIG_PATH или config/default.yaml)"
    )
    parser.add_argument("--epsilon", type=float, default=None, help="Доля портящихся раундов ε")
    parser.add_argument("--depth", type=int, default=None, help="Глубина d протокола Π")
    parser.add_argument("--states", type=int, default=None, help="Число состояний s")
    parser.add_argument("--adversary", type=str, default=None, help="Стратегия противника")
    parser.add_argument("--trials", type=int, default=1, help="Число испытаний")
    parser.add_argument("--seed", type=int, default=None, help="Базовый seed (испытание i: seed + i)")
    parser.add_argument("--mp3", choices=["on", "off"], default=None, help="Третья точка встречи")
    parser.add_argument("--trace", action="store_true", help="CSV по раундам канала")
    parser.add_argument("--ghost-trace", action="store_true", help="CSV по итерациям «призрака»")
    parser.add_argument("--out", metavar="PATH", default=None, help="Префикс выходных файлов")
    parser.add_argument("--workers", type=int, default=None, help="Параллельных испытаний")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="Симуляция устойчивого к шуму интерактивного протокола"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    _common(sub.add_parser("run", help="Серия испытаний"))

    p_sweep = sub.add_parser("sweep", help="Развёртка по ε")
    _common(p_sweep)
    p_sweep.add_argument("--epsilons", type=float, nargs="+", default=[0.02, 0.01, 0.005, 0.002])

    p_attack = sub.add_parser("attack", help="Атака при MP3 включённой и выключенной")
    _common(p_attack)

    p_self = sub.add_parser("selftest", help="Переборные проверки свойств")
    _common(p_self)
    p_self.add_argument("--walks", type=int, default=1000)
    p_self.add_argument("--ecc-trials", type=int, default=10_000)
    p_self.add_argument("--hash-draws", type=int, default=100_000)

    p_vec = sub.add_parser("vectors", help="Эталонные векторы хеша и кода")
    _common(p_vec)
    p_vec.add_argument("--verify", metavar="PATH", default=None, help="Пересчитать существующий файл")
    return parser.parse_args(argv)


def load_settings(args) -> Settings:
    """YAML, затем флаги командной строки поверх него."""
    settings = Settings.load(path=args.config)
    run = settings.run
    for name in ("epsilon", "depth", "states", "seed"):
        value = getattr(args, name)
        if value is not None:
            setattr(run, name, value)
    if args.mp3 is not None:
        run.mp3_enabled = args.mp3 == "on"
    if args.adversary is not None:
        settings.adversary.name = args.adversary
    if args.trace:
        settings.output.trace = True
    if args.ghost_trace:
        settings.output.ghost_trace = True
    if args.out is not None:
        settings.output.path = args.out
    if args.workers is not None:
        settings.output.workers = args.workers
    return settings


def cmd_run(settings: Settings, args) -> int:
    _, summary = run_trials(
        settings, args.trials, workers=settings.output.workers, out=settings.output.path
    )
    print("\n=== Trials Summary ===")
    for k, v in summary.items():
        print(f"{k:20}: {v}")
    return 0


def cmd_sweep(settings: Settings, args) -> int:
    out = None if not settings.output.path else f"{settings.output.path}_sweep"
    rows = sweep(settings, args.epsilons, args.trials, workers=settings.output.workers, out=out)
    print(f"\n{'epsilon':>10} {'success':>8} {'overhead':>10} {'no_ecc':>10} {'p95_mem':>10}")
    for row in rows:
        print(
            f"{row['epsilon']:>10} {row['success_rate']:>8.2f} {row['mean_overhead']:>10.3f} "
            f"{row['overhead_without_ecc']:>10.3f} {row['p95_memory_bits']:>10.0f}"
        )
    return 0


def cmd_attack(settings: Settings, args) -> int:
    attack = args.adversary or settings.adversary.name
    if attack not in ("figure1_attack", "sneaky_attack"):
        raise ValueError(f"Unknown attack «{attack}»")
    out = None if not settings.output.path else f"{settings.output.path}_{attack}"
    report = attack_experiment(settings, attack, args.trials, workers=settings.output.workers, out=out)
    print(json.dumps(report, indent=2, ensure_ascii=False))
    return 0


def cmd_selftest(settings: Settings, args) -> int:
    report = run_selftest(
        epsilon=settings.run.epsilon,
        depth=settings.run.depth,
        walks=args.walks,
        ecc_trials=args.ecc_trials,
        hash_draws=args.hash_draws,
        seed=settings.run.seed,
    )
    print("\n=== Selftest ===")
    for k, v in report.items():
        print(f"{k:20}: {v}")
    return 1 if any(report.values()) else 0


def cmd_vectors(settings: Settings, args) -> int:
    if args.verify:
        mismatches = verify_vectors(args.verify)
        print(f"{mismatches} mismatching vector(s) in {args.verify}")
        return 1 if mismatches else 0

    config = config_from_section(settings.run)
    out_dir = Path(settings.output.path or "results").parent
    out_dir.mkdir(parents=True, exist_ok=True)
    hash_path = out_dir / "hash_vectors.txt"
    lines = golden_vectors([config.inner, config.outer, config.big], seed=settings.run.seed)
    hash_path.write_text("# t o sd input seed output\n" + "\n".join(lines) + "\n", encoding="utf-8")

    rng = random.Random(settings.run.seed)
    ecc_path = out_dir / "ecc_vectors.txt"
    ecc_lines = []
    for cfg in (config.ecc_iter, config.ecc_block_seed, config.ecc_big_half):
        msg = random_bits(rng, cfg.msg_len)
        ecc_lines.append(f"{cfg.msg_len} {cfg.guard} {to_hex(msg)} {to_hex(ecc_encode(msg, cfg))}")
    ecc_path.write_text("# msg_len guard message codeword\n" + "\n".join(ecc_lines) + "\n", encoding="utf-8")
    logger.info(f"Vectors written to {hash_path} and {ecc_path}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "attack": cmd_attack,
    "selftest": cmd_selftest,
    "vectors": cmd_vectors,
}


def main(argv=None):
    args = parse_args(argv)

    # Загрузка конфига и флагов
    settings = load_settings(args)

    setup_logging(settings)
    logger.info(f"Loaded settings, verb={args.verb}")

    return COMMANDS[args.verb](settings, args)


if __name__ == "__main__":
    sys.exit(main())
