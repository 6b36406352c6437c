"""
Pydantic-конфиг проекта: логирование, параметры запуска, противник,
константы анализа и вывод.
"""

import os
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field

SEED_ENV = "NOISY_DIALOG_SEED"

AdversaryName = Literal[
    "noise_free",
    "random_flip",
    "burst",
    "figure1_attack",
    "sneaky_attack",
    "greedy_desync",
]


# ---------- логирование ----------
class FileLogConfig(BaseModel):
    path: str = "logs/noisy_dialog.log"
    max_bytes: int = Field(10_485_760, alias="max_bytes")
    backup_count: int = 3
    level: str = "DEBUG"
    fmt: str = Field(
        "%(asctime)s [%(levelname)s] %(name)s (%(filename)s:%(lineno)d): %(message)s",
        alias="format",
    )


class ConsoleLogConfig(BaseModel):
    level: str = "INFO"
    fmt: str = Field("%(asctime)s [%(levelname)s] %(name)s: %(message)s", alias="format")


class LoggingConfig(BaseModel):
    file: FileLogConfig = FileLogConfig()
    console: ConsoleLogConfig = ConsoleLogConfig()
    date_format: str = "%Y-%m-%d %H:%M:%S"


# ---------- запуск (плоский key-value блок) ----------
class RunSection(BaseModel):
    epsilon: float = 0.01
    depth: int = 1024
    states: int = 4096
    c_i: float = 4.0  # запас итераций в I_total
    c_hash: int = 12  # o₂
    c_b: int = 4  # o₃ = c_b·⌈log₂ d⌉
    c_delta: int = 2  # δ = 2^{-c_delta·I_block}
    r_c: Optional[int] = None
    vote_threshold: float = 0.4
    mp3_enabled: bool = True
    rew_reset_on_error: bool = False
    vote_depth_match: Literal["literal", "consistent"] = "literal"
    riter_guard: Optional[int] = None  # None → I_block
    single_owner: Optional[Literal["A", "B"]] = None
    seed: int = 122


# ---------- противник ----------
class AdversarySection(BaseModel):
    name: AdversaryName = "noise_free"
    p: float = 0.01  # random_flip
    start: int = 0  # burst: первый раунд
    length: int = 0  # burst: число раундов
    # сценарные атаки (в итерациях)
    warmup: int = 24
    dive: int = 12
    small_dive: int = 2
    gap: int = 16
    repeats: int = 4
    scale: int = 3  # w для sneaky_attack


# ---------- константы анализа ----------
class GhostSection(BaseModel):
    enabled: bool = True
    c_star: int = 3
    c1: float = 1
    c2: float = 32
    c3: float = 64
    c4: float = 7000
    c5: float = 8000
    c6: float = 9000
    c_upper: float = 1000


# ---------- вывод ----------
class OutputConfig(BaseModel):
    path: Optional[str] = "results/trials"
    trace: bool = False
    ghost_trace: bool = False
    workers: int = 1


class Settings(BaseModel):
    logging: LoggingConfig = LoggingConfig()
    run: RunSection = RunSection()
    adversary: AdversarySection = AdversarySection()
    ghost: GhostSection = GhostSection()
    output: OutputConfig = OutputConfig()

    # загрузка из YAML
    @classmethod
    def load(cls, path: str | None = None) -> "Settings":
        yaml_path = path or os.getenv("CONFIG_PATH", "config/default.yaml")
        with open(yaml_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        settings = cls.model_validate(data)
        seed_override = os.getenv(SEED_ENV)
        if seed_override:
            settings.run.seed = int(seed_override)
        return settings
