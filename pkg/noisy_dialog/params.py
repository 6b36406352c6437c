"""
Выбор параметров устойчивого протокола.

Все производные размеры (r, I_block, I_total, B_total, параметры трёх хеш-
семейств, размеры seed'ов и кодов, длины сегментов расписания) считаются
один раз и хранятся в неизменяемом :class:`RunConfig`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from noisy_dialog.config import RunSection
from noisy_dialog.ecc import EccConfig
from noisy_dialog.errors import ParameterError
from noisy_dialog.hashing.bias import BiasExtender
from noisy_dialog.hashing.pairwise import HashParams
from noisy_dialog.hashing.suite import INT_FIELD_BITS, T_COUNT_BITS
from noisy_dialog.logger import get_logger

logger = get_logger(__name__)

MIN_DEPTH = 16
N_FIELDS = 12  # 3 переменные + 3 кандидата × 3 поля


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    # ---- входные ----
    epsilon: float
    depth: int  # d исходного Π
    states: int  # s
    seed: int = 0

    # ---- производные ----
    r_c: int
    r: int
    i_block: int
    i_total: int
    b_total: int
    iter_bits: int  # ширина номера итерации в сериализации

    # ---- константы ----
    c_i: float = 4.0
    c_hash: int = 12
    c_b: int = 4
    c_delta: int = 2
    vote_threshold: float = 0.4
    mp3_enabled: bool = True
    rew_reset_on_error: bool = False
    vote_depth_match: Literal["literal", "consistent"] = "literal"

    # ---- хеши, seed'ы, коды ----
    inner: HashParams  # h₁: t₁, o₁, sd₁
    outer: HashParams  # h₂: t₂ = o₁, o₂, sd₂
    big: HashParams  # h^b: t₃, o₃, sd₃
    extender: BiasExtender  # R_block^s
    ecc_iter: EccConfig  # R_iter
    ecc_block_seed: EccConfig  # короткий seed R_block^s
    ecc_big_half: EccConfig  # R^{b,1} и R^{b,2}

    # ------------------------------------------------------------------ #
    @property
    def padded_depth(self) -> int:
        return self.r * self.target_iterations

    @property
    def target_iterations(self) -> int:
        """⌈d/r⌉ — длина правильного пути, нужная для успеха."""
        return math.ceil(self.depth / self.r)

    @property
    def iterations_run(self) -> int:
        return self.b_total * self.i_block

    @property
    def verify_rounds(self) -> int:
        return N_FIELDS * 2 * self.outer.o

    @property
    def iteration_rounds(self) -> int:
        return self.ecc_iter.block_len + self.verify_rounds + self.r

    @property
    def block_rounds(self) -> int:
        return (
            self.ecc_block_seed.block_len
            + self.i_block * self.iteration_rounds
            + 2 * self.ecc_big_half.block_len
        )

    @property
    def total_rounds(self) -> int:
        return schedule_rounds(self)


def schedule_rounds(config: RunConfig) -> int:
    """Число раундов Π′ — чистая функция конфигурации."""
    return config.b_total * config.block_rounds


def _default_r_c(epsilon: Fraction) -> int:
    return max(2, math.ceil(math.log2(math.log2(1 / epsilon))))


def _ceil_sqrt(x: Fraction) -> int:
    r = math.isqrt(x.numerator // x.denominator)
    while r * r < x:
        r += 1
    return r


def b_tuple_bits(config_like: dict) -> int:
    """Максимальная длина сериализованного (prev_hash, prev_seed, T, iter)."""
    chunk = config_like["r"] + config_like["iter_bits"]
    return (
        (1 + config_like["o3"])
        + (1 + config_like["sd3"])
        + T_COUNT_BITS
        + config_like["i_block"] * chunk
        + config_like["iter_bits"]
    )


def derive_params(
        epsilon: float,
        depth: int,
        *,
        states: int = 4096,
        seed: int = 0,
        c_i: float = 4.0,
        c_hash: int = 12,
        c_b: int = 4,
        c_delta: int = 2,
        r_c: Optional[int] = None,
        vote_threshold: float = 0.4,
        mp3_enabled: bool = True,
        rew_reset_on_error: bool = False,
        vote_depth_match: Literal["literal", "consistent"] = "literal",
        riter_guard: Optional[int] = None,
) -> RunConfig:
    """
    Выбирает параметры по ε и d.

    :param riter_guard: защитный параметр кода для R_iter (по умолчанию I_block,
        как и у остальных обменов)
    :raises ParameterError: ε вне (0, 1/8), d < 16 или несогласованные размеры
    """
    eps = Fraction(str(epsilon))
    if not 0 < eps < Fraction(1, 8):
        raise ParameterError(f"epsilon must lie in (0, 1/8), got {epsilon}")
    if depth < MIN_DEPTH:
        raise ParameterError(f"depth must be >= {MIN_DEPTH}, got {depth}")
    if states < 2:
        raise ParameterError(f"states must be >= 2, got {states}")

    rc = r_c if r_c is not None else _default_r_c(eps)
    r = _ceil_sqrt(Fraction(rc) / eps)
    i_block = (depth - 1).bit_length()  # ⌈log₂ d⌉
    i_total = math.ceil(Fraction(depth, r)) + math.ceil(Fraction(str(c_i)) * eps * depth)
    b_total = math.ceil(Fraction(i_total, i_block))
    iter_bits = (b_total * i_block).bit_length()

    log_s = (states - 1).bit_length()
    o1 = 2 * math.ceil(math.log2(1 / eps))
    o3 = c_b * i_block
    sd3 = 2 * o3
    sizes = {"r": r, "iter_bits": iter_bits, "o3": o3, "sd3": sd3, "i_block": i_block}
    payload = b_tuple_bits(sizes)
    t1_formula = log_s + 2 * r * i_block + 2 * i_block ** 2 + 64
    # малый хеш видит ещё и бит-метку «есть/нет кандидата»
    t1 = max(t1_formula, payload + 1, INT_FIELD_BITS + 1)
    if t1 > t1_formula:
        logger.debug(f"[Params] t1 raised from {t1_formula} to {t1} to fit the largest payload")
    t3 = payload + 64

    inner = HashParams(t=t1, o=o1, sd=2 * o1)
    outer = HashParams(t=o1, o=c_hash, sd=2 * c_hash)
    big = HashParams(t=t3, o=o3, sd=sd3)
    extender = BiasExtender.for_target(inner.sd * i_block, 2.0 ** (-c_delta * i_block))

    cfg = RunConfig(
        epsilon=float(epsilon),
        depth=depth,
        states=states,
        seed=seed,
        r_c=rc,
        r=r,
        i_block=i_block,
        i_total=i_total,
        b_total=b_total,
        iter_bits=iter_bits,
        c_i=c_i,
        c_hash=c_hash,
        c_b=c_b,
        c_delta=c_delta,
        vote_threshold=vote_threshold,
        mp3_enabled=mp3_enabled,
        rew_reset_on_error=rew_reset_on_error,
        vote_depth_match=vote_depth_match,
        inner=inner,
        outer=outer,
        big=big,
        extender=extender,
        ecc_iter=EccConfig.for_message(outer.sd, riter_guard or i_block),
        ecc_block_seed=EccConfig.for_message(extender.seed_len, i_block),
        ecc_big_half=EccConfig.for_message(o3, i_block),
    )
    logger.debug(
        f"[Params] ε={epsilon} d={depth}: r_c={rc} r={r} I_block={i_block} "
        f"I_total={i_total} B_total={b_total} rounds={cfg.total_rounds}"
    )
    return cfg


def config_from_section(run: RunSection, **overrides) -> RunConfig:
    """RunConfig из секции ``run:`` YAML-конфига; overrides — флаги CLI."""
    values = run.model_dump()
    values.update({k: v for k, v in overrides.items() if v is not None})
    return derive_params(
        values["epsilon"],
        values["depth"],
        states=values["states"],
        seed=values["seed"],
        c_i=values["c_i"],
        c_hash=values["c_hash"],
        c_b=values["c_b"],
        c_delta=values["c_delta"],
        r_c=values["r_c"],
        vote_threshold=values["vote_threshold"],
        mp3_enabled=values["mp3_enabled"],
        rew_reset_on_error=values["rew_reset_on_error"],
        vote_depth_match=values["vote_depth_match"],
        riter_guard=values.get("riter_guard"),
    )
