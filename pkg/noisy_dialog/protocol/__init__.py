from noisy_dialog.protocol.dag import (
    Party,
    ProtocolDag,
    build_random_dag,
    dump_dag,
    load_dag,
    noiseless_run,
    pad_dag,
)
from noisy_dialog.protocol.simulate import TranscriptChunk, couple_lossless, drive_rounds, simulate_rounds

__all__ = [
    "Party",
    "ProtocolDag",
    "TranscriptChunk",
    "build_random_dag",
    "couple_lossless",
    "drive_rounds",
    "dump_dag",
    "load_dag",
    "noiseless_run",
    "pad_dag",
    "simulate_rounds",
]
