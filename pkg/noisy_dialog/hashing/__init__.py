from noisy_dialog.hashing.bias import BiasExtender, extend_all, extend_bit, extend_range
from noisy_dialog.hashing.pairwise import HashParams, pairwise_hash
from noisy_dialog.hashing.suite import HashSuite, golden_vectors, verify_vectors

__all__ = [
    "BiasExtender",
    "HashParams",
    "HashSuite",
    "extend_all",
    "extend_bit",
    "extend_range",
    "golden_vectors",
    "pairwise_hash",
    "verify_vectors",
]
