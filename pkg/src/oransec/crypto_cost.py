"""Cipher catalog and analytic per-block cost / security model.

Three algorithm families are modelled (DES, AES, RSA) with eight
(algorithm, key length) combinations in total. Costs are expressed in CPU
clock cycles per block and are derived from per-primitive cycle counts
(AND, OR, shift, XOR), so a different instruction set can be modelled by
passing a different :class:`CycleCosts`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "AlgorithmId",
    "CipherOption",
    "CycleCosts",
    "KEY_SIZES",
    "block_bits",
    "rounds",
    "enc_cycles",
    "dec_cycles",
    "security_level",
    "catalog",
]


class AlgorithmId(enum.IntEnum):
    DES = 1
    AES = 2
    RSA = 3


KEY_SIZES: dict[AlgorithmId, tuple[int, ...]] = {
    AlgorithmId.DES: (64,),
    AlgorithmId.AES: (128, 192, 256),
    AlgorithmId.RSA: (1024, 2048, 3072, 4096),
}


@dataclass(frozen=True)
class CycleCosts:
    """Clock cycles needed by one primitive operation (Intel x86 defaults)."""

    n_and: int = 1
    n_or: int = 1
    n_shift: int = 1
    n_xor: int = 3

    def __post_init__(self):
        for name in ("n_and", "n_or", "n_shift", "n_xor"):
            value = getattr(self, name)
            if int(value) != value or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class CipherOption:
    algorithm: AlgorithmId
    key_bits: int
    block_bits: int
    rounds: int
    enc_cycles_per_block: int
    dec_cycles_per_block: int
    security_bits: float

    @property
    def name(self) -> str:
        return f"{self.algorithm.name}-{self.key_bits}"


def _validate(algorithm: AlgorithmId, key_bits: int) -> AlgorithmId:
    try:
        algorithm = AlgorithmId(algorithm)
    except ValueError:
        raise ValueError(f"unknown algorithm {algorithm!r}") from None
    if key_bits not in KEY_SIZES[algorithm]:
        raise ValueError(
            f"key length {key_bits} is not valid for {algorithm.name}; "
            f"expected one of {KEY_SIZES[algorithm]}"
        )
    return algorithm


def block_bits(algorithm: AlgorithmId, key_bits: int) -> int:
    algorithm = _validate(algorithm, key_bits)
    if algorithm is AlgorithmId.DES:
        return 64
    if algorithm is AlgorithmId.AES:
        return 128
    return key_bits


def rounds(algorithm: AlgorithmId, key_bits: int) -> int:
    algorithm = _validate(algorithm, key_bits)
    if algorithm is AlgorithmId.DES:
        return 16
    if algorithm is AlgorithmId.AES:
        return key_bits // 32 + 6
    return 1


def _des_cycles(n_rounds: int, costs: CycleCosts) -> int:
    return 16 * costs.n_shift + n_rounds * (10 * costs.n_shift + 10 * costs.n_xor)


def _aes_cycles(n_rounds: int, costs: CycleCosts, decrypt: bool) -> int:
    # initial AddRoundKey + (R-1) full rounds + final round without MixColumns
    if decrypt:
        full_round = 644 * costs.n_and + 500 * costs.n_or + 224 * costs.n_shift
    else:
        full_round = 184 * costs.n_and + 136 * costs.n_or + 352 * costs.n_shift
    final_round = 16 * costs.n_xor + 12 * costs.n_shift + 12 * costs.n_or
    return 16 * costs.n_xor + (n_rounds - 1) * full_round + final_round


def enc_cycles(algorithm: AlgorithmId, key_bits: int, costs: CycleCosts = CycleCosts()) -> int:
    """Cycles needed to encrypt one block."""
    algorithm = _validate(algorithm, key_bits)
    if algorithm is AlgorithmId.DES:
        return _des_cycles(rounds(algorithm, key_bits), costs)
    if algorithm is AlgorithmId.AES:
        return _aes_cycles(rounds(algorithm, key_bits), costs, decrypt=False)
    return key_bits * key_bits


def dec_cycles(algorithm: AlgorithmId, key_bits: int, costs: CycleCosts = CycleCosts()) -> int:
    """Cycles needed to decrypt one block."""
    algorithm = _validate(algorithm, key_bits)
    if algorithm is AlgorithmId.AES:
        return _aes_cycles(rounds(algorithm, key_bits), costs, decrypt=True)
    return enc_cycles(algorithm, key_bits, costs)


def security_level(key_bits: float) -> float:
    """Brute-force security measure: log2 of the key length."""
    if key_bits < 1:
        raise ValueError(f"key length must be >= 1, got {key_bits}")
    return math.log2(key_bits)


def catalog(costs: CycleCosts = CycleCosts()) -> tuple[CipherOption, ...]:
    """All eight cipher options, ordered by key length.

    Key lengths never overlap between algorithms, so ``key_bits`` alone
    identifies an option.
    """
    options = []
    for algorithm in AlgorithmId:
        for key in KEY_SIZES[algorithm]:
            options.append(
                CipherOption(
                    algorithm=algorithm,
                    key_bits=key,
                    block_bits=block_bits(algorithm, key),
                    rounds=rounds(algorithm, key),
                    enc_cycles_per_block=enc_cycles(algorithm, key, costs),
                    dec_cycles_per_block=dec_cycles(algorithm, key, costs),
                    security_bits=security_level(key),
                )
            )
    options.sort(key=lambda o: o.key_bits)
    return tuple(options)


def option_by_key(key_bits: int, costs: CycleCosts = CycleCosts()) -> CipherOption:
    for option in catalog(costs):
        if option.key_bits == key_bits:
            return option
    raise ValueError(f"no catalog entry with key length {key_bits}")


SECURITY_LEVELS: tuple[float, ...] = tuple(o.security_bits for o in catalog())
MAX_SECURITY: float = max(SECURITY_LEVELS)
