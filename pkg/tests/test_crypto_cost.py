import math

import pytest
from hypothesis import given, strategies as st

from oransec.crypto_cost import (KEY_SIZES, MAX_SECURITY, AlgorithmId, CycleCosts, block_bits, catalog, dec_cycles,
                                 enc_cycles, option_by_key, rounds, security_level)

DES, AES, RSA = AlgorithmId.DES, AlgorithmId.AES, AlgorithmId.RSA


def reference_cycles(alg, key, costs=CycleCosts(), decrypt=False):
    """Straight-line recomputation of the per-block cycle model."""
    a, o, s, x = costs.n_and, costs.n_or, costs.n_shift, costs.n_xor
    if alg is DES:
        return 16 * s + 16 * (10 * s + 10 * x)
    if alg is AES:
        r = key // 32 + 6
        full = (644 * a + 500 * o + 224 * s) if decrypt else (184 * a + 136 * o + 352 * s)
        return 16 * x + (r - 1) * full + (16 * x + 12 * s + 12 * o)
    return key * key


def test_catalog_keys_and_order():
    assert [o.key_bits for o in catalog()] == [64, 128, 192, 256, 1024, 2048, 3072, 4096]


def test_des_entry():
    des = option_by_key(64)
    assert des.algorithm is DES and des.block_bits == 64 and des.name == "DES-64"


def test_rsa_entry():
    rsa = option_by_key(2048)
    assert rsa.block_bits == 2048 and rsa.rounds == 1


@pytest.mark.parametrize("alg,key,enc,dec", [
    (DES, 64, 656, 656),
    (AES, 128, 6168, 12432),
    (AES, 192, 7512, 15168),
    (AES, 256, 8856, 17904),
    (RSA, 1024, 1048576, 1048576),
    (RSA, 2048, 4194304, 4194304),
    (RSA, 3072, 9437184, 9437184),
    (RSA, 4096, 16777216, 16777216),
])
def test_cycle_table(alg, key, enc, dec):
    assert enc_cycles(alg, key) == enc == reference_cycles(alg, key)
    assert dec_cycles(alg, key) == dec == reference_cycles(alg, key, decrypt=True)


def test_aes_round_counts():
    assert [rounds(AES, k) for k in (128, 192, 256)] == [10, 12, 14]
    assert rounds(DES, 64) == 16 and rounds(RSA, 4096) == 1


def test_block_sizes():
    assert block_bits(DES, 64) == 64
    assert all(block_bits(AES, k) == 128 for k in KEY_SIZES[AES])
    assert all(block_bits(RSA, k) == k for k in KEY_SIZES[RSA])


@pytest.mark.parametrize("key,level", [(64, 6.0), (4096, 12.0)])
def test_security_level_powers_of_two(key, level):
    assert security_level(key) == level


def test_security_level_192():
    assert security_level(192) == pytest.approx(7.5849625007, abs=1e-9)
    assert MAX_SECURITY == 12.0


@pytest.mark.parametrize("alg,key", [(DES, 128), (AES, 64), (RSA, 512), (AES, 4096)])
def test_invalid_pairs_rejected(alg, key):
    with pytest.raises(ValueError):
        enc_cycles(alg, key)


def test_negative_costs_rejected():
    with pytest.raises(ValueError):
        CycleCosts(n_xor=-1)


def test_catalog_extremes_match_budget_range():
    cycles = [o.enc_cycles_per_block for o in catalog()]
    assert min(cycles) == 656 and max(cycles) == 16777216


def test_security_strictly_increasing():
    levels = [o.security_bits for o in catalog()]
    assert all(a < b for a, b in zip(levels, levels[1:]))


costs_strategy = st.builds(CycleCosts, st.integers(1, 20), st.integers(1, 20), st.integers(1, 20), st.integers(1, 20))


@given(costs_strategy)
def test_cycles_increase_with_key_within_algorithm(costs):
    for alg, keys in KEY_SIZES.items():
        enc = [enc_cycles(alg, k, costs) for k in keys]
        dec = [dec_cycles(alg, k, costs) for k in keys]
        assert all(a < b for a, b in zip(enc, enc[1:]))
        assert all(a < b for a, b in zip(dec, dec[1:]))


@given(costs_strategy)
def test_injected_costs_match_reference(costs):
    for option in catalog(costs):
        assert option.enc_cycles_per_block == reference_cycles(option.algorithm, option.key_bits, costs)
        assert option.dec_cycles_per_block == reference_cycles(option.algorithm, option.key_bits, costs, True)
        assert option.security_bits == math.log2(option.key_bits)
