"""Problem-instance data model and per-link latency / energy formulas.

All data sizes are in bits, clock speeds in Hz (cycles/s), rates in bits/s,
energies in joules and powers in watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .crypto_cost import CipherOption, CycleCosts, catalog

BITS_PER_KB = 8192


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float, np.integer, np.floating)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class UserEquipment:
    clock_hz: float
    battery_joules: float
    compute_budget_cycles: float
    payload_bits: tuple[int, ...]

    def __post_init__(self):
        _positive("clock_hz", self.clock_hz)
        _positive("battery_joules", self.battery_joules)
        _positive("compute_budget_cycles", self.compute_budget_cycles)
        payload = tuple(int(p) for p in self.payload_bits)
        if any(p != q for p, q in zip(payload, self.payload_bits)) or any(p < 0 for p in payload):
            raise ValueError("payload_bits must be nonnegative integers")
        object.__setattr__(self, "payload_bits", payload)


@dataclass(frozen=True)
class RadioUnit:
    clock_hz: float
    security_requirement_bits: float
    resource_blocks: int

    def __post_init__(self):
        _positive("clock_hz", self.clock_hz)
        w = self.security_requirement_bits
        if not (math.isfinite(w) and w >= 0):
            raise ValueError(f"security_requirement_bits must be >= 0, got {w!r}")
        if int(self.resource_blocks) != self.resource_blocks or self.resource_blocks < 1:
            raise ValueError(f"resource_blocks must be a positive integer, got {self.resource_blocks!r}")
        object.__setattr__(self, "resource_blocks", int(self.resource_blocks))


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable problem instance.

    ``rate_bps[i, j, t]`` is the data rate between UE ``i`` and O-RU ``j``
    at time step ``t``.
    """

    ues: tuple[UserEquipment, ...]
    orus: tuple[RadioUnit, ...]
    horizon: int
    rate_bps: np.ndarray
    e_cp_watts: float
    e_comm_watts: float
    cycle_costs: CycleCosts = field(default_factory=CycleCosts)

    def __post_init__(self):
        object.__setattr__(self, "ues", tuple(self.ues))
        object.__setattr__(self, "orus", tuple(self.orus))
        if not self.ues or not self.orus:
            raise ValueError("a scenario needs at least one UE and one O-RU")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        for i, ue in enumerate(self.ues):
            if len(ue.payload_bits) != self.horizon:
                raise ValueError(f"UE {i}: payload_bits has {len(ue.payload_bits)} steps, horizon is {self.horizon}")
        rate = np.array(self.rate_bps, dtype=float)
        expected = (len(self.ues), len(self.orus), self.horizon)
        if rate.shape != expected:
            raise ValueError(f"rate_bps has shape {rate.shape}, expected {expected}")
        if not np.all(np.isfinite(rate)) or np.any(rate <= 0):
            raise ValueError("rate_bps entries must be positive and finite")
        rate.setflags(write=False)
        object.__setattr__(self, "rate_bps", rate)
        _positive("e_cp_watts", self.e_cp_watts)
        _positive("e_comm_watts", self.e_comm_watts)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.ues == other.ues
            and self.orus == other.orus
            and self.horizon == other.horizon
            and np.array_equal(self.rate_bps, other.rate_bps)
            and self.e_cp_watts == other.e_cp_watts
            and self.e_comm_watts == other.e_comm_watts
            and self.cycle_costs == other.cycle_costs
        )

    __hash__ = object.__hash__

    @property
    def n_ues(self) -> int:
        return len(self.ues)

    @property
    def n_orus(self) -> int:
        return len(self.orus)

    @cached_property
    def catalog(self) -> tuple[CipherOption, ...]:
        return catalog(self.cycle_costs)

    @cached_property
    def tables(self) -> "CostTables":
        return CostTables.build(self)

    def with_orus(self, orus: Sequence[RadioUnit]) -> "Scenario":
        return Scenario(self.ues, tuple(orus), self.horizon, self.rate_bps,
                        self.e_cp_watts, self.e_comm_watts, self.cycle_costs)

    def with_ues(self, ues: Sequence[UserEquipment]) -> "Scenario":
        return Scenario(tuple(ues), self.orus, self.horizon, self.rate_bps,
                        self.e_cp_watts, self.e_comm_watts, self.cycle_costs)


# --- scalar per-link formulas -------------------------------------------------

def n_blocks(data_bits: int, option: CipherOption) -> int:
    return -(-int(data_bits) // option.block_bits)


def ciphertext_bits(plaintext_bits: int, option: CipherOption) -> int:
    """Size after zero-padding the plaintext to whole cipher blocks."""
    if plaintext_bits < 0:
        raise ValueError("plaintext_bits must be >= 0")
    return n_blocks(plaintext_bits, option) * option.block_bits


def comm_latency(ciphertext_bits: float, rate_bps: float) -> float:
    if not rate_bps > 0:
        raise ValueError(f"rate must be positive, got {rate_bps!r}")
    return ciphertext_bits / rate_bps


def enc_latency(plaintext_bits: int, option: CipherOption, ue_clock_hz: float) -> float:
    if not ue_clock_hz > 0:
        raise ValueError(f"UE clock must be positive, got {ue_clock_hz!r}")
    return option.enc_cycles_per_block * n_blocks(plaintext_bits, option) / ue_clock_hz


def dec_latency(ciphertext_bits: int, option: CipherOption, oru_clock_hz: float) -> float:
    if not oru_clock_hz > 0:
        raise ValueError(f"O-RU clock must be positive, got {oru_clock_hz!r}")
    if ciphertext_bits % option.block_bits:
        raise ValueError(f"ciphertext of {ciphertext_bits} bits is not aligned to {option.block_bits}-bit blocks")
    return option.dec_cycles_per_block * (ciphertext_bits // option.block_bits) / oru_clock_hz


def _check_indices(scenario: Scenario, i: int, j: int, g: int, t: int) -> None:
    for name, value, bound in (("ue", i, scenario.n_ues), ("oru", j, scenario.n_orus),
                               ("option", g, len(scenario.catalog)), ("step", t, scenario.horizon)):
        if not 0 <= value < bound:
            raise IndexError(f"{name} index {value} out of range [0, {bound})")


def latency_parts(scenario: Scenario, i: int, j: int, g: int, t: int) -> tuple[float, float, float]:
    """(encryption, communication, decryption) latency in seconds."""
    _check_indices(scenario, i, j, g, t)
    option = scenario.catalog[g]
    pt = scenario.ues[i].payload_bits[t]
    ct = ciphertext_bits(pt, option)
    return (
        enc_latency(pt, option, scenario.ues[i].clock_hz),
        comm_latency(ct, float(scenario.rate_bps[i, j, t])),
        dec_latency(ct, option, scenario.orus[j].clock_hz),
    )


def total_latency(scenario: Scenario, i: int, j: int, g: int, t: int) -> float:
    enc, comm, dec = latency_parts(scenario, i, j, g, t)
    return enc + comm + dec


def step_energy(scenario: Scenario, i: int, j: int, g: int, t: int) -> tuple[float, float]:
    """UE-side (compute_joules, comm_joules); decryption runs on the O-RU."""
    enc, comm, _ = latency_parts(scenario, i, j, g, t)
    return enc * scenario.e_cp_watts, comm * scenario.e_comm_watts


# --- vectorised tables ---------------------------------------------------------

@dataclass(frozen=True)
class CostTables:
    """Every per-(ue, step, oru, option) quantity, precomputed.

    Arrays indexed ``[i, t, j, g]`` unless noted otherwise.
    """

    latency: np.ndarray
    enc_latency: np.ndarray      # [i, t, g]
    comm_latency: np.ndarray
    dec_latency: np.ndarray
    compute_energy: np.ndarray   # [i, t, g]
    comm_energy: np.ndarray
    energy: np.ndarray
    security: np.ndarray         # [g]
    enc_cycles: np.ndarray       # [g], int64
    budget: np.ndarray           # [i] compute budget
    battery: np.ndarray          # [i]
    requirement: np.ndarray      # [j]
    capacity: np.ndarray         # [j], int64

    @classmethod
    def build(cls, scenario: Scenario) -> "CostTables":
        opts = scenario.catalog
        payload = np.array([ue.payload_bits for ue in scenario.ues], dtype=np.int64)        # [i, t]
        block = np.array([o.block_bits for o in opts], dtype=np.int64)                      # [g]
        blocks = -(-payload[:, :, None] // block[None, None, :])                             # [i, t, g]
        ct = blocks * block
        enc_c = np.array([o.enc_cycles_per_block for o in opts], dtype=np.int64)
        dec_c = np.array([o.dec_cycles_per_block for o in opts], dtype=np.int64)
        q = np.array([ue.clock_hz for ue in scenario.ues], dtype=float)
        p = np.array([ru.clock_hz for ru in scenario.orus], dtype=float)
        rate = np.transpose(scenario.rate_bps, (0, 2, 1))                                   # [i, t, j]

        enc = (enc_c * blocks) / q[:, None, None]
        comm = ct[:, :, None, :] / rate[:, :, :, None]
        dec = (dec_c * blocks)[:, :, None, :] / p[None, None, :, None]
        latency = enc[:, :, None, :] + comm + dec
        compute_e = enc * scenario.e_cp_watts
        comm_e = comm * scenario.e_comm_watts
        arrays = dict(
            latency=latency,
            enc_latency=enc,
            comm_latency=comm,
            dec_latency=dec,
            compute_energy=compute_e,
            comm_energy=comm_e,
            energy=compute_e[:, :, None, :] + comm_e,
            security=np.array([o.security_bits for o in opts]),
            enc_cycles=enc_c,
            budget=np.array([ue.compute_budget_cycles for ue in scenario.ues], dtype=float),
            battery=np.array([ue.battery_joules for ue in scenario.ues], dtype=float),
            requirement=np.array([ru.security_requirement_bits for ru in scenario.orus], dtype=float),
            capacity=np.array([ru.resource_blocks for ru in scenario.orus], dtype=np.int64),
        )
        for value in arrays.values():
            value.setflags(write=False)
        return cls(**arrays)
