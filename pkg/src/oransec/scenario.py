"""Seeded scenario generation and the on-disk scenario format.

Every random quantity is drawn from its own counter-based stream keyed by
``(seed, quantity, entity indices)``, so adding a UE or an O-RU never
changes the draws of the others and results are identical across
platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .crypto_cost import MAX_SECURITY, SECURITY_LEVELS, CycleCosts
from .system_model import BITS_PER_KB, RadioUnit, Scenario, UserEquipment

SCHEMA_VERSION = 1

_STREAMS = {
    "ue_clock": 1,
    "battery": 2,
    "budget": 3,
    "payload": 4,
    "oru_clock": 5,
    "security_req": 6,
    "rate": 7,
}


@dataclass(frozen=True)
class GenParams:
    """Ranges every generated quantity is drawn uniformly from.

    Defaults follow the desk-scale reproduction setup: 3 O-RUs, 4 UEs and 3
    steps. ``rate_range_bps`` defaults to 10-100 Mbit/s; see
    :func:`literal_unit_params` for the same setup with rates read as bit/s.
    """

    n_ues: int = 4
    n_orus: int = 3
    horizon: int = 3
    w_range: tuple[float, float] = (6.0, 12.0)
    snap_w: bool = True
    rate_range_bps: tuple[float, float] = (10e6, 100e6)
    payload_range_kb: tuple[float, float] = (50.0, 2e4)
    budget_range_cycles: tuple[float, float] = (656.0, 1.7e7)
    ue_clock_range_hz: tuple[float, float] = (1.8e9, 2.4e9)
    oru_clock_range_hz: tuple[float, float] = (3.5e9, 3.9e9)
    battery_range_j: tuple[float, float] = (460.0, 2e6)
    e_cp_watts: float = 4.0
    e_comm_watts: float = 7.0
    resource_blocks: int = 3
    seed: int = 0
    cycle_costs: CycleCosts = field(default_factory=CycleCosts)

    def __post_init__(self):
        for name in ("n_ues", "n_orus", "horizon", "resource_blocks"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("w_range", "rate_range_bps", "payload_range_kb", "budget_range_cycles",
                     "ue_clock_range_hz", "oru_clock_range_hz", "battery_range_j"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"{name} must be a finite interval with min <= max, got {(lo, hi)}")
            if name != "w_range" and lo <= 0 and name != "payload_range_kb":
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.payload_range_kb[0] < 0 or self.w_range[0] < 0:
            raise ValueError("payload and security requirement ranges must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.snap_w and not self.admissible_w():
            raise ValueError(f"no catalog security level lies in w_range {self.w_range}")

    def admissible_w(self) -> tuple[float, ...]:
        lo, hi = self.w_range
        return tuple(w for w in SECURITY_LEVELS if lo - 1e-12 <= w <= hi + 1e-12)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["cycle_costs"] = asdict(self.cycle_costs)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "GenParams":
        data = dict(data)
        if "cycle_costs" in data:
            data["cycle_costs"] = CycleCosts(**data["cycle_costs"])
        for key, value in list(data.items()):
            if isinstance(value, list):
                data[key] = tuple(value)
        return cls(**data)


def literal_unit_params(**overrides) -> GenParams:
    """Default setup with the rate range taken as 10-100 bit/s.

    With these rates the communication energy of a single step is orders of
    magnitude above the battery range, so generated instances are almost
    never feasible. Kept for reference and for the test that documents it.
    """
    return replace(GenParams(rate_range_bps=(10.0, 100.0)), **overrides)


RESOURCE_TIERS: dict[str, dict[str, tuple[float, float]]] = {
    "low": {"budget_range_cycles": (656.0, 6000.0), "battery_range_j": (460.0, 2000.0)},
    "medium": {"budget_range_cycles": (1e4, 4e6), "battery_range_j": (2e3, 2e4)},
    "high": {"budget_range_cycles": (1.7e7, 2e7), "battery_range_j": (1e5, 2e6)},
}


def tier_params(base: GenParams, tier: str) -> GenParams:
    if tier not in RESOURCE_TIERS:
        raise ValueError(f"unknown resource tier {tier!r}; expected one of {tuple(RESOURCE_TIERS)}")
    return replace(base, **RESOURCE_TIERS[tier])


def _stream(seed: int, name: str, *index: int) -> np.random.Generator:
    key = np.random.SeedSequence([seed, _STREAMS[name], *index])
    return np.random.Generator(np.random.Philox(key))


def snap_security(w: float, levels: tuple[float, ...]) -> float:
    return min(levels, key=lambda level: (abs(level - w), level))


def generate(params: GenParams) -> Scenario:
    seed = params.seed
    ues = []
    for i in range(params.n_ues):
        kb = _stream(seed, "payload", i).uniform(*params.payload_range_kb, size=params.horizon)
        ues.append(UserEquipment(
            clock_hz=float(_stream(seed, "ue_clock", i).uniform(*params.ue_clock_range_hz)),
            battery_joules=float(_stream(seed, "battery", i).uniform(*params.battery_range_j)),
            compute_budget_cycles=float(_stream(seed, "budget", i).uniform(*params.budget_range_cycles)),
            payload_bits=tuple(int(round(v * BITS_PER_KB)) for v in kb),
        ))
    levels = params.admissible_w()
    orus = []
    for j in range(params.n_orus):
        w = float(_stream(seed, "security_req", j).uniform(*params.w_range))
        orus.append(RadioUnit(
            clock_hz=float(_stream(seed, "oru_clock", j).uniform(*params.oru_clock_range_hz)),
            security_requirement_bits=snap_security(w, levels) if params.snap_w else w,
            resource_blocks=params.resource_blocks,
        ))
    rate = np.empty((params.n_ues, params.n_orus, params.horizon))
    for i in range(params.n_ues):
        for j in range(params.n_orus):
            rate[i, j] = _stream(seed, "rate", i, j).uniform(*params.rate_range_bps, size=params.horizon)
    return Scenario(tuple(ues), tuple(orus), params.horizon, rate,
                    params.e_cp_watts, params.e_comm_watts, params.cycle_costs)


def with_security_requirement(scenario: Scenario, w: float) -> Scenario:
    return scenario.with_orus([replace(ru, security_requirement_bits=float(w)) for ru in scenario.orus])


# --- file format -----------------------------------------------------------------

class ScenarioFormatError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


_UNITS = {
    "clock_hz": "Hz (cycles per second)",
    "battery_joules": "J",
    "compute_budget_cycles": "CPU cycles per cipher block",
    "payload_bits": "bits per time step (payload_kb accepted on load, 1 KB = 8192 bits)",
    "security_requirement_bits": "bits of brute-force security, log2(key length)",
    "resource_blocks": "count",
    "rate_bps": "bit/s, indexed [ue][oru][step]",
    "e_cp_watts": "W",
    "e_comm_watts": "W",
}


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "units": _UNITS,
        "horizon": scenario.horizon,
        "e_cp_watts": scenario.e_cp_watts,
        "e_comm_watts": scenario.e_comm_watts,
        "cycle_costs": asdict(scenario.cycle_costs),
        "ues": [
            {
                "clock_hz": ue.clock_hz,
                "battery_joules": ue.battery_joules,
                "compute_budget_cycles": ue.compute_budget_cycles,
                "payload_bits": list(ue.payload_bits),
            }
            for ue in scenario.ues
        ],
        "orus": [
            {
                "clock_hz": ru.clock_hz,
                "security_requirement_bits": ru.security_requirement_bits,
                "resource_blocks": ru.resource_blocks,
            }
            for ru in scenario.orus
        ],
        "rate_bps": scenario.rate_bps.tolist(),
    }


def dumps(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def save(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps(scenario), encoding="utf-8")


def _get(data: dict, key: str, where: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ScenarioFormatError(f"{where}{key}", "missing")
    return data[key]


def _number(data: dict, key: str, where: str, *, positive=True, integer=False) -> float:
    value = _get(data, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioFormatError(f"{where}{key}", f"expected a finite number, got {value!r}")
    if integer and int(value) != value:
        raise ScenarioFormatError(f"{where}{key}", f"expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ScenarioFormatError(f"{where}{key}", f"must be positive, got {value!r}")
    if not positive and value < 0:
        raise ScenarioFormatError(f"{where}{key}", f"must be nonnegative, got {value!r}")
    return int(value) if integer else value


def scenario_from_dict(data: dict) -> Scenario:
    version = _get(data, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ScenarioFormatError("schema_version", f"unsupported version {version!r}, expected {SCHEMA_VERSION}")
    horizon = _number(data, "horizon", "", integer=True)
    costs = CycleCosts(**{k: _number(_get(data, "cycle_costs", ""), k, "cycle_costs.", integer=True)
                          for k in ("n_and", "n_or", "n_shift", "n_xor")}) if "cycle_costs" in data else CycleCosts()

    ues = []
    for i, raw in enumerate(_get(data, "ues", "")):
        where = f"ues[{i}]."
        if "payload_bits" in raw:
            payload = raw["payload_bits"]
            scale, key = 1, "payload_bits"
        else:
            payload = _get(raw, "payload_kb", where)
            scale, key = BITS_PER_KB, "payload_kb"
        if not isinstance(payload, list) or len(payload) != horizon:
            raise ScenarioFormatError(f"{where}{key}", f"expected a list of {horizon} values")
        bits = []
        for t, v in enumerate(payload):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ScenarioFormatError(f"{where}{key}[{t}]", f"expected a nonnegative number, got {v!r}")
            b = v * scale
            if scale == 1 and int(b) != b:
                raise ScenarioFormatError(f"{where}{key}[{t}]", f"expected an integer number of bits, got {v!r}")
            bits.append(int(round(b)))
        ues.append(UserEquipment(
            clock_hz=_number(raw, "clock_hz", where),
            battery_joules=_number(raw, "battery_joules", where),
            compute_budget_cycles=_number(raw, "compute_budget_cycles", where),
            payload_bits=tuple(bits),
        ))
    if not ues:
        raise ScenarioFormatError("ues", "at least one UE is required")

    orus = []
    for j, raw in enumerate(_get(data, "orus", "")):
        where = f"orus[{j}]."
        w = _number(raw, "security_requirement_bits", where, positive=False)
        if w > MAX_SECURITY:
            raise ScenarioFormatError(f"{where}security_requirement_bits",
                                      f"{w} exceeds the catalog maximum of {MAX_SECURITY}")
        orus.append(RadioUnit(
            clock_hz=_number(raw, "clock_hz", where),
            security_requirement_bits=w,
            resource_blocks=_number(raw, "resource_blocks", where, integer=True),
        ))
    if not orus:
        raise ScenarioFormatError("orus", "at least one O-RU is required")

    rate = _get(data, "rate_bps", "")
    try:
        rate_arr = np.array(rate, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioFormatError("rate_bps", "expected a numeric [ue][oru][step] table") from None
    if rate_arr.shape != (len(ues), len(orus), horizon):
        raise ScenarioFormatError("rate_bps", f"shape {rate_arr.shape}, expected {(len(ues), len(orus), horizon)}")
    bad = np.argwhere(~(np.isfinite(rate_arr) & (rate_arr > 0)))
    if bad.size:
        i, j, t = bad[0]
        raise ScenarioFormatError(f"rate_bps[{i}][{j}][{t}]", "must be positive")

    return Scenario(tuple(ues), tuple(orus), horizon, rate_arr,
                    _number(data, "e_cp_watts", ""), _number(data, "e_comm_watts", ""), costs)


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError("<document>", f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioFormatError("<document>", "expected a JSON object")
    return scenario_from_dict(data)


def load(path) -> Scenario:
    return loads(Path(path).read_text(encoding="utf-8"))


# --- built-in fixtures ---------------------------------------------------------------

def depletion_fixture() -> Scenario:
    """Instance where a step-by-step optimum drains a UE's battery early.

    UE 0 can afford RSA-4096 for two steps but then has too little energy
    left to transmit at all in the last step, while a plan over the whole
    horizon (cheaper ciphers on every step) fits the battery. UE 1 has
    ample battery.
    """
    payload = int(1000 * BITS_PER_KB)
    ues = (
        UserEquipment(clock_hz=2e9, battery_joules=140.0, compute_budget_cycles=2e7, payload_bits=(payload,) * 4),
        UserEquipment(clock_hz=2e9, battery_joules=1e4, compute_budget_cycles=2e7, payload_bits=(payload,) * 4),
    )
    orus = (RadioUnit(clock_hz=3.7e9, security_requirement_bits=6.0, resource_blocks=2),)
    rate = np.full((2, 1, 4), 50e6)
    return Scenario(ues, orus, 4, rate, 4.0, 7.0)


def builtin(name: str) -> Optional[Scenario]:
    if name == "depletion":
        return depletion_fixture()
    return None
