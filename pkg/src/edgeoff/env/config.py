"""System configuration. The engine works purely in SI units; dBm/dB entries
in config files are converted to linear watts once, at load time."""

import json
from dataclasses import dataclass, field, asdict

from ..compress.profiles import VariantProfile, load_catalog


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def _default_local_profile():
    return load_catalog()["pruning_distillation"]


@dataclass
class SystemConfig:
    K: int = 2
    T: int = 100
    bandwidth_hz: float = 10e6
    noise_power_w: float = dbm_to_watts(-104.0)
    rician_k: float = 8.0
    ref_gain_linear: float = db_to_linear(-30.0)
    cell_radius_m: float = 20.0
    mec_height_m: float = 10.0
    mec_freq: float = 10e9  # cycles/s
    cycles_per_bit: float = 900.0
    cycles_per_bit_mec: float | None = None  # defaults to cycles_per_bit
    cpu_freq: float = 2e9
    p_max_w: float = dbm_to_watts(33.0)
    e_max_j: float = 2.0
    energy_coeff: float = 1e-28
    task_bits_min: float = 1.0e6
    task_bits_max: float = 2.5e6
    local_profile: VariantProfile = field(default_factory=_default_local_profile)
    a_mec: float = 1.0
    h_mec: float = 0.77
    a_min: float = 0.6
    h_max: float = 0.78
    penalty_weight: float = 100.0
    qos_concentration: float = 50.0
    deterministic_qos: bool = False
    deterministic_channel: bool = False
    slot_cap_s: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.T < 1:
            raise ValueError("K and T must be >= 1")
        if not 0.0 <= self.a_min <= 1.0 or not 0.0 <= self.h_max <= 1.0:
            raise ValueError("QoS thresholds must lie in [0, 1]")
        for name in ("bandwidth_hz", "noise_power_w", "ref_gain_linear", "mec_freq",
                     "cycles_per_bit", "cpu_freq", "p_max_w", "e_max_j",
                     "task_bits_min", "task_bits_max", "penalty_weight"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def phi_mec(self):
        return self.cycles_per_bit if self.cycles_per_bit_mec is None else self.cycles_per_bit_mec

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        if "p_max_dbm" in raw:
            raw["p_max_w"] = dbm_to_watts(raw.pop("p_max_dbm"))
        if "noise_power_dbm" in raw:
            raw["noise_power_w"] = dbm_to_watts(raw.pop("noise_power_dbm"))
        if "ref_gain_db" in raw:
            raw["ref_gain_linear"] = db_to_linear(raw.pop("ref_gain_db"))
        prof = raw.get("local_profile")
        if isinstance(prof, str):
            raw["local_profile"] = load_catalog()[prof]
        elif isinstance(prof, dict):
            raw["local_profile"] = VariantProfile(**prof)
        return cls(**raw)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        out = asdict(self)
        out["local_profile"] = self.local_profile.to_dict()
        return out
