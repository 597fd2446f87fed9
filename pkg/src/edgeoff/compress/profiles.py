"""Per-variant QoS profiles and the shipped catalog."""

import json
from dataclasses import dataclass, asdict
from importlib import resources


@dataclass
class VariantProfile:
    name: str
    offline_accuracy: float
    offline_hallucination: float
    storage_mb: float
    energy_wh: float

    def __post_init__(self):
        if not 0.0 <= self.offline_accuracy <= 1.0:
            raise ValueError("offline_accuracy must lie in [0, 1]")
        if not 0.0 <= self.offline_hallucination <= 1.0:
            raise ValueError("offline_hallucination must lie in [0, 1]")
        if self.storage_mb <= 0 or self.energy_wh <= 0:
            raise ValueError("storage and energy must be positive")

    def to_dict(self):
        return asdict(self)


def default_catalog_path():
    return resources.files("edgeoff.data") / "llama31_8b_catalog.json"


def load_catalog(path=None):
    """Load a {name: VariantProfile} catalog from JSON."""
    src = default_catalog_path() if path is None else path
    with open(src) as fh:
        raw = json.load(fh)
    return {name: VariantProfile(name=name, **fields) for name, fields in raw.items()}
