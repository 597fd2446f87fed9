from .config import SystemConfig, dbm_to_watts, db_to_linear
from .channel import distance, channel_gain, uplink_rate
from .costs import local_cost, offload_cost, qos_blend, penalty
from .qos import sample_slot_qos
from .mec import MecEnv, Action, EnvState, StepOutcome, TRACE_FIELDS

__all__ = [
    "SystemConfig",
    "dbm_to_watts",
    "db_to_linear",
    "distance",
    "channel_gain",
    "uplink_rate",
    "local_cost",
    "offload_cost",
    "qos_blend",
    "penalty",
    "sample_slot_qos",
    "MecEnv",
    "Action",
    "EnvState",
    "StepOutcome",
    "TRACE_FIELDS",
]
