"""Episodic MDP over the MEC system model.

One environment instance owns one RNG; equal configs and seeds give
bit-identical trajectories under equal action sequences.
"""

from dataclasses import dataclass

import numpy as np

from .channel import all_uplink_rates, distance, rician_fading
from .costs import local_cost, offload_cost, penalty, qos_blend
from .qos import sample_slot_qos

TRACE_FIELDS = [
    "t", "k", "alpha", "power_w", "x_bits", "gain", "rate",
    "l_local", "l_off", "l_mec", "latency", "e_local", "e_off",
    "a_tilde", "h_tilde", "reward", "omega",
]


@dataclass
class Action:
    alpha: np.ndarray
    power_w: np.ndarray


@dataclass
class EnvState:
    t: int
    alpha_prev: np.ndarray
    power_prev: np.ndarray
    a_tilde: np.ndarray
    h_tilde: np.ndarray
    latency: np.ndarray
    x_bits: np.ndarray
    gains: np.ndarray


@dataclass
class StepOutcome:
    next_state: EnvState
    observation: np.ndarray
    reward: float
    done: bool
    diagnostics: dict


class MecEnv:
    def __init__(self, cfg, seed=None):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed if seed is None else seed)
        self.positions = None
        self.distances = None
        self.state = None

    @property
    def state_dim(self):
        return 7 * self.cfg.K + 1

    @property
    def action_dim(self):
        return 2 * self.cfg.K

    def observe(self, state=None):
        cfg = self.cfg
        s = self.state if state is None else state
        gain_scale = cfg.cell_radius_m**2 / cfg.ref_gain_linear
        per_user = np.stack(
            [
                s.alpha_prev,
                s.power_prev / cfg.p_max_w,
                s.a_tilde,
                s.h_tilde,
                s.latency,
                s.x_bits / cfg.task_bits_max,
                s.gains * gain_scale,
            ],
            axis=1,
        )
        return np.concatenate([per_user.ravel(), [s.t / cfg.T]])

    def _sample_gains(self):
        cfg = self.cfg
        large = cfg.ref_gain_linear / self.distances**2
        if cfg.deterministic_channel:
            return large
        return large * rician_fading(cfg.rician_k, self.rng, size=cfg.K)

    def reset(self):
        cfg = self.cfg
        radius = cfg.cell_radius_m * np.sqrt(self.rng.uniform(size=cfg.K))
        angle = self.rng.uniform(0.0, 2.0 * np.pi, size=cfg.K)
        self.positions = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        self.distances = np.array(
            [distance(p, (0.0, 0.0), cfg.mec_height_m) for p in self.positions]
        )
        self.state = EnvState(
            t=0,
            alpha_prev=np.zeros(cfg.K),
            power_prev=np.zeros(cfg.K),
            a_tilde=np.full(cfg.K, cfg.local_profile.offline_accuracy),
            h_tilde=np.full(cfg.K, cfg.local_profile.offline_hallucination),
            latency=np.zeros(cfg.K),
            x_bits=self.rng.uniform(cfg.task_bits_min, cfg.task_bits_max, size=cfg.K),
            gains=self._sample_gains(),
        )
        return self.observe()

    def step(self, action):
        cfg = self.cfg
        s = self.state
        alpha = np.clip(np.asarray(action.alpha, dtype=np.float64), 0.0, 1.0)
        power = np.clip(np.asarray(action.power_w, dtype=np.float64), 0.0, cfg.p_max_w)

        rates = all_uplink_rates(power, s.gains, cfg.bandwidth_hz, cfg.noise_power_w)

        l_local = np.zeros(cfg.K)
        e_local = np.zeros(cfg.K)
        l_off = np.zeros(cfg.K)
        l_mec = np.zeros(cfg.K)
        e_off = np.zeros(cfg.K)
        a_tilde = np.zeros(cfg.K)
        h_tilde = np.zeros(cfg.K)
        for k in range(cfg.K):
            l_local[k], e_local[k] = local_cost(
                alpha[k], s.x_bits[k], cfg.cpu_freq, cfg.cycles_per_bit, cfg.energy_coeff
            )
            l_off[k], l_mec[k], e_off[k] = offload_cost(
                alpha[k], s.x_bits[k], rates[k], power[k], cfg.phi_mec,
                cfg.mec_freq, cfg.slot_cap_s,
            )
            a_loc, h_loc = sample_slot_qos(
                cfg.local_profile, self.rng, cfg.qos_concentration, cfg.deterministic_qos
            )
            a_tilde[k], h_tilde[k] = qos_blend(alpha[k], a_loc, h_loc, cfg.a_mec, cfg.h_mec)

        latency = np.maximum(l_local, l_off + l_mec)
        energy = e_local + e_off
        omega, (acc_term, hall_term, energy_term) = penalty(a_tilde, h_tilde, energy, cfg)
        reward = 1.0 / (latency.sum() + cfg.penalty_weight * omega)

        done = s.t >= cfg.T - 1
        next_state = EnvState(
            t=s.t + 1,
            alpha_prev=alpha,
            power_prev=power,
            a_tilde=a_tilde,
            h_tilde=h_tilde,
            latency=latency,
            x_bits=self.rng.uniform(cfg.task_bits_min, cfg.task_bits_max, size=cfg.K),
            gains=self._sample_gains(),
        )
        diagnostics = {
            "t": s.t,
            "alpha": alpha,
            "power_w": power,
            "x_bits": s.x_bits,
            "gain": s.gains,
            "rate": rates,
            "l_local": l_local,
            "l_off": l_off,
            "l_mec": l_mec,
            "latency": latency,
            "e_local": e_local,
            "e_off": e_off,
            "a_tilde": a_tilde,
            "h_tilde": h_tilde,
            "omega": omega,
            "omega_terms": (acc_term, hall_term, energy_term),
            "reward": reward,
        }
        self.state = next_state
        return StepOutcome(
            next_state=next_state,
            observation=self.observe(),
            reward=reward,
            done=done,
            diagnostics=diagnostics,
        )

    def write_trace(self, fh, diagnostics_seq):
        """Append one CSV row per (t, k) from a sequence of step diagnostics."""
        for diag in diagnostics_seq:
            for k in range(self.cfg.K):
                row = []
                for field in TRACE_FIELDS:
                    if field == "k":
                        row.append(k)
                    elif field in ("t", "reward", "omega"):
                        row.append(diag[field])
                    else:
                        row.append(diag[field][k])
                row = [v.item() if isinstance(v, np.generic) else v for v in row]
                fh.write(",".join(repr(v) for v in row) + "\n")
