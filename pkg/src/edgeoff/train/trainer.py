"""Training loop tying the environment, policy, critic and world model together.

Every source of randomness gets its own child stream of the run seed, so
optional components (world-model fitting, imagination) can be switched off
without perturbing the draws seen by the rest of the system. With
lambda_wm = 0 and eta = 0 the model-assisted algorithm reproduces the plain
clipped-surrogate baseline bit for bit (given gae_lambda = 0).
"""

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..env.config import SystemConfig
from ..env.mec import Action, MecEnv
from ..kernels import lambda_returns
from ..nn import checkpoint
from ..nn.adam import Adam
from ..nn.layers import MLP
from ..nn.policy import SquashedGaussianPolicy
from ..rl.ppo import PpoConfig, Trajectory, update
from ..wm.rssm import WmConfig, WorldModel, boosted_targets

# Child RNG stream ids; each stream is default_rng([seed, id]).
STREAMS = {
    "env": 0,
    "actor_init": 1,
    "critic_init": 2,
    "wm_init": 3,
    "action": 4,
    "update": 5,
    "wm_train": 6,
    "imag": 7,
    "eval": 8,
}

ALGORITHMS = ("wm-ppo", "ppo")


@dataclass
class RunConfig:
    algorithm: str = "wm-ppo"
    seed: int = 0
    iterations: int = 150
    hidden: tuple = (64, 64)
    parallel_envs: int = 1
    keep_fraction: float = 0.5
    env: SystemConfig = field(default_factory=SystemConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    wm_n_h: int = 32
    wm_n_z: int = 16
    wm_hidden: int = 64
    wm_horizon: int = 3
    wm_lambda: float = 0.5
    wm_eta: float = 0.3
    wm_beta: float = 1.0
    wm_lambda_r: float = 1.0
    wm_lr: float = 1e-3

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.parallel_envs < 1:
            raise ValueError("parallel_envs must be >= 1")
        self.hidden = tuple(int(h) for h in self.hidden)

    def wm_config(self, n_obs, n_action):
        return WmConfig(
            n_obs=n_obs, n_action=n_action, n_h=self.wm_n_h, n_z=self.wm_n_z,
            hidden=self.wm_hidden, horizon=self.wm_horizon,
            lambda_wm=self.wm_lambda, eta=self.wm_eta, beta=self.wm_beta,
            lambda_r=self.wm_lambda_r, lr=self.wm_lr,
        )

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        if "env" in raw:
            raw["env"] = SystemConfig.from_dict(raw["env"])
        if "ppo" in raw:
            raw["ppo"] = PpoConfig(**raw["ppo"])
        return cls(**raw)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        out = {
            k: getattr(self, k)
            for k in (
                "algorithm", "seed", "iterations", "parallel_envs",
                "keep_fraction", "wm_n_h", "wm_n_z", "wm_hidden", "wm_horizon",
                "wm_lambda", "wm_eta", "wm_beta", "wm_lambda_r", "wm_lr",
            )
        }
        out["hidden"] = list(self.hidden)
        out["env"] = self.env.to_dict()
        out["ppo"] = vars(self.ppo)
        return out

    def config_hash(self):
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()


def _stream(seed, name):
    return np.random.default_rng([seed, STREAMS[name]])


def _mean_diag(trajectories, key):
    vals = [np.mean(d[key]) for tr in trajectories for d in tr.diagnostics]
    return float(np.mean(vals))


class Trainer:
    def __init__(self, cfg):
        self.cfg = cfg
        self.envs = [
            MecEnv(cfg.env, seed=[cfg.seed, STREAMS["env"], i])
            for i in range(cfg.parallel_envs)
        ]
        env = self.envs[0]
        self.state_dim = env.state_dim
        self.action_dim = env.action_dim
        self.actor = SquashedGaussianPolicy(
            self.state_dim, self.action_dim, cfg.hidden, _stream(cfg.seed, "actor_init")
        )
        self.critic = MLP([self.state_dim, *cfg.hidden, 1], _stream(cfg.seed, "critic_init"))
        self.actor_opt = Adam(cfg.ppo.actor_lr)
        self.critic_opt = Adam(cfg.ppo.critic_lr)
        self.wm_cfg = cfg.wm_config(self.state_dim, self.action_dim)
        self.wm = WorldModel(self.wm_cfg, _stream(cfg.seed, "wm_init"))
        self.wm_opt = Adam(self.wm_cfg.lr)
        self.action_rng = _stream(cfg.seed, "action")
        self.update_rng = _stream(cfg.seed, "update")
        self.wm_rng = _stream(cfg.seed, "wm_train")
        self.imag_rng = _stream(cfg.seed, "imag")
        self.iteration = 0

    # -- data collection ------------------------------------------------------

    def collect(self):
        """One full episode per environment under the stochastic policy."""
        trajectories = []
        for env in self.envs:
            obs = env.reset()
            rows = {k: [] for k in ("s", "u", "a", "r", "d", "sn", "lp")}
            diags = []
            done = False
            while not done:
                a, u, logp = self.actor.sample(obs[None, :], self.action_rng)
                act = Action(
                    alpha=a[0, : self.cfg.env.K],
                    power_w=a[0, self.cfg.env.K :] * self.cfg.env.p_max_w,
                )
                out = env.step(act)
                rows["s"].append(obs)
                rows["u"].append(u[0])
                rows["a"].append(a[0])
                rows["r"].append(out.reward)
                rows["d"].append(float(out.done))
                rows["sn"].append(out.observation)
                rows["lp"].append(logp[0])
                diags.append(out.diagnostics)
                obs = out.observation
                done = out.done
            states = np.array(rows["s"])
            values = self._values(states)
            trajectories.append(
                Trajectory(
                    states=states,
                    actions_u=np.array(rows["u"]),
                    actions=np.array(rows["a"]),
                    rewards=np.array(rows["r"]),
                    dones=np.array(rows["d"]),
                    next_states=np.array(rows["sn"]),
                    log_probs=np.array(rows["lp"]),
                    values=values,
                    diagnostics=diags,
                )
            )
        return trajectories

    def _values(self, states):
        v, _ = self.critic.forward(states)
        return v[:, 0]

    # -- world model ----------------------------------------------------------

    def _fit_world_model(self, trajectories):
        losses = []
        for tr in trajectories:
            obs_seq = np.vstack([tr.states, tr.next_states[-1:]])
            self.wm.zero_grads()
            out = self.wm.loss_and_grad(obs_seq, tr.actions, tr.rewards, tr.dones, self.wm_rng)
            self.wm_opt.step(self.wm.param_items())
            losses.append(out)
        return {k: float(np.mean([o[k] for o in losses])) for k in losses[0]}

    def _boosted_targets(self, tr, real_returns):
        pred_obs, pred_r, _ = self.wm.predict_next(tr.states, tr.actions)
        pred_next_values = self._values(pred_obs)
        return boosted_targets(
            real_returns, tr.dones, pred_r, pred_next_values,
            self.cfg.ppo.gamma, self.wm_cfg.lambda_wm,
        )

    def _imagined(self, states):
        cfg = self.cfg
        idx = self.wm.select_low_uncertainty(states, cfg.keep_fraction)
        roll = self.wm.imagine(states[idx], self.actor, self.wm_cfg.horizon, self.imag_rng)
        v_now = self._values(roll["obs"])
        v_next = self._values(roll["next_obs"])
        adv = roll["rewards"] + cfg.ppo.gamma * roll["cont"] * v_next - v_now
        if cfg.ppo.normalize_advantages:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        # Gradient weights for sum_i w_i * log pi: ascend eta-scaled advantages.
        weights = -self.wm_cfg.eta * adv / adv.shape[0]
        return roll["obs"], roll["actions_u"], weights

    # -- training -------------------------------------------------------------

    def train_iteration(self):
        cfg = self.cfg
        trajectories = self.collect()
        metrics = {
            "iteration": self.iteration,
            "mean_reward": float(np.mean([tr.rewards.mean() for tr in trajectories])),
            "episode_return": float(np.mean([tr.rewards.sum() for tr in trajectories])),
            "mean_alpha": _mean_diag(trajectories, "alpha"),
            "mean_a_tilde": _mean_diag(trajectories, "a_tilde"),
            "mean_h_tilde": _mean_diag(trajectories, "h_tilde"),
            "mean_latency": _mean_diag(trajectories, "latency"),
            "mean_omega": _mean_diag(trajectories, "omega"),
        }

        use_wm = cfg.algorithm == "wm-ppo"
        if use_wm:
            wm_losses = self._fit_world_model(trajectories)
            metrics.update({"wm_" + k: v for k, v in wm_losses.items()})

        # Advantages always come from real-data lambda returns; the world
        # model blends only into the critic regression targets.
        return_parts = []
        target_parts = []
        for tr in trajectories:
            next_values = self._values(tr.next_states)
            returns = lambda_returns(tr.rewards, next_values, tr.dones,
                                     cfg.ppo.gamma, cfg.ppo.gae_lambda)
            return_parts.append(returns)
            target_parts.append(self._boosted_targets(tr, returns) if use_wm
                                else returns)
        targets = np.concatenate(target_parts)
        values = np.concatenate([tr.values for tr in trajectories])
        advantages = np.concatenate(return_parts) - values
        if cfg.ppo.normalize_advantages:
            advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

        imagined = None
        if use_wm and self.wm_cfg.eta != 0.0 and self.wm_cfg.horizon > 0:
            imagined = self._imagined(np.concatenate([tr.states for tr in trajectories]))

        batch = {
            "states": np.concatenate([tr.states for tr in trajectories]),
            "actions_u": np.concatenate([tr.actions_u for tr in trajectories]),
            "log_probs": np.concatenate([tr.log_probs for tr in trajectories]),
            "advantages": advantages,
            "targets": targets,
        }
        stats = update(
            self.actor, self.critic, self.actor_opt, self.critic_opt,
            batch, cfg.ppo, self.update_rng,
            imagined=imagined, imag_eta=self.wm_cfg.eta if use_wm else 0.0,
        )
        metrics.update(stats)
        self.iteration += 1
        return metrics

    def train(self, out_dir=None, progress=None):
        cfg = self.cfg
        history = []
        writer = None
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, "config.json"), "w") as fh:
                json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
            writer = open(os.path.join(out_dir, "metrics.jsonl"), "w")
        try:
            for _ in range(cfg.iterations):
                metrics = self.train_iteration()
                metrics["seed"] = cfg.seed
                metrics["config_hash"] = cfg.config_hash()
                history.append(metrics)
                if writer is not None:
                    writer.write(json.dumps(metrics) + "\n")
                    writer.flush()
                if progress is not None:
                    progress(metrics)
        finally:
            if writer is not None:
                writer.close()
        if out_dir is not None:
            self._write_summary(os.path.join(out_dir, "summary.csv"), history)
            self.save_checkpoint(os.path.join(out_dir, "checkpoint.npz"))
        return history

    @staticmethod
    def _write_summary(path, history):
        if not history:
            return
        keys = sorted(set().union(*(m.keys() for m in history)))
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            for m in history:
                w.writerow(m)

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, episodes=5, seed_offset=0):
        return evaluate_policy(
            self.cfg, lambda obs: self.actor.mean_action(obs[None, :])[0],
            episodes=episodes, seed_offset=seed_offset,
        )

    # -- persistence ----------------------------------------------------------

    def save_checkpoint(self, path):
        # param_items yields (key, param, grad); optimizers yield (key, arr).
        sections = {
            "actor": [(k, p) for k, p, _ in self.actor.param_items()],
            "critic": [(k, p) for k, p, _ in self.critic.param_items()],
            "wm": [(k, p) for k, p, _ in self.wm.param_items()],
            "actor_opt": list(self.actor_opt.state_items()),
            "critic_opt": list(self.critic_opt.state_items()),
            "wm_opt": list(self.wm_opt.state_items()),
        }
        meta = {
            "iteration": self.iteration,
            "seed": self.cfg.seed,
            "config_hash": self.cfg.config_hash(),
            "config": self.cfg.to_dict(),
            "opt_t": {
                "actor": self.actor_opt.t,
                "critic": self.critic_opt.t,
                "wm": self.wm_opt.t,
            },
            "rng": {
                "action": self.action_rng.bit_generator.state,
                "update": self.update_rng.bit_generator.state,
                "wm_train": self.wm_rng.bit_generator.state,
                "imag": self.imag_rng.bit_generator.state,
                "envs": [env.rng.bit_generator.state for env in self.envs],
            },
        }
        checkpoint.save(path, sections, meta)

    def load_checkpoint(self, path):
        meta, sections = checkpoint.load(path)
        if meta["config_hash"] != self.cfg.config_hash():
            raise ValueError("checkpoint config does not match this trainer")
        checkpoint.restore_params(self.actor, sections["actor"])
        checkpoint.restore_params(self.critic, sections["critic"])
        checkpoint.restore_params(self.wm, sections["wm"])
        self.actor_opt.load_state(meta["opt_t"]["actor"], sections.get("actor_opt", {}))
        self.critic_opt.load_state(meta["opt_t"]["critic"], sections.get("critic_opt", {}))
        self.wm_opt.load_state(meta["opt_t"]["wm"], sections.get("wm_opt", {}))
        self.action_rng.bit_generator.state = meta["rng"]["action"]
        self.update_rng.bit_generator.state = meta["rng"]["update"]
        self.wm_rng.bit_generator.state = meta["rng"]["wm_train"]
        self.imag_rng.bit_generator.state = meta["rng"]["imag"]
        for env, state in zip(self.envs, meta["rng"]["envs"]):
            env.rng.bit_generator.state = state
        self.iteration = int(meta["iteration"])


def evaluate_policy(cfg, policy_fn, episodes=5, seed_offset=0):
    """Deterministic rollouts of ``policy_fn(obs) -> action in (0,1)^2K``.

    Returns aggregate QoS, latency and constraint-satisfaction statistics.
    """
    env_cfg = cfg.env if isinstance(cfg, RunConfig) else cfg
    seed = cfg.seed if isinstance(cfg, RunConfig) else env_cfg.seed
    per_episode = []
    for ep in range(episodes):
        env = MecEnv(env_cfg, seed=[seed, STREAMS["eval"], seed_offset + ep])
        obs = env.reset()
        rows = {k: [] for k in ("reward", "alpha", "a_tilde", "h_tilde", "latency", "energy")}
        done = False
        while not done:
            a = np.asarray(policy_fn(obs), dtype=np.float64)
            act = Action(alpha=a[: env_cfg.K], power_w=a[env_cfg.K :] * env_cfg.p_max_w)
            out = env.step(act)
            d = out.diagnostics
            rows["reward"].append(out.reward)
            rows["alpha"].append(np.mean(d["alpha"]))
            rows["a_tilde"].append(np.mean(d["a_tilde"]))
            rows["h_tilde"].append(np.mean(d["h_tilde"]))
            rows["latency"].append(np.sum(d["latency"]))
            rows["energy"].append(np.sum(d["e_local"] + d["e_off"]))
            obs = out.observation
            done = out.done
        stats = {"mean_" + k: float(np.mean(v)) for k, v in rows.items()}
        stats["accuracy_ok"] = bool(stats["mean_a_tilde"] >= env_cfg.a_min)
        stats["hallucination_ok"] = bool(stats["mean_h_tilde"] <= env_cfg.h_max)
        per_episode.append(stats)

    keys = ("mean_reward", "mean_alpha", "mean_a_tilde", "mean_h_tilde",
            "mean_latency", "mean_energy")
    result = {k: float(np.mean([s[k] for s in per_episode])) for k in keys}
    result["episodes"] = episodes
    result["accuracy_ok"] = bool(result["mean_a_tilde"] >= env_cfg.a_min)
    result["hallucination_ok"] = bool(result["mean_h_tilde"] <= env_cfg.h_max)
    result["constraint_satisfaction_rate"] = float(
        np.mean([s["accuracy_ok"] and s["hallucination_ok"] for s in per_episode])
    )
    result["per_episode"] = per_episode
    return result


def baseline_policy(env_cfg, mode):
    """Constant policy: fully local or fully offloaded at max power."""
    if mode not in ("local", "offload"):
        raise ValueError("mode must be 'local' or 'offload'")
    alpha = 0.0 if mode == "local" else 1.0

    def policy(obs):
        a = np.empty(2 * env_cfg.K)
        a[: env_cfg.K] = alpha
        a[env_cfg.K :] = 1.0
        return a

    return policy


def run_baseline(env_cfg, mode, episodes=5, seed=0):
    cfg = RunConfig(env=env_cfg, seed=seed)
    return evaluate_policy(cfg, baseline_policy(env_cfg, mode), episodes=episodes)
