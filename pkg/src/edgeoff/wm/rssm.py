"""Recurrent state-space world model with hand-derived gradients.

Deterministic path h_t evolves by a GRU over [z_{t-1}, a_{t-1}]; a prior head
maps h_t to a diagonal Gaussian over the stochastic latent z_t and a posterior
head conditions additionally on the observation. Decoders reconstruct the
observation and predict the reward and termination of the transition that led
into (h_t, z_t). Everything is float64 and backprop is written out by hand,
matching the rest of the nn package.
"""

from dataclasses import dataclass

import numpy as np

from ..nn.gru import GRUCell
from ..nn.layers import MLP

LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class WmConfig:
    n_obs: int
    n_action: int
    n_h: int = 64
    n_z: int = 32
    hidden: int = 256
    horizon: int = 3
    lambda_wm: float = 0.5
    eta: float = 0.3
    beta: float = 1.0
    lambda_r: float = 1.0
    lr: float = 1e-3

    def __post_init__(self):
        if not 0.0 <= self.lambda_wm <= 1.0:
            raise ValueError("lambda_wm must lie in [0, 1]")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")


def gaussian_kl(mu_q, log_std_q, mu_p, log_std_p):
    """KL(q || p) per sample, summed over dims, for diagonal Gaussians."""
    var_q = np.exp(2.0 * log_std_q)
    var_p = np.exp(2.0 * log_std_p)
    diff = mu_q - mu_p
    terms = log_std_p - log_std_q + (var_q + diff * diff) / (2.0 * var_p) - 0.5
    return np.sum(terms, axis=-1)


def gaussian_kl_grads(mu_q, log_std_q, mu_p, log_std_p):
    """Gradients of the summed KL w.r.t. all four parameter arrays."""
    var_q = np.exp(2.0 * log_std_q)
    var_p = np.exp(2.0 * log_std_p)
    diff = mu_q - mu_p
    d_mu_q = diff / var_p
    d_mu_p = -d_mu_q
    d_ls_q = var_q / var_p - 1.0
    d_ls_p = 1.0 - (var_q + diff * diff) / var_p
    return d_mu_q, d_ls_q, d_mu_p, d_ls_p


def _split(out):
    n = out.shape[-1] // 2
    return out[..., :n], out[..., n:]


class WorldModel:
    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.gru = GRUCell(cfg.n_z + cfg.n_action, cfg.n_h, rng)
        self.prior = MLP([cfg.n_h, cfg.hidden, 2 * cfg.n_z], rng)
        self.post = MLP([cfg.n_h + cfg.n_obs, cfg.hidden, 2 * cfg.n_z], rng)
        self.dec_obs = MLP([cfg.n_h + cfg.n_z, cfg.hidden, cfg.n_obs], rng)
        self.dec_reward = MLP([cfg.n_h + cfg.n_z, cfg.hidden, 1], rng)
        self.dec_done = MLP([cfg.n_h + cfg.n_z, cfg.hidden, 1], rng)
        self._parts = [
            ("gru.", self.gru),
            ("prior.", self.prior),
            ("post.", self.post),
            ("dec_obs.", self.dec_obs),
            ("dec_reward.", self.dec_reward),
            ("dec_done.", self.dec_done),
        ]

    def param_items(self, prefix=""):
        for name, part in self._parts:
            yield from part.param_items(prefix + name)

    def zero_grads(self):
        for _, part in self._parts:
            part.zero_grads()

    # -- posterior / prior helpers ------------------------------------------

    def _posterior(self, h, obs):
        out, cache = self.post.forward(np.concatenate([h, obs], axis=-1))
        mu, log_std = _split(out)
        return mu, log_std, cache

    def _prior(self, h):
        out, cache = self.prior.forward(h)
        mu, log_std = _split(out)
        return mu, log_std, cache

    def encode(self, obs):
        """Posterior mean latent at the episode start (h = 0)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        h0 = np.zeros((obs.shape[0], self.cfg.n_h))
        mu, _, _ = self._posterior(h0, obs)
        return h0, mu

    # -- training ------------------------------------------------------------

    def loss_and_grad(self, obs_seq, actions, rewards, dones, rng):
        """One full forward/backward pass over a single episode.

        obs_seq has T+1 rows; actions/rewards/dones have T. Gradients
        accumulate into the model's buffers; the caller owns the optimizer
        step. Returns a dict of scalar loss components.
        """
        cfg = self.cfg
        obs_seq = np.asarray(obs_seq, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        T = actions.shape[0]
        if obs_seq.shape[0] != T + 1:
            raise ValueError("obs_seq must have one more row than actions")

        n_steps = T + 1
        h = np.zeros((1, cfg.n_h))
        steps = []
        kl_sum = 0.0
        obs_sse = 0.0
        reward_se = 0.0
        done_bce = 0.0

        for t in range(n_steps):
            gru_cache = None
            if t > 0:
                x = np.concatenate([steps[-1]["z"], actions[t - 1 : t]], axis=-1)
                h, gru_cache = self.gru.step(x, h)
            o_t = obs_seq[t : t + 1]
            mu_p, ls_p, prior_cache = self._prior(h)
            mu_q, ls_q, post_cache = self._posterior(h, o_t)
            eps = rng.standard_normal(mu_q.shape)
            z = mu_q + np.exp(ls_q) * eps
            kl_sum += float(gaussian_kl(mu_q, ls_q, mu_p, ls_p)[0])

            hz = np.concatenate([h, z], axis=-1)
            o_hat, obs_cache = self.dec_obs.forward(hz)
            obs_sse += float(np.sum((o_hat - o_t) ** 2))
            step = {
                "h": h, "z": z, "eps": eps, "ls_q": ls_q,
                "mu_q": mu_q, "ls_p": ls_p, "mu_p": mu_p,
                "gru_cache": gru_cache, "prior_cache": prior_cache,
                "post_cache": post_cache, "obs_cache": obs_cache,
                "d_obs_out": o_hat - o_t,
            }
            if t > 0:
                r_hat, r_cache = self.dec_reward.forward(hz)
                d_logit, d_cache = self.dec_done.forward(hz)
                r_err = float(r_hat[0, 0]) - float(rewards[t - 1])
                d_t = float(dones[t - 1])
                reward_se += r_err * r_err
                done_bce += float(np.logaddexp(0.0, d_logit[0, 0]) - d_t * d_logit[0, 0])
                step["r_cache"] = r_cache
                step["d_r_out"] = np.array([[r_err]])
                step["d_cache"] = d_cache
                sig = 1.0 / (1.0 + np.exp(-d_logit[0, 0]))
                step["d_done_out"] = np.array([[sig - d_t]])
            steps.append(step)

        losses = {
            "obs": 0.5 * obs_sse / n_steps,
            "reward": 0.5 * reward_se / T,
            "done": done_bce / T,
            "kl": kl_sum / n_steps,
        }
        losses["total"] = (
            losses["obs"]
            + cfg.lambda_r * losses["reward"]
            + losses["done"]
            + cfg.beta * losses["kl"]
        )

        # Backward pass, newest step first.
        n_h, n_z = cfg.n_h, cfg.n_z
        w_obs = 1.0 / n_steps  # d(0.5*sse/n)/d(o_hat) = (o_hat - o)/n
        w_kl = cfg.beta / n_steps
        dh_carry = np.zeros((1, n_h))
        dz_carry = np.zeros((1, n_z))
        for t in range(n_steps - 1, -1, -1):
            s = steps[t]
            dh = dh_carry
            dz = dz_carry
            d_cat = self.dec_obs.backward(w_obs * s["d_obs_out"], s["obs_cache"])
            dh = dh + d_cat[:, :n_h]
            dz = dz + d_cat[:, n_h:]
            if t > 0:
                d_cat = self.dec_reward.backward(
                    (cfg.lambda_r / T) * s["d_r_out"], s["r_cache"])
                dh = dh + d_cat[:, :n_h]
                dz = dz + d_cat[:, n_h:]
                d_cat = self.dec_done.backward(
                    (1.0 / T) * s["d_done_out"], s["d_cache"])
                dh = dh + d_cat[:, :n_h]
                dz = dz + d_cat[:, n_h:]

            g_mu_q, g_ls_q, g_mu_p, g_ls_p = gaussian_kl_grads(
                s["mu_q"], s["ls_q"], s["mu_p"], s["ls_p"])
            d_mu_q = dz + w_kl * g_mu_q
            d_ls_q = dz * np.exp(s["ls_q"]) * s["eps"] + w_kl * g_ls_q
            d_post_in = self.post.backward(
                np.concatenate([d_mu_q, d_ls_q], axis=-1), s["post_cache"])
            dh = dh + d_post_in[:, :n_h]
            dh = dh + self.prior.backward(
                np.concatenate([w_kl * g_mu_p, w_kl * g_ls_p], axis=-1),
                s["prior_cache"])

            if t > 0:
                dx, dh_carry = self.gru.backward_step(dh, s["gru_cache"])
                dz_carry = dx[:, :n_z]

        return losses

    # -- inference -----------------------------------------------------------

    def predict_next(self, obs, actions):
        """One-step prediction from fresh context (h starts at zero).

        Returns (next_obs, reward, done_prob), all computed from latent
        means so the prediction is deterministic.
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        h0, z0 = self.encode(obs)
        h1, _ = self.gru.step(np.concatenate([z0, actions], axis=-1), h0)
        mu_p, _, _ = self._prior(h1)
        hz = np.concatenate([h1, mu_p], axis=-1)
        o_hat, _ = self.dec_obs.forward(hz)
        r_hat, _ = self.dec_reward.forward(hz)
        d_logit, _ = self.dec_done.forward(hz)
        return o_hat, r_hat[:, 0], 1.0 / (1.0 + np.exp(-d_logit[:, 0]))

    def uncertainty(self, obs):
        """Posterior-prior disagreement per observation (fresh context)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        h0 = np.zeros((obs.shape[0], self.cfg.n_h))
        mu_p, ls_p, _ = self._prior(h0)
        mu_q, ls_q, _ = self._posterior(h0, obs)
        return gaussian_kl(mu_q, ls_q, mu_p, ls_p)

    def select_low_uncertainty(self, obs, keep_fraction):
        """Indices of the keep_fraction least-uncertain observations."""
        if not 0.0 < keep_fraction <= 1.0:
            raise ValueError("keep_fraction must lie in (0, 1]")
        scores = self.uncertainty(obs)
        n_keep = max(1, int(round(keep_fraction * scores.shape[0])))
        order = np.argsort(scores, kind="stable")
        return np.sort(order[:n_keep])

    def imagine(self, obs, actor, horizon, rng):
        """Roll the prior forward under the current policy.

        Starts from the posterior-mean latents of real observations and
        returns dicts of stacked (n*horizon, .) arrays: decoded observations
        fed to the actor, pre-squash actions, predicted rewards and
        continuation probabilities. The model sees only its own decoded
        observations after the first step.
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        h, z = self.encode(obs)
        cur_obs = obs
        out = {"obs": [], "actions_u": [], "rewards": [], "cont": [], "next_obs": []}
        for _ in range(horizon):
            _, u, _ = actor.sample(cur_obs, rng)
            a = 1.0 / (1.0 + np.exp(-u))
            h, _ = self.gru.step(np.concatenate([z, a], axis=-1), h)
            mu_p, ls_p, _ = self._prior(h)
            z = mu_p + np.exp(ls_p) * rng.standard_normal(mu_p.shape)
            hz = np.concatenate([h, z], axis=-1)
            o_hat, _ = self.dec_obs.forward(hz)
            r_hat, _ = self.dec_reward.forward(hz)
            d_logit, _ = self.dec_done.forward(hz)
            out["obs"].append(cur_obs)
            out["actions_u"].append(u)
            out["rewards"].append(r_hat[:, 0])
            out["cont"].append(1.0 / (1.0 + np.exp(d_logit[:, 0])))
            out["next_obs"].append(o_hat)
            cur_obs = o_hat
        return {k: np.concatenate(v, axis=0) for k, v in out.items()}


def boosted_targets(real_targets, dones, pred_rewards, pred_next_values,
                    gamma, lambda_wm):
    """Critic targets mixing real returns with model-predicted TD targets.

    The model side is r_hat + gamma * (1 - done) * V(s_hat'). At
    lambda_wm = 0 this reproduces the real targets exactly.
    """
    real = np.asarray(real_targets, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    model = (np.asarray(pred_rewards, dtype=np.float64)
             + gamma * (1.0 - dones) * np.asarray(pred_next_values, dtype=np.float64))
    return (1.0 - lambda_wm) * real + lambda_wm * model
