"""On-policy actor-critic update: clipped surrogate, entropy bonus, MSE critic."""

from dataclasses import dataclass, field

import numpy as np

from ..kernels import lambda_returns


@dataclass
class PpoConfig:
    clip_eps: float = 0.1
    gamma: float = 0.99
    epochs: int = 10
    entropy_coeff: float = 0.001
    gae_lambda: float = 0.95  # vanilla baseline only
    minibatch_size: int = 64
    normalize_advantages: bool = True
    actor_lr: float = 1e-5
    critic_lr: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.clip_eps < 1.0:
            raise ValueError("clip_eps must lie in (0, 1)")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")


@dataclass
class Trajectory:
    states: np.ndarray  # (T, S)
    actions_u: np.ndarray  # (T, A) pre-squash actions
    actions: np.ndarray  # (T, A) squashed actions in (0, 1)
    rewards: np.ndarray  # (T,)
    dones: np.ndarray  # (T,)
    next_states: np.ndarray  # (T, S)
    log_probs: np.ndarray  # (T,) behaviour-policy log densities
    values: np.ndarray  # (T,)
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        T = self.states.shape[0]
        for name in ("actions_u", "actions", "rewards", "dones", "next_states",
                     "log_probs", "values"):
            if getattr(self, name).shape[0] != T:
                raise ValueError(f"trajectory field {name} misaligned")
        if not np.all(np.isfinite(self.log_probs)):
            raise ValueError("non-finite behaviour log-probs")

    def __len__(self):
        return self.states.shape[0]


def prob_ratio(new_logp, old_logp):
    return np.exp(np.asarray(new_logp) - np.asarray(old_logp))


def clipped_surrogate(ratios, advantages, clip_eps):
    """Mean over the batch of -min(rho*A, clip(rho)*A)."""
    ratios = np.asarray(ratios, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps)
    return float(-np.mean(np.minimum(ratios * advantages, clipped * advantages)))


def surrogate_grad(ratios, advantages, clip_eps):
    """(loss, dloss/dlogp, clip_fraction). The gradient is zero wherever the
    clip binds against improvement."""
    ratios = np.asarray(ratios, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    n = ratios.shape[0]
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps)
    unclipped_term = ratios * advantages
    clipped_term = clipped * advantages
    loss = float(-np.mean(np.minimum(unclipped_term, clipped_term)))
    active = unclipped_term <= clipped_term  # min picks the unclipped branch
    dlogp = np.where(active, -ratios * advantages / n, 0.0)
    clip_fraction = float(np.mean(ratios != clipped))
    return loss, dlogp, clip_fraction


def gae_advantages(rewards, values, next_values, dones, gamma, lam,
                   normalize=True):
    """Generalized advantages via the lambda-return recursion.

    Returns (advantages, returns); returns serve as critic targets."""
    returns = lambda_returns(rewards, next_values, dones, gamma, lam)
    adv = returns - np.asarray(values, dtype=np.float64)
    if normalize:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return adv, returns


def critic_loss(values, targets):
    values = np.asarray(values, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    return float(np.mean((values - targets) ** 2))


def _minibatches(n, size, rng):
    order = rng.permutation(n)
    for start in range(0, n, size):
        yield order[start : start + size]


def update(actor, critic, actor_opt, critic_opt, batch, cfg, rng, imagined=None,
           imag_eta=0.0):
    """Run cfg.epochs of minibatch steps on the actor and critic losses.

    ``batch`` needs states, actions_u, log_probs, advantages, targets.
    ``imagined`` optionally holds (states, actions_u, weights) for the
    auxiliary imagination term, already advantage-weighted and detached.
    """
    states = batch["states"]
    n = states.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    old_logp = batch["log_probs"]
    advantages = batch["advantages"]
    targets = batch["targets"]
    actions_u = batch["actions_u"]

    actor_losses = []
    critic_losses = []
    entropies = []
    clip_fracs = []
    approx_kls = []

    for _ in range(cfg.epochs):
        for idx in _minibatches(n, cfg.minibatch_size, rng):
            # Critic step (targets are fixed within the iteration).
            values, v_cache = critic.forward(states[idx])
            values = values[:, 0]
            critic_losses.append(critic_loss(values, targets[idx]))
            critic.zero_grads()
            dv = 2.0 * (values - targets[idx])[:, None] / idx.shape[0]
            critic.backward(dv, v_cache)
            critic_opt.step(critic.param_items())

            # Actor step: clipped surrogate + entropy (+ imagination).
            actor.zero_grads()
            logp, cache = actor.log_prob(states[idx], actions_u[idx])
            ratios = prob_ratio(logp, old_logp[idx])
            loss, dlogp, clip_frac = surrogate_grad(ratios, advantages[idx], cfg.clip_eps)
            actor.backward_log_prob(dlogp, cache)

            eps = rng.standard_normal((idx.shape[0], actor.action_dim))
            ent, ent_cache = actor.entropy(states[idx], eps)
            if cfg.entropy_coeff != 0.0:
                actor.backward_entropy(-cfg.entropy_coeff, ent_cache)

            if imagined is not None and imag_eta != 0.0:
                im_states, im_u, im_weights = imagined
                im_logp, im_cache = actor.log_prob(im_states, im_u)
                actor.backward_log_prob(im_weights, im_cache)
                loss += float(np.sum(im_weights * im_logp))

            actor_opt.step(actor.param_items())

            actor_losses.append(loss - cfg.entropy_coeff * ent)
            entropies.append(ent)
            clip_fracs.append(clip_frac)
            approx_kls.append(float(np.mean(old_logp[idx] - logp)))

    return {
        "actor_loss": float(np.mean(actor_losses)),
        "critic_loss": float(np.mean(critic_losses)),
        "entropy": float(np.mean(entropies)),
        "clip_fraction": float(np.mean(clip_fracs)),
        "approx_kl": float(np.mean(approx_kls)),
    }
