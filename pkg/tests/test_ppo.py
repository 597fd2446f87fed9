"""Clipped-surrogate losses, advantage estimation, and the update loop."""

import numpy as np
import pytest

from edgeoff.nn.adam import Adam
from edgeoff.nn.layers import MLP
from edgeoff.nn.policy import SquashedGaussianPolicy
from edgeoff.rl.ppo import (
    PpoConfig,
    Trajectory,
    clipped_surrogate,
    critic_loss,
    gae_advantages,
    prob_ratio,
    surrogate_grad,
    update,
)


def test_prob_ratio():
    assert prob_ratio(np.log(2.0), np.log(1.0)) == pytest.approx(2.0, rel=1e-12)
    assert prob_ratio(0.0, 0.0) == 1.0


def test_clipped_surrogate_oracle():
    rng = np.random.default_rng(0)
    eps = 0.1
    for _ in range(100):
        n = int(rng.integers(1, 20))
        ratios = rng.uniform(0.5, 1.5, size=n)
        adv = rng.standard_normal(n)
        want = -np.mean([
            min(r * a, min(max(r, 1 - eps), 1 + eps) * a)
            for r, a in zip(ratios, adv)
        ])
        assert clipped_surrogate(ratios, adv, eps) == pytest.approx(want, rel=1e-12)


def test_surrogate_grad_matches_finite_differences():
    rng = np.random.default_rng(1)
    eps = 0.2
    for _ in range(20):
        n = 12
        old_logp = rng.standard_normal(n)
        logp = old_logp + rng.uniform(-0.15, 0.15, size=n)
        adv = rng.standard_normal(n)

        def loss_of(lp):
            return clipped_surrogate(np.exp(lp - old_logp), adv, eps)

        _, dlogp, _ = surrogate_grad(np.exp(logp - old_logp), adv, eps)
        h = 1e-7
        for i in range(n):
            lp = logp.copy(); lp[i] += h
            up = loss_of(lp)
            lp[i] -= 2 * h
            dn = loss_of(lp)
            fd = (up - dn) / (2 * h)
            assert dlogp[i] == pytest.approx(fd, rel=1e-4, abs=1e-9)


def test_surrogate_grad_zero_where_clip_binds():
    # Ratio far above 1+eps with positive advantage: clipped branch active.
    _, dlogp, frac = surrogate_grad(np.array([2.0]), np.array([1.0]), 0.1)
    assert dlogp[0] == 0.0
    assert frac == 1.0
    # Same ratio, negative advantage: unclipped branch is the minimum.
    _, dlogp, _ = surrogate_grad(np.array([2.0]), np.array([-1.0]), 0.1)
    assert dlogp[0] != 0.0


def test_gae_advantages_lambda_zero_td():
    rng = np.random.default_rng(2)
    rewards = rng.standard_normal(20)
    values = rng.standard_normal(20)
    next_values = rng.standard_normal(20)
    dones = np.zeros(20); dones[-1] = 1.0
    adv, ret = gae_advantages(rewards, values, next_values, dones, 0.99, 0.0,
                              normalize=False)
    td = rewards + 0.99 * (1 - dones) * next_values
    assert np.array_equal(ret, td)
    assert np.array_equal(adv, td - values)


def test_gae_normalization():
    rng = np.random.default_rng(3)
    adv, _ = gae_advantages(rng.standard_normal(50), rng.standard_normal(50),
                            rng.standard_normal(50), np.zeros(50), 0.99, 0.95)
    assert adv.mean() == pytest.approx(0.0, abs=1e-9)
    assert adv.std() == pytest.approx(1.0, abs=1e-6)


def test_critic_loss_oracle():
    v = np.array([1.0, 2.0, 3.0])
    t = np.array([1.5, 2.0, 2.0])
    assert critic_loss(v, t) == pytest.approx((0.25 + 0.0 + 1.0) / 3.0, rel=1e-12)


def _toy_batch(rng, n=64, sdim=4, adim=2):
    actor = SquashedGaussianPolicy(sdim, adim, (16,), rng)
    states = rng.standard_normal((n, sdim))
    _, u, logp = actor.sample(states, rng)
    return actor, {
        "states": states,
        "actions_u": u,
        "log_probs": logp,
        "advantages": rng.standard_normal(n),
        "targets": rng.standard_normal(n),
    }


def test_update_improves_surrogate_and_reports_stats():
    rng = np.random.default_rng(4)
    actor, batch = _toy_batch(rng)
    critic = MLP([4, 16, 1], rng)
    cfg = PpoConfig(epochs=4, minibatch_size=32, actor_lr=1e-3, critic_lr=1e-2)
    v0, _ = critic.forward(batch["states"])
    before = critic_loss(v0[:, 0], batch["targets"])
    stats = update(actor, critic, Adam(cfg.actor_lr), Adam(cfg.critic_lr),
                   batch, cfg, np.random.default_rng(0))
    for key in ("actor_loss", "critic_loss", "entropy", "clip_fraction", "approx_kl"):
        assert np.isfinite(stats[key])
    v1, _ = critic.forward(batch["states"])
    after = critic_loss(v1[:, 0], batch["targets"])
    assert after < before


def test_update_deterministic_given_rng():
    rng = np.random.default_rng(5)
    actor1, batch = _toy_batch(rng)
    import copy
    actor2 = copy.deepcopy(actor1)
    critic1 = MLP([4, 16, 1], np.random.default_rng(9))
    critic2 = copy.deepcopy(critic1)
    cfg = PpoConfig(epochs=2, minibatch_size=16, actor_lr=1e-3, critic_lr=1e-3)
    s1 = update(actor1, critic1, Adam(cfg.actor_lr), Adam(cfg.critic_lr),
                batch, cfg, np.random.default_rng(77))
    s2 = update(actor2, critic2, Adam(cfg.actor_lr), Adam(cfg.critic_lr),
                batch, cfg, np.random.default_rng(77))
    assert s1 == s2
    for (_, p1, _), (_, p2, _) in zip(actor1.param_items(), actor2.param_items()):
        assert np.array_equal(p1, p2)


def test_update_rejects_empty_batch():
    rng = np.random.default_rng(6)
    actor, batch = _toy_batch(rng, n=1)
    batch = {k: v[:0] for k, v in batch.items()}
    critic = MLP([4, 8, 1], rng)
    with pytest.raises(ValueError):
        update(actor, critic, Adam(1e-3), Adam(1e-3), batch,
               PpoConfig(), np.random.default_rng(0))


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(
            states=np.zeros((3, 2)), actions_u=np.zeros((2, 1)),
            actions=np.zeros((3, 1)), rewards=np.zeros(3), dones=np.zeros(3),
            next_states=np.zeros((3, 2)), log_probs=np.zeros(3), values=np.zeros(3),
        )


def test_ppo_config_validation():
    with pytest.raises(ValueError):
        PpoConfig(clip_eps=0.0)
    with pytest.raises(ValueError):
        PpoConfig(gamma=1.5)
