"""World model: KL oracles, full-BPTT gradient checks, targets, imagination."""

import copy

import numpy as np
import pytest

from edgeoff.nn.policy import SquashedGaussianPolicy
from edgeoff.wm.rssm import (
    WmConfig,
    WorldModel,
    boosted_targets,
    gaussian_kl,
    gaussian_kl_grads,
)

from helpers import flat_grads, grad_check


def _small_model(seed=0, n_obs=4, n_act=2):
    cfg = WmConfig(n_obs=n_obs, n_action=n_act, n_h=5, n_z=3, hidden=8)
    return cfg, WorldModel(cfg, np.random.default_rng(seed))


def test_gaussian_kl_closed_form_examples():
    # Identical distributions.
    z = np.zeros((1, 3))
    assert gaussian_kl(z, z, z, z)[0] == pytest.approx(0.0, abs=1e-15)
    # KL(N(1,1) || N(0,1)) = 0.5 per dim.
    mu_q = np.ones((1, 2))
    assert gaussian_kl(mu_q, np.zeros((1, 2)), np.zeros((1, 2)),
                       np.zeros((1, 2)))[0] == pytest.approx(1.0, rel=1e-12)


def test_gaussian_kl_matches_monte_carlo():
    rng = np.random.default_rng(0)
    mu_q = rng.standard_normal((1, 2))
    ls_q = rng.uniform(-0.4, 0.2, size=(1, 2))
    mu_p = rng.standard_normal((1, 2))
    ls_p = rng.uniform(-0.4, 0.2, size=(1, 2))
    want = gaussian_kl(mu_q, ls_q, mu_p, ls_p)[0]

    n = 1_000_000
    z = mu_q + np.exp(ls_q) * rng.standard_normal((n, 2))

    def logpdf(x, mu, ls):
        return np.sum(-0.5 * ((x - mu) / np.exp(ls)) ** 2 - ls
                      - 0.5 * np.log(2 * np.pi), axis=1)

    mc = np.mean(logpdf(z, mu_q, ls_q) - logpdf(z, mu_p, ls_p))
    assert mc == pytest.approx(want, rel=0.02)


def test_gaussian_kl_grads_match_finite_differences():
    rng = np.random.default_rng(1)
    args = [rng.standard_normal((1, 3)) * 0.5 for _ in range(4)]
    grads = gaussian_kl_grads(*args)
    h = 1e-6
    for ai in range(4):
        for j in range(3):
            up = [a.copy() for a in args]; up[ai][0, j] += h
            dn = [a.copy() for a in args]; dn[ai][0, j] -= h
            fd = (gaussian_kl(*up)[0] - gaussian_kl(*dn)[0]) / (2 * h)
            assert grads[ai][0, j] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_world_model_loss_gradients():
    """Full BPTT against central differences; fresh noise stream per call so
    the loss is a deterministic function of the parameters."""
    rng = np.random.default_rng(2)
    for i in range(3):
        cfg, wm = _small_model(seed=100 + i)
        T = 4
        obs_seq = rng.standard_normal((T + 1, cfg.n_obs))
        actions = rng.uniform(0, 1, size=(T, cfg.n_action))
        rewards = rng.standard_normal(T)
        dones = np.zeros(T); dones[-1] = 1.0

        def loss():
            wm.zero_grads()
            out = wm.loss_and_grad(obs_seq, actions, rewards, dones,
                                   np.random.default_rng(55))
            return out["total"]

        grad_check(loss, wm, rng, n_coords=25)


def test_loss_components_nonnegative():
    cfg, wm = _small_model()
    rng = np.random.default_rng(3)
    obs_seq = rng.standard_normal((6, cfg.n_obs))
    actions = rng.uniform(0, 1, size=(5, cfg.n_action))
    out = wm.loss_and_grad(obs_seq, actions, rng.standard_normal(5),
                           np.zeros(5), rng)
    assert out["obs"] >= 0 and out["reward"] >= 0
    assert out["done"] >= 0 and out["kl"] >= 0


def test_boosted_targets_oracle_and_lambda_zero():
    rng = np.random.default_rng(4)
    T = 30
    real = rng.standard_normal(T)
    d = (rng.uniform(size=T) < 0.1).astype(float)
    pr = rng.standard_normal(T)
    pnv = rng.standard_normal(T)
    y = boosted_targets(real, d, pr, pnv, 0.99, 0.3)
    want = 0.7 * real + 0.3 * (pr + 0.99 * (1 - d) * pnv)
    np.testing.assert_allclose(y, want, rtol=1e-12)
    # lambda_wm = 0 recovers the real targets exactly (bitwise).
    y0 = boosted_targets(real, d, pr, pnv, 0.99, 0.0)
    assert np.array_equal(y0, real)


def test_predict_next_deterministic():
    cfg, wm = _small_model()
    rng = np.random.default_rng(5)
    obs = rng.standard_normal((3, cfg.n_obs))
    act = rng.uniform(0, 1, size=(3, cfg.n_action))
    o1, r1, d1 = wm.predict_next(obs, act)
    o2, r2, d2 = wm.predict_next(obs, act)
    assert np.array_equal(o1, o2) and np.array_equal(r1, r2)
    assert o1.shape == (3, cfg.n_obs) and r1.shape == (3,)
    assert np.all((d1 > 0) & (d1 < 1))


def test_uncertainty_and_selection():
    cfg, wm = _small_model()
    rng = np.random.default_rng(6)
    obs = rng.standard_normal((10, cfg.n_obs))
    scores = wm.uncertainty(obs)
    assert scores.shape == (10,)
    assert np.all(scores >= -1e-10)
    idx = wm.select_low_uncertainty(obs, 0.3)
    assert len(idx) == 3
    assert set(scores[idx]) == set(np.sort(scores)[:3])
    with pytest.raises(ValueError):
        wm.select_low_uncertainty(obs, 0.0)


def test_training_reduces_prediction_error():
    cfg = WmConfig(n_obs=3, n_action=1, n_h=16, n_z=8, hidden=32)
    wm = WorldModel(cfg, np.random.default_rng(7))
    rng = np.random.default_rng(8)
    from edgeoff.nn.adam import Adam

    opt = Adam(1e-2)
    # Simple linear dynamics to learn: o' = 0.8 o + a, r = sum(o).
    def episode():
        o = rng.standard_normal(3)
        obs, acts, rews = [o], [], []
        for _ in range(10):
            a = rng.uniform(0, 1, size=1)
            o = 0.8 * o + a
            obs.append(o); acts.append(a); rews.append(float(np.sum(o)))
        return np.array(obs), np.array(acts), np.array(rews), np.zeros(10)

    first = None
    for i in range(120):
        obs, acts, rews, dones = episode()
        wm.zero_grads()
        out = wm.loss_and_grad(obs, acts, rews, dones, rng)
        opt.step(wm.param_items())
        if first is None:
            first = out["total"]
    assert out["total"] < 0.5 * first


def test_imagine_shapes_and_purity():
    """Imagination touches only the model and consumes only its own rng."""
    cfg, wm = _small_model()
    actor = SquashedGaussianPolicy(cfg.n_obs, cfg.n_action, (8,), np.random.default_rng(9))
    rng = np.random.default_rng(10)
    obs = rng.standard_normal((4, cfg.n_obs))
    before = {k: p.copy() for k, p, _ in wm.param_items()}
    roll = wm.imagine(obs, actor, 3, np.random.default_rng(11))
    for key in ("obs", "actions_u", "rewards", "cont", "next_obs"):
        assert roll[key].shape[0] == 4 * 3
    assert np.all((roll["cont"] >= 0) & (roll["cont"] <= 1))
    after = {k: p for k, p, _ in wm.param_items()}
    assert all(np.array_equal(before[k], after[k]) for k in before)
    # First imagined step conditions on the real observations.
    np.testing.assert_array_equal(roll["obs"][:4], obs)


def test_wm_config_validation():
    with pytest.raises(ValueError):
        WmConfig(n_obs=2, n_action=1, lambda_wm=1.5)
    with pytest.raises(ValueError):
        WmConfig(n_obs=2, n_action=1, horizon=-1)


def test_loss_rejects_misaligned_sequences():
    cfg, wm = _small_model()
    rng = np.random.default_rng(12)
    with pytest.raises(ValueError):
        wm.loss_and_grad(rng.standard_normal((4, cfg.n_obs)),
                         rng.uniform(size=(4, cfg.n_action)),
                         np.zeros(4), np.zeros(4), rng)
