"""Finite-difference gradient checks and persistence round-trips."""

import numpy as np
import pytest

from edgeoff.nn.adam import Adam
from edgeoff.nn.checkpoint import load, restore_params, save
from edgeoff.nn.gru import GRUCell
from edgeoff.nn.layers import MLP
from edgeoff.nn.policy import (
    SquashedGaussianPolicy,
    gaussian_log_prob,
    squash_correction,
)

from helpers import grad_check


def test_mlp_gradients():
    rng = np.random.default_rng(0)
    for i in range(5):
        net = MLP([3, 8, 5, 2], np.random.default_rng(100 + i))
        x = rng.standard_normal((6, 3))
        w = rng.standard_normal((6, 2))

        def loss():
            net.zero_grads()
            y, cache = net.forward(x)
            net.backward(w, cache)
            return float(np.sum(w * y))

        grad_check(loss, net, rng)


def test_mlp_input_gradient():
    rng = np.random.default_rng(1)
    net = MLP([4, 6, 3], rng)
    x = rng.standard_normal((2, 4))
    w = rng.standard_normal((2, 3))
    y, cache = net.forward(x)
    dx = net.backward(w, cache)
    h = 1e-6
    for r in range(2):
        for c in range(4):
            xp = x.copy()
            xp[r, c] += h
            up, _ = net.forward(xp)
            xp[r, c] -= 2 * h
            dn, _ = net.forward(xp)
            fd = np.sum(w * (up - dn)) / (2 * h)
            assert dx[r, c] == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_gru_bptt_gradients():
    rng = np.random.default_rng(2)
    for i in range(3):
        cell = GRUCell(3, 5, np.random.default_rng(200 + i))
        L = int(rng.integers(2, 8))
        xs = rng.standard_normal((L, 1, 3))
        w = rng.standard_normal((1, 5))

        def loss():
            cell.zero_grads()
            h = np.zeros((1, 5))
            caches = []
            for t in range(L):
                h, cache = cell.step(xs[t], h)
                caches.append(cache)
            dh = w.copy()
            for t in range(L - 1, -1, -1):
                _, dh = cell.backward_step(dh, caches[t])
            return float(np.sum(w * h))

        grad_check(loss, cell, rng)


def test_policy_log_prob_gradients():
    rng = np.random.default_rng(3)
    for i in range(3):
        pol = SquashedGaussianPolicy(4, 2, (8,), np.random.default_rng(300 + i))
        states = rng.standard_normal((5, 4))
        u = rng.standard_normal((5, 2))
        w = rng.standard_normal(5)

        def loss():
            pol.zero_grads()
            logp, cache = pol.log_prob(states, u)
            pol.backward_log_prob(w, cache)
            return float(np.sum(w * logp))

        grad_check(loss, pol, rng)


def test_policy_entropy_gradients():
    rng = np.random.default_rng(4)
    for i in range(3):
        pol = SquashedGaussianPolicy(3, 2, (8,), np.random.default_rng(400 + i))
        states = rng.standard_normal((6, 3))
        eps = rng.standard_normal((6, 2))

        def loss():
            pol.zero_grads()
            ent, cache = pol.entropy(states, eps)
            pol.backward_entropy(0.7, cache)
            return 0.7 * ent

        grad_check(loss, pol, rng)


def test_squashed_density_consistency():
    """log_prob equals Gaussian density plus the exact |da/du| correction."""
    rng = np.random.default_rng(5)
    pol = SquashedGaussianPolicy(3, 2, (8,), rng)
    states = rng.standard_normal((4, 3))
    a, u, logp = pol.sample(states, rng)
    assert np.all((a > 0.0) & (a < 1.0))
    mu, _ = pol.mean_net.forward(states)
    want = gaussian_log_prob(u, mu, pol.log_std) - np.sum(np.log(a * (1.0 - a)), axis=-1)
    np.testing.assert_allclose(logp, want, rtol=1e-10)
    np.testing.assert_allclose(
        squash_correction(u), -np.sum(np.log(a * (1.0 - a)), axis=-1), rtol=1e-10
    )


def test_adam_matches_hand_computed_steps():
    opt = Adam(lr=0.1, beta1=0.9, beta2=0.999, eps=1e-8)
    p = np.array([1.0])
    g = np.array([2.0])
    # First step: m=0.2, v=0.004, mhat=2, vhat=4 -> p -= 0.1*2/(2+1e-8).
    opt.step([("p", p, g)])
    assert p[0] == pytest.approx(1.0 - 0.1 * 2.0 / (2.0 + 1e-8), rel=1e-12)
    # Second step with g=1: m=0.28, v=0.004996.
    mhat = (0.9 * 0.2 + 0.1 * 1.0) / (1 - 0.9**2)
    vhat = (0.999 * 0.004 + 0.001 * 1.0) / (1 - 0.999**2)
    want = p[0] - 0.1 * mhat / (np.sqrt(vhat) + 1e-8)
    opt.step([("p", p, np.array([1.0]))])
    assert p[0] == pytest.approx(want, rel=1e-12)


def test_adam_state_roundtrip():
    rng = np.random.default_rng(6)
    p1 = rng.standard_normal(4)
    p2 = p1.copy()
    opt1 = Adam(lr=0.01)
    for _ in range(3):
        opt1.step([("p", p1, p1**2)])
    opt2 = Adam(lr=0.01)
    opt2.load_state(opt1.t, dict(opt1.state_items()))
    p2[...] = p1
    opt1.step([("p", p1, p1**2)])
    opt2.step([("p", p2, p2**2)])
    assert np.array_equal(p1, p2)


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    net = MLP([3, 5, 2], rng)
    path = tmp_path / "ck.npz"
    save(path, {"net": [(k, p) for k, p, _ in net.param_items()]}, meta={"it": 3})
    meta, sections = load(path)
    assert meta["it"] == 3
    other = MLP([3, 5, 2], np.random.default_rng(99))
    restore_params(other, sections["net"])
    for (_, p1, _), (_, p2, _) in zip(net.param_items(), other.param_items()):
        assert np.array_equal(p1, p2)


def test_checkpoint_rejects_mismatch(tmp_path):
    rng = np.random.default_rng(8)
    net = MLP([3, 5, 2], rng)
    path = tmp_path / "ck.npz"
    save(path, {"net": [(k, p) for k, p, _ in net.param_items()]})
    _, sections = load(path)
    wrong = MLP([3, 6, 2], np.random.default_rng(1))
    with pytest.raises((ValueError, KeyError)):
        restore_params(wrong, sections["net"])
