"""Diagonal-Gaussian policy head squashed to the unit interval.

Actions live in (0, 1) per dimension via a sigmoid of an unbounded Gaussian
sample u = mu + sigma * eps. Trajectories store u, so re-evaluating densities
under updated parameters never round-trips through an inverse sigmoid.
"""

import numpy as np

from .layers import MLP

LOG_2PI = np.log(2.0 * np.pi)


def _softplus(x):
    return np.logaddexp(0.0, x)


def gaussian_log_prob(u, mu, log_std):
    """Unsquashed diagonal-Gaussian log density, summed over dims."""
    sigma2 = np.exp(2.0 * log_std)
    return np.sum(-0.5 * (u - mu) ** 2 / sigma2 - log_std - 0.5 * LOG_2PI, axis=-1)


def squash_correction(u):
    """-log |da/du| for a = sigmoid(u), summed over dims."""
    return np.sum(_softplus(u) + _softplus(-u), axis=-1)


class SquashedGaussianPolicy:
    def __init__(self, state_dim, action_dim, hidden, rng, init_log_std=-0.5):
        self.mean_net = MLP([state_dim, *hidden, action_dim], rng)
        self.log_std = np.full(action_dim, float(init_log_std))
        self.g_log_std = np.zeros_like(self.log_std)

    @property
    def action_dim(self):
        return self.log_std.shape[0]

    def sample(self, states, rng):
        """Returns (actions in (0,1), pre-squash u, log-probs)."""
        mu, _ = self.mean_net.forward(states)
        eps = rng.standard_normal(mu.shape)
        u = mu + np.exp(self.log_std) * eps
        logp = gaussian_log_prob(u, mu, self.log_std) + squash_correction(u)
        return 1.0 / (1.0 + np.exp(-u)), u, logp

    def mean_action(self, states):
        mu, _ = self.mean_net.forward(states)
        return 1.0 / (1.0 + np.exp(-mu))

    def log_prob(self, states, u):
        """Log-probs of stored pre-squash actions; cache feeds backward_log_prob."""
        mu, net_cache = self.mean_net.forward(states)
        logp = gaussian_log_prob(u, mu, self.log_std) + squash_correction(u)
        return logp, (net_cache, mu, u)

    def backward_log_prob(self, dlogp, cache):
        """Accumulate d(sum_i dlogp_i * logp_i)/dparams.

        u is a constant here (density evaluation of fixed actions)."""
        net_cache, mu, u = cache
        inv_var = np.exp(-2.0 * self.log_std)
        diff = u - mu
        w = np.asarray(dlogp, dtype=np.float64)[:, None]
        self.g_log_std += np.sum(w * (diff * diff * inv_var - 1.0), axis=0)
        self.mean_net.backward(w * diff * inv_var, net_cache)

    def entropy(self, states, eps):
        """Reparameterized entropy estimate -E[log pi(a|s)] with frozen noise.

        Returns (estimate, cache); the estimate is a mean over the batch of
        per-sample entropies summed over action dims.
        """
        mu, net_cache = self.mean_net.forward(states)
        sigma = np.exp(self.log_std)
        u = mu + sigma * eps
        a = 1.0 / (1.0 + np.exp(-u))
        # -log pi = -log N(u) + log(a(1-a)); the correction is negative.
        neglogp = (
            0.5 * eps * eps
            + self.log_std
            + 0.5 * LOG_2PI
            - (_softplus(u) + _softplus(-u))
        )
        ent = float(np.mean(np.sum(neglogp, axis=-1)))
        return ent, (net_cache, a, eps, sigma, states.shape[0])

    def backward_entropy(self, dent, cache):
        """Accumulate gradients of dent * entropy_estimate."""
        net_cache, a, eps, sigma, n = cache
        # d(-log pi)/du = d log(a(1-a))/du = 1 - 2a, with u = mu + sigma*eps.
        du = (1.0 - 2.0 * a) * (dent / n)
        self.g_log_std += np.sum(du * sigma * eps, axis=0) + dent * np.ones_like(
            self.log_std
        )
        self.mean_net.backward(du, net_cache)

    def param_items(self, prefix=""):
        yield from self.mean_net.param_items(prefix + "mean.")
        yield prefix + "log_std", self.log_std, self.g_log_std

    def zero_grads(self):
        self.mean_net.zero_grads()
        self.g_log_std[...] = 0.0
