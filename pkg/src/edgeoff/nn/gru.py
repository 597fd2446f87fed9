"""Gated recurrent cell with manual backpropagation through time."""

import numpy as np

from .layers import fan_in_uniform


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class GRUCell:
    def __init__(self, n_in, n_hidden, rng):
        self.n_in = n_in
        self.n_hidden = n_hidden

        def w(shape, fan):
            return fan_in_uniform(rng, fan, shape)

        self.Wz = w((n_hidden, n_in), n_in)
        self.Uz = w((n_hidden, n_hidden), n_hidden)
        self.bz = w((n_hidden,), n_hidden)
        self.Wr = w((n_hidden, n_in), n_in)
        self.Ur = w((n_hidden, n_hidden), n_hidden)
        self.br = w((n_hidden,), n_hidden)
        self.Wn = w((n_hidden, n_in), n_in)
        self.Un = w((n_hidden, n_hidden), n_hidden)
        self.bn = w((n_hidden,), n_hidden)
        self._names = ["Wz", "Uz", "bz", "Wr", "Ur", "br", "Wn", "Un", "bn"]
        for name in self._names:
            setattr(self, "g" + name, np.zeros_like(getattr(self, name)))

    def step(self, x, h):
        x = np.atleast_2d(x)
        h = np.atleast_2d(h)
        z = _sigmoid(x @ self.Wz.T + h @ self.Uz.T + self.bz)
        r = _sigmoid(x @ self.Wr.T + h @ self.Ur.T + self.br)
        rh = r * h
        n = np.tanh(x @ self.Wn.T + rh @ self.Un.T + self.bn)
        h_new = (1.0 - z) * h + z * n
        return h_new, (x, h, z, r, rh, n)

    def backward_step(self, dh_new, cache):
        """Backprop one step; returns (dx, dh_prev)."""
        x, h, z, r, rh, n = cache
        dz = dh_new * (n - h)
        dn_pre = dh_new * z * (1.0 - n * n)
        dh = dh_new * (1.0 - z)

        self.gWn += dn_pre.T @ x
        self.gUn += dn_pre.T @ rh
        self.gbn += dn_pre.sum(axis=0)
        drh = dn_pre @ self.Un
        dh += drh * r
        dr_pre = drh * h * r * (1.0 - r)
        dz_pre = dz * z * (1.0 - z)

        self.gWz += dz_pre.T @ x
        self.gUz += dz_pre.T @ h
        self.gbz += dz_pre.sum(axis=0)
        self.gWr += dr_pre.T @ x
        self.gUr += dr_pre.T @ h
        self.gbr += dr_pre.sum(axis=0)

        dh += dz_pre @ self.Uz + dr_pre @ self.Ur
        dx = dz_pre @ self.Wz + dr_pre @ self.Wr + dn_pre @ self.Wn
        return dx, dh

    def param_items(self, prefix=""):
        for name in self._names:
            yield prefix + name, getattr(self, name), getattr(self, "g" + name)

    def zero_grads(self):
        for name in self._names:
            getattr(self, "g" + name)[...] = 0.0
