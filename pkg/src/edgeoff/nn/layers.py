"""Dense layers with hand-derived gradients (float64 throughout).

Forward passes return an explicit cache so several forward evaluations can be
in flight before their backward passes run. Gradients accumulate into the
layer's ``g*`` buffers until ``zero_grads`` is called.
"""

import numpy as np


def fan_in_uniform(rng, n_in, shape):
    bound = 1.0 / np.sqrt(n_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear:
    def __init__(self, n_in, n_out, rng):
        self.W = fan_in_uniform(rng, n_in, (n_out, n_in))
        self.b = fan_in_uniform(rng, n_in, (n_out,))
        self.gW = np.zeros_like(self.W)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        return x @ self.W.T + self.b

    def backward(self, dy, x):
        """Accumulate parameter grads; return grad w.r.t. the input."""
        self.gW += dy.T @ x
        self.gb += dy.sum(axis=0)
        return dy @ self.W

    def param_items(self, prefix=""):
        yield prefix + "W", self.W, self.gW
        yield prefix + "b", self.b, self.gb

    def zero_grads(self):
        self.gW[...] = 0.0
        self.gb[...] = 0.0


class MLP:
    """Feed-forward net, tanh on hidden layers, linear output."""

    def __init__(self, widths, rng):
        if len(widths) < 3:
            raise ValueError("need at least one hidden layer")
        self.widths = list(widths)
        self.layers = [Linear(widths[i], widths[i + 1], rng) for i in range(len(widths) - 1)]

    @property
    def in_dim(self):
        return self.widths[0]

    @property
    def out_dim(self):
        return self.widths[-1]

    def forward(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.in_dim:
            raise ValueError(f"expected input dim {self.in_dim}, got {x.shape[1]}")
        xs = [x]
        h = x
        last = len(self.layers) - 1
        for i, lay in enumerate(self.layers):
            h = lay.forward(h)
            if i < last:
                h = np.tanh(h)
            xs.append(h)
        return h, xs

    def backward(self, dy, cache):
        """Backprop ``dy`` through a cached forward; returns grad w.r.t. input."""
        xs = cache
        d = np.atleast_2d(np.asarray(dy, dtype=np.float64))
        last = len(self.layers) - 1
        for i in range(last, -1, -1):
            if i < last:
                a = xs[i + 1]
                d = d * (1.0 - a * a)
            d = self.layers[i].backward(d, xs[i])
        return d

    def param_items(self, prefix=""):
        for i, lay in enumerate(self.layers):
            yield from lay.param_items(f"{prefix}l{i}.")

    def zero_grads(self):
        for lay in self.layers:
            lay.zero_grads()
