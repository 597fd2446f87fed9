"""Adaptive-moment optimizer with bias correction."""

import numpy as np


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, items):
        """In-place update from an iterable of ``(key, param, grad)``."""
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for key, p, g in items:
            m = self.m.get(key)
            if m is None:
                m = self.m[key] = np.zeros_like(p)
                self.v[key] = np.zeros_like(p)
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state_items(self):
        """Moment buffers for checkpointing, keyed deterministically."""
        for key in sorted(self.m):
            yield "m." + key, self.m[key]
            yield "v." + key, self.v[key]

    def load_state(self, t, arrays):
        self.t = int(t)
        self.m = {}
        self.v = {}
        for key, arr in arrays.items():
            kind, name = key.split(".", 1)
            getattr(self, kind)[name] = np.array(arr, dtype=np.float64)
