"""Small dense network with named structural groups.

Hidden units are partitioned into contiguous "heads", input features play the
role of embedding dimensions, and hidden layers are the depth-pruning targets.
This exercises every score category of the compression pipeline without any
transformer machinery.
"""

import numpy as np

from ..nn import MLP


class ToyNet:
    def __init__(self, rng, n_embed=8, hidden=(16, 16), n_heads=4, n_out=4):
        for h in hidden:
            if h % n_heads != 0:
                raise ValueError("hidden width must be divisible by n_heads")
        self.n_embed = n_embed
        self.hidden = tuple(hidden)
        self.n_heads = n_heads
        self.n_out = n_out
        self.mlp = MLP([n_embed, *hidden, n_out], rng)

    @property
    def n_layers(self):
        return len(self.hidden)

    @property
    def hidden_weights(self):
        return [self.mlp.layers[i].W for i in range(self.n_layers)]

    def head_slice(self, layer, head):
        size = self.hidden[layer] // self.n_heads
        return slice(head * size, (head + 1) * size)

    def logits(self, x):
        out, _ = self.mlp.forward(x)
        return out

    def logits_zeroed(self, x, layer=None, unit=None, head=None, embed=None):
        """Forward pass with one structural component's activations zeroed."""
        h = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if embed is not None:
            h = h.copy()
            h[:, embed] = 0.0
        last = len(self.mlp.layers) - 1
        for i, lay in enumerate(self.mlp.layers):
            h = lay.forward(h)
            if i < last:
                h = np.tanh(h)
                if layer == i:
                    h = np.zeros_like(h)
                if unit is not None and unit[0] == i:
                    h = h.copy()
                    h[:, unit[1]] = 0.0
                if head is not None and head[0] == i:
                    h = h.copy()
                    h[:, self.head_slice(i, head[1])] = 0.0
        return h

    def predict(self, x):
        return np.argmax(self.logits(x), axis=1)

    def accuracy(self, x, labels):
        return float(np.mean(self.predict(x) == labels))


def make_toy_task(rng, n_train=512, n_eval=256, n_embed=8, n_out=4):
    """Synthetic classification task labelled by a fixed random network."""
    oracle = ToyNet(rng, n_embed=n_embed, hidden=(16,), n_heads=4, n_out=n_out)
    x_train = rng.standard_normal((n_train, n_embed))
    x_eval = rng.standard_normal((n_eval, n_embed))
    return {
        "x_train": x_train,
        "y_train": oracle.predict(x_train),
        "x_eval": x_eval,
        "y_eval": oracle.predict(x_eval),
    }
