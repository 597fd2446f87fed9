"""Leave-one-out importance scores for layers, neurons, heads and embeddings.

The score of a component is the mean absolute change in the network output
when that component's activations are zeroed over a calibration batch.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class ImportanceScores:
    layer: np.ndarray  # (n_layers,)
    neuron: np.ndarray  # (n_layers, hidden)
    head: np.ndarray  # (n_layers, n_heads)
    embed: np.ndarray  # (n_embed,)

    def __post_init__(self):
        for arr in (self.layer, self.neuron, self.head, self.embed):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("importance scores must be finite and nonnegative")


def compute_importance(net, calibration):
    """Score every structural component of ``net`` on a calibration batch."""
    x = np.atleast_2d(np.asarray(calibration, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValueError("calibration batch is empty")
    if x.shape[1] != net.n_embed:
        raise ValueError(f"calibration dim {x.shape[1]} != network input dim {net.n_embed}")

    base = net.logits(x)

    def delta(**kw):
        return float(np.mean(np.abs(net.logits_zeroed(x, **kw) - base)))

    layer = np.array([delta(layer=i) for i in range(net.n_layers)])
    neuron = np.array(
        [[delta(unit=(i, j)) for j in range(net.hidden[i])] for i in range(net.n_layers)]
    )
    head = np.array(
        [[delta(head=(i, g)) for g in range(net.n_heads)] for i in range(net.n_layers)]
    )
    embed = np.array([delta(embed=e) for e in range(net.n_embed)])
    return ImportanceScores(layer=layer, neuron=neuron, head=head, embed=embed)
