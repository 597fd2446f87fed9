"""Binary pruning masks: width (neuron/head/embed), depth (layer), combined."""

from dataclasses import dataclass

import numpy as np


@dataclass
class PruningMask:
    width: list  # per hidden layer, binary array matching the weight shape
    depth: np.ndarray  # (n_layers,) binary
    combined: list  # width[l] * depth[l]

    def popcount(self):
        return int(sum(int(m.sum()) for m in self.combined))


def build_masks(scores, theta, theta_depth=None):
    """Threshold importance scores into masks; entry is 1 iff score >= theta.

    ``theta`` gates width pruning (neurons, heads, embeddings); depth pruning
    uses ``theta_depth`` when given, otherwise the same threshold.
    """
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    theta_depth = theta if theta_depth is None else theta_depth

    n_layers, hidden = scores.neuron.shape
    n_heads = scores.head.shape[1]
    n_embed = scores.embed.shape[0]
    head_size = hidden // n_heads

    keep_neuron = scores.neuron >= theta
    keep_head = np.repeat(scores.head >= theta, head_size, axis=1)
    keep_embed = scores.embed >= theta
    depth = (scores.layer >= theta_depth).astype(np.float64)

    width = []
    for layer in range(n_layers):
        rows = (keep_neuron[layer] & keep_head[layer]).astype(np.float64)
        n_in = n_embed if layer == 0 else hidden
        cols = keep_embed.astype(np.float64) if layer == 0 else np.ones(n_in)
        width.append(np.outer(rows, cols))

    combined = [width[layer] * depth[layer] for layer in range(n_layers)]
    return PruningMask(width=width, depth=depth, combined=combined)


def apply_mask(weights, mask):
    """Hadamard product of a weight tensor and a binary mask."""
    weights = np.asarray(weights, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    try:
        return weights * mask
    except ValueError as exc:
        raise ValueError(f"mask shape {mask.shape} does not broadcast with weights "
                         f"{weights.shape}") from exc
