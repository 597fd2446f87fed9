"""End-to-end compression pipeline on the toy network.

Stages: train a teacher on a synthetic task, score and prune it, recover
accuracy by distillation, quantize with calibrated clip ranges, and emit a
report plus a deployment stub. The deployment stage produces no binary; it
only records the target profile and size estimate.
"""

import copy
from dataclasses import dataclass, field

import numpy as np

from ..nn import Adam
from .distill import DistillConfig, distill_grad, distill_loss
from .importance import compute_importance
from .masks import build_masks
from .offline_metrics import offline_accuracy, offline_hallucination, read_jsonl
from .profiles import load_catalog
from .quant import fit_quant_range, quant_error, quantize
from .toynet import ToyNet, make_toy_task

BITS_PER_FLOAT = 64


@dataclass
class CompressionConfig:
    seed: int = 0
    n_embed: int = 8
    hidden: tuple = (16, 16)
    n_heads: int = 4
    n_out: int = 4
    calibration_size: int = 64
    # Pruning thresholds; None picks theta at the given quantile of the
    # pooled width scores (depth threshold defaults to the width one).
    theta: float | None = None
    theta_depth: float | None = None
    prune_quantile: float = 0.25
    q: int = 4
    grid: int = 32
    distill: DistillConfig = field(default_factory=lambda: DistillConfig(alpha=0.5, tau=2.0))
    teacher_epochs: int = 200
    distill_epochs: int = 300
    lr: float = 1e-2
    batch_size: int = 64
    target_profile: str = "ecld"
    qa_corpus: str | None = None
    hallucination_corpus: str | None = None


def _one_hot(labels, n_out):
    y = np.zeros((labels.shape[0], n_out))
    y[np.arange(labels.shape[0]), labels] = 1.0
    return y


def _train_epochs(net, x, y_onehot, epochs, lr, batch_size, rng, teacher=None, cfg=None):
    """Minibatch training; plain CE against labels unless a teacher is given."""
    opt = Adam(lr=lr)
    n = x.shape[0]
    plain = DistillConfig(alpha=0.0, tau=1.0)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            logits, cache = net.mlp.forward(x[idx])
            if teacher is None:
                g = distill_grad(logits, logits, y_onehot[idx], plain)
            else:
                g = distill_grad(logits, teacher.logits(x[idx]), y_onehot[idx], cfg)
            net.mlp.zero_grads()
            net.mlp.backward(g, cache)
            opt.step(net.mlp.param_items())
            yield


def _run_training(net, x, y_onehot, epochs, lr, batch_size, rng, mask=None,
                  teacher=None, cfg=None):
    for _ in _train_epochs(net, x, y_onehot, epochs, lr, batch_size, rng, teacher, cfg):
        if mask is not None:
            _project(net, mask)


def _project(net, mask):
    """Re-zero pruned weights (and the biases of fully removed units)."""
    for layer, m in enumerate(mask.combined):
        lay = net.mlp.layers[layer]
        lay.W *= m
        lay.b *= (m.sum(axis=1) > 0).astype(np.float64)


def run_pipeline(cfg):
    """Run prune -> distill -> quantize on the toy network; return the report."""
    rng = np.random.default_rng(cfg.seed)
    task = make_toy_task(rng, n_embed=cfg.n_embed, n_out=cfg.n_out)
    x_train, y_train = task["x_train"], task["y_train"]
    x_eval, y_eval = task["x_eval"], task["y_eval"]
    y_onehot = _one_hot(y_train, cfg.n_out)

    teacher = ToyNet(rng, cfg.n_embed, cfg.hidden, cfg.n_heads, cfg.n_out)
    _run_training(teacher, x_train, y_onehot, cfg.teacher_epochs, cfg.lr,
                  cfg.batch_size, rng)
    teacher_acc = teacher.accuracy(x_eval, y_eval)

    calibration = rng.standard_normal((cfg.calibration_size, cfg.n_embed))
    scores = compute_importance(teacher, calibration)
    theta = cfg.theta
    if theta is None:
        pooled = np.concatenate([scores.neuron.ravel(), scores.head.ravel(), scores.embed])
        theta = float(np.quantile(pooled, cfg.prune_quantile))
    theta_depth = cfg.theta_depth if cfg.theta_depth is not None else min(
        theta, float(scores.layer.min())
    )
    mask = build_masks(scores, theta, theta_depth)

    student = copy.deepcopy(teacher)
    _project(student, mask)
    pruned_acc = student.accuracy(x_eval, y_eval)

    _run_training(student, x_train, y_onehot, cfg.distill_epochs, cfg.lr,
                  cfg.batch_size, rng, mask=mask, teacher=teacher, cfg=cfg.distill)
    distilled_acc = student.accuracy(x_eval, y_eval)
    final_loss = distill_loss(student.logits(x_eval), teacher.logits(x_eval),
                              _one_hot(y_eval, cfg.n_out), cfg.distill)

    # Quantize weight matrices; clip ranges are fit on surviving entries and
    # pruned entries stay exactly zero.
    total_quant_error = 0.0
    n_weights = 0
    n_kept = 0
    n_bias = 0
    quant_ranges = {}
    hidden_masks = {id(student.mlp.layers[i].W): mask.combined[i]
                    for i in range(student.n_layers)}
    for i, lay in enumerate(student.mlp.layers):
        m = hidden_masks.get(id(lay.W))
        entries = lay.W[m > 0] if m is not None else lay.W.ravel()
        if entries.size and entries.min() != entries.max():
            spec = fit_quant_range(entries, cfg.q, cfg.grid)
            total_quant_error += quant_error(entries, spec)
            wq = quantize(lay.W, spec)
            lay.W[...] = wq if m is None else wq * m
            quant_ranges[f"l{i}"] = {"a": spec.a, "b": spec.b}
        n_weights += lay.W.size
        n_kept += int(np.count_nonzero(lay.W) if m is None else m.sum())
        n_bias += lay.b.size
    quantized_acc = student.accuracy(x_eval, y_eval)

    baseline_bits = (n_weights + n_bias) * BITS_PER_FLOAT
    # Kept weights at q bits, a 1-bit mask bitmap, biases left at full precision.
    compressed_bits = n_kept * cfg.q + n_weights + n_bias * BITS_PER_FLOAT
    storage_ratio = compressed_bits / baseline_bits

    qa = read_jsonl(cfg.qa_corpus) if cfg.qa_corpus else _default_corpus("qa_fixture.jsonl")
    hall = (read_jsonl(cfg.hallucination_corpus) if cfg.hallucination_corpus
            else _default_corpus("hallucination_fixture.jsonl"))
    catalog = load_catalog()
    base_energy = catalog["original"].energy_wh

    report = {
        "toy_task": {
            "teacher_accuracy": teacher_acc,
            "pruned_accuracy": pruned_acc,
            "distilled_accuracy": distilled_acc,
            "quantized_accuracy": quantized_acc,
            "distill_loss": final_loss,
        },
        "pruning": {
            "theta": theta,
            "theta_depth": theta_depth,
            "width_popcount": int(sum(m.sum() for m in mask.width)),
            "depth_kept_layers": int(mask.depth.sum()),
            "combined_popcount": mask.popcount(),
            "total_weights": n_weights,
        },
        "quantization": {
            "bit_width": cfg.q,
            "total_squared_error": total_quant_error,
            "ranges": quant_ranges,
        },
        "accuracy": offline_accuracy(qa, qa),
        "hallucination": offline_hallucination(hall),
        "accessibility": {
            "baseline_bits": baseline_bits,
            "compressed_bits": compressed_bits,
            "storage_ratio": storage_ratio,
            "storage_mb_estimate": compressed_bits / 8.0 / 1e6,
        },
        "energy": {
            "reference_wh": base_energy,
            "estimate_wh": float(base_energy * np.sqrt(storage_ratio)),
        },
        "deployment": {
            "status": "stub",
            "bit_width": cfg.q,
            "target_profile": cfg.target_profile,
            "size_estimate_bits": compressed_bits,
        },
    }
    return report, student


def _default_corpus(name):
    from importlib import resources

    return read_jsonl(resources.files("edgeoff.data") / name)
