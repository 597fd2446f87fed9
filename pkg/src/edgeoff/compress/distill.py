"""Teacher-student distillation loss: cross-entropy plus softened KL."""

from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


@dataclass
class DistillConfig:
    alpha: float = 0.5
    tau: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")


def softmax(logits, tau=1.0):
    z = np.asarray(logits, dtype=np.float64) / tau
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check(student_logits, teacher_logits, labels):
    if student_logits.shape != teacher_logits.shape:
        raise ValueError("student and teacher logits must have the same shape")
    if labels.shape != student_logits.shape:
        raise ValueError("labels must be one-hot with the logits' shape")


def distill_loss(student_logits, teacher_logits, labels, cfg):
    """Batch mean of (1-alpha)*CE(y, p_s) + alpha*KL(p_t(tau) || p_s(tau))."""
    student_logits = np.atleast_2d(np.asarray(student_logits, dtype=np.float64))
    teacher_logits = np.atleast_2d(np.asarray(teacher_logits, dtype=np.float64))
    labels = np.atleast_2d(np.asarray(labels, dtype=np.float64))
    _check(student_logits, teacher_logits, labels)

    p_s = softmax(student_logits)
    ce = -np.sum(labels * np.log(p_s + _EPS), axis=1)

    p_s_tau = softmax(student_logits, cfg.tau)
    p_t_tau = softmax(teacher_logits, cfg.tau)
    kl = np.sum(p_t_tau * (np.log(p_t_tau + _EPS) - np.log(p_s_tau + _EPS)), axis=1)

    return float(np.mean((1.0 - cfg.alpha) * ce + cfg.alpha * kl))


def distill_grad(student_logits, teacher_logits, labels, cfg):
    """Gradient of distill_loss w.r.t. the student logits."""
    student_logits = np.atleast_2d(np.asarray(student_logits, dtype=np.float64))
    teacher_logits = np.atleast_2d(np.asarray(teacher_logits, dtype=np.float64))
    labels = np.atleast_2d(np.asarray(labels, dtype=np.float64))
    _check(student_logits, teacher_logits, labels)

    n = student_logits.shape[0]
    g_ce = softmax(student_logits) - labels
    g_kl = (softmax(student_logits, cfg.tau) - softmax(teacher_logits, cfg.tau)) / cfg.tau
    return ((1.0 - cfg.alpha) * g_ce + cfg.alpha * g_kl) / n
