"""Per-slot latency, energy, QoS blending, and the constraint penalty."""

import numpy as np


def local_cost(alpha, x_bits, f_k, phi, kappa_comp):
    """Latency and energy of processing the (1-alpha) local share."""
    share = (1.0 - alpha) * phi * x_bits
    latency = share / f_k
    energy = kappa_comp * f_k * f_k * share
    return latency, energy


def offload_cost(alpha, x_bits, rate, power_w, phi_mec, mec_freq, slot_cap_s=10.0):
    """Uplink latency/energy and edge compute latency of the alpha share.

    An offload attempt with zero rate is an infeasible slot: the uplink
    latency is capped instead of diverging."""
    if alpha <= 0.0:
        return 0.0, 0.0, 0.0
    if rate <= 0.0:
        l_off = slot_cap_s
    else:
        l_off = min(alpha * x_bits / rate, slot_cap_s)
    e_off = power_w * l_off
    l_mec = alpha * phi_mec * x_bits / mec_freq
    return l_off, l_mec, e_off


def qos_blend(alpha, a_local, h_local, a_mec, h_mec):
    """Effective slot QoS: linear blend of local and edge quality by alpha."""
    a_tilde = alpha * a_mec + (1.0 - alpha) * a_local
    h_tilde = alpha * h_mec + (1.0 - alpha) * h_local
    return a_tilde, h_tilde


def penalty(a_tilde, h_tilde, energy, cfg):
    """Aggregate hinge penalty over accuracy, hallucination, and energy.

    All three terms aggregate across users (sum form)."""
    a_tilde = np.asarray(a_tilde, dtype=np.float64)
    h_tilde = np.asarray(h_tilde, dtype=np.float64)
    energy = np.asarray(energy, dtype=np.float64)
    K = a_tilde.shape[0]
    acc_term = max(K * cfg.a_min - a_tilde.sum(), 0.0)
    hall_term = max(h_tilde.sum() - K * cfg.h_max, 0.0)
    energy_term = max(energy.sum() - K * cfg.e_max_j, 0.0)
    return acc_term + hall_term + energy_term, (acc_term, hall_term, energy_term)
