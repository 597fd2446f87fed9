"""Geometry, Rician fading, and interference-limited uplink rates."""

import numpy as np


def distance(mlu_pos, mec_pos, h_mec):
    """3-D separation between a ground user and the elevated server antenna."""
    if h_mec < 0:
        raise ValueError("antenna height must be nonnegative")
    dx = mlu_pos[0] - mec_pos[0]
    dy = mlu_pos[1] - mec_pos[1]
    return float(np.sqrt(dx * dx + dy * dy + h_mec * h_mec))


def rician_fading(kappa, rng, size=None):
    """|sqrt(k/(k+1)) + sqrt(1/(k+1)) * CN(0,1)|^2; unit mean."""
    hbar = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    los = np.sqrt(kappa / (kappa + 1.0))
    scatter = np.sqrt(1.0 / (kappa + 1.0))
    return np.abs(los + scatter * hbar) ** 2


def channel_gain(d, g0, kappa, rng, deterministic=False):
    """Path loss g0/d^2 times Rician small-scale fading.

    ``deterministic`` takes the LoS-only (kappa -> inf) limit, giving exactly
    g0/d^2."""
    if d <= 0:
        raise ValueError("distance must be positive")
    large_scale = g0 / (d * d)
    if deterministic:
        return large_scale
    return large_scale * rician_fading(kappa, rng)


def uplink_rate(k, powers, gains, bandwidth_hz, noise_power_w):
    """Shannon rate under mutual interference from all other transmitters."""
    powers = np.asarray(powers, dtype=np.float64)
    gains = np.asarray(gains, dtype=np.float64)
    if powers.shape != gains.shape:
        raise ValueError("powers and gains must have equal length")
    received = powers * gains
    interference = received.sum() - received[k]
    sinr = received[k] / (interference + noise_power_w)
    return bandwidth_hz * np.log2(1.0 + sinr)


def all_uplink_rates(powers, gains, bandwidth_hz, noise_power_w):
    powers = np.asarray(powers, dtype=np.float64)
    gains = np.asarray(gains, dtype=np.float64)
    received = powers * gains
    interference = received.sum() - received
    return bandwidth_hz * np.log2(1.0 + received / (interference + noise_power_w))
