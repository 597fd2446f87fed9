"""Stochastic per-slot QoS draws calibrated to a variant profile.

Replaces token-level similarity scoring (which needs live model outputs) with
Beta draws whose means equal the profile's offline accuracy/hallucination."""

import numpy as np


def _beta_with_mean(mean, concentration, rng):
    if mean <= 0.0:
        return 0.0
    if mean >= 1.0:
        return 1.0
    a = mean * concentration
    b = (1.0 - mean) * concentration
    return float(np.clip(rng.beta(a, b), 0.0, 1.0))


def sample_slot_qos(profile, rng, concentration=50.0, deterministic=False):
    """Draw (accuracy, hallucination) for one slot from the profile."""
    if deterministic:
        return profile.offline_accuracy, profile.offline_hallucination
    return (
        _beta_with_mean(profile.offline_accuracy, concentration, rng),
        _beta_with_mean(profile.offline_hallucination, concentration, rng),
    )
