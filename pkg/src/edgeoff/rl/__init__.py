from .ppo import (
    PpoConfig,
    Trajectory,
    prob_ratio,
    clipped_surrogate,
    surrogate_grad,
    gae_advantages,
    critic_loss,
    update,
)

__all__ = [
    "PpoConfig",
    "Trajectory",
    "prob_ratio",
    "clipped_surrogate",
    "surrogate_grad",
    "gae_advantages",
    "critic_loss",
    "update",
]
