from .rssm import (
    WmConfig,
    WorldModel,
    boosted_targets,
    gaussian_kl,
    gaussian_kl_grads,
)

__all__ = [
    "WmConfig",
    "WorldModel",
    "boosted_targets",
    "gaussian_kl",
    "gaussian_kl_grads",
]
