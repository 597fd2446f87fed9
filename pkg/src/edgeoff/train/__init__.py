from .trainer import (
    ALGORITHMS,
    RunConfig,
    Trainer,
    baseline_policy,
    evaluate_policy,
    run_baseline,
)

__all__ = [
    "ALGORITHMS",
    "RunConfig",
    "Trainer",
    "baseline_policy",
    "evaluate_policy",
    "run_baseline",
]
