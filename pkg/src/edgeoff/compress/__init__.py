from .toynet import ToyNet, make_toy_task
from .importance import ImportanceScores, compute_importance
from .masks import PruningMask, build_masks, apply_mask
from .distill import DistillConfig, distill_loss, distill_grad, softmax
from .quant import QuantSpec, quantize, fit_quant_range
from .offline_metrics import offline_accuracy, offline_hallucination, read_jsonl
from .profiles import VariantProfile, load_catalog, default_catalog_path
from .pipeline import CompressionConfig, run_pipeline

__all__ = [
    "ToyNet",
    "make_toy_task",
    "ImportanceScores",
    "compute_importance",
    "PruningMask",
    "build_masks",
    "apply_mask",
    "DistillConfig",
    "distill_loss",
    "distill_grad",
    "softmax",
    "QuantSpec",
    "quantize",
    "fit_quant_range",
    "offline_accuracy",
    "offline_hallucination",
    "read_jsonl",
    "VariantProfile",
    "load_catalog",
    "default_catalog_path",
    "CompressionConfig",
    "run_pipeline",
]
