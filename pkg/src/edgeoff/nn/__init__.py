from .layers import MLP, Linear
from .gru import GRUCell
from .adam import Adam
from .policy import SquashedGaussianPolicy, gaussian_log_prob
from . import checkpoint

__all__ = [
    "MLP",
    "Linear",
    "GRUCell",
    "Adam",
    "SquashedGaussianPolicy",
    "gaussian_log_prob",
    "checkpoint",
]
