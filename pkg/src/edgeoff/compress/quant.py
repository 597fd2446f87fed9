"""Affine lattice quantizer and clip-range calibration."""

from dataclasses import dataclass, field

import numpy as np

from ..kernels import quant_grid_errors


@dataclass
class QuantSpec:
    q: int
    a: float
    b: float
    degenerate: bool = field(default=False)

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("bit width must be >= 1")
        if self.b <= self.a:
            raise ValueError("upper clip must exceed lower clip")

    @property
    def step(self):
        return (self.b - self.a) / (2.0**self.q - 1.0)


def quantize(weights, spec):
    """Clamp to [a, b], then round to the nearest lattice level."""
    w = np.clip(np.asarray(weights, dtype=np.float64), spec.a, spec.b)
    return np.round((w - spec.a) / spec.step) * spec.step + spec.a


def quant_error(weights, spec):
    w = np.asarray(weights, dtype=np.float64)
    return float(np.sum((w - quantize(w, spec)) ** 2))


def fit_quant_range(weights, q, grid=32):
    """Coarse-to-fine grid search for the (a, b) pair minimizing the squared
    reconstruction error. Never worse than the naive (min, max) range."""
    if grid < 2:
        raise ValueError("grid must have at least 2 points per axis")
    w = np.asarray(weights, dtype=np.float64).ravel()
    lo, hi = float(w.min()), float(w.max())
    if lo == hi:
        return QuantSpec(q=q, a=lo, b=lo + 1e-9, degenerate=True)

    def search(a_grid, b_grid):
        errs = quant_grid_errors(w, q, a_grid, b_grid)
        i, j = np.unravel_index(np.argmin(errs), errs.shape)
        return float(a_grid[i]), float(b_grid[j]), float(errs[i, j])

    a_grid = np.linspace(lo, hi, grid)
    b_grid = np.linspace(lo, hi, grid)
    a0, b0, _ = search(a_grid, b_grid)

    # One refinement pass around the coarse optimum.
    cell = (hi - lo) / (grid - 1)
    a_grid = np.linspace(max(lo, a0 - cell), min(hi, a0 + cell), grid)
    b_grid = np.linspace(max(lo, b0 - cell), min(hi, b0 + cell), grid)
    a1, b1, err1 = search(a_grid, b_grid)

    naive = QuantSpec(q=q, a=lo, b=hi)
    if quant_error(w, naive) <= err1:
        return naive
    return QuantSpec(q=q, a=a1, b=b1)
