"""Hot numeric kernels.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback.
The fallback is selected by setting ``EDGEOFF_NO_NUMBA=1`` in the environment
before import (useful on platforms without a working JIT); see
``benchmarks/bench_kernels.py`` for a comparison of both paths.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("EDGEOFF_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    from numba import njit


def _lambda_returns_loop(rewards, next_values, dones, gamma, lam):
    T = rewards.shape[0]
    out = np.empty(T, dtype=np.float64)
    out[T - 1] = rewards[T - 1] + gamma * (1.0 - dones[T - 1]) * next_values[T - 1]
    for t in range(T - 2, -1, -1):
        mixed = (1.0 - lam) * next_values[t] + lam * out[t + 1]
        out[t] = rewards[t] + gamma * (1.0 - dones[t]) * mixed
    return out


def _quant_grid_errors_loop(w, q, a_grid, b_grid):
    n_levels = 2.0**q - 1.0
    na, nb = a_grid.shape[0], b_grid.shape[0]
    errs = np.full((na, nb), np.inf, dtype=np.float64)
    for i in range(na):
        a = a_grid[i]
        for j in range(nb):
            b = b_grid[j]
            if b <= a:
                continue
            step = (b - a) / n_levels
            acc = 0.0
            for k in range(w.shape[0]):
                x = w[k]
                if x < a:
                    x = a
                elif x > b:
                    x = b
                qk = np.round((x - a) / step) * step + a
                d = w[k] - qk
                acc += d * d
            errs[i, j] = acc
    return errs


def _quant_grid_errors_np(w, q, a_grid, b_grid):
    n_levels = 2.0**q - 1.0
    a = a_grid[:, None, None]
    b = b_grid[None, :, None]
    feasible = b > a
    step = np.where(feasible, (b - a) / n_levels, 1.0)
    x = np.clip(w[None, None, :], a, b)
    quantized = np.round((x - a) / step) * step + a
    errs = np.sum((w[None, None, :] - quantized) ** 2, axis=2)
    return np.where(feasible[:, :, 0], errs, np.inf)


if USE_NUMBA:
    _lambda_returns_jit = njit(cache=True)(_lambda_returns_loop)
    _quant_grid_errors_jit = njit(cache=True)(_quant_grid_errors_loop)


def lambda_returns(rewards, next_values, dones, gamma, lam):
    """Backward lambda-return recursion with terminal masking by done flags."""
    rewards = np.ascontiguousarray(rewards, dtype=np.float64)
    next_values = np.ascontiguousarray(next_values, dtype=np.float64)
    dones = np.ascontiguousarray(dones, dtype=np.float64)
    if USE_NUMBA:
        return _lambda_returns_jit(rewards, next_values, dones, float(gamma), float(lam))
    return _lambda_returns_loop(rewards, next_values, dones, float(gamma), float(lam))


def quant_grid_errors(w, q, a_grid, b_grid):
    """Squared reconstruction error of affine quantization over an (a, b) grid.

    Returns a ``(len(a_grid), len(b_grid))`` error matrix; infeasible cells
    (b <= a) are +inf.
    """
    w = np.ascontiguousarray(w, dtype=np.float64).ravel()
    a_grid = np.ascontiguousarray(a_grid, dtype=np.float64)
    b_grid = np.ascontiguousarray(b_grid, dtype=np.float64)
    if USE_NUMBA:
        return _quant_grid_errors_jit(w, int(q), a_grid, b_grid)
    return _quant_grid_errors_np(w, int(q), a_grid, b_grid)
