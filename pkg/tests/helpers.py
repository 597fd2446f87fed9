"""Shared test utilities: flat parameter views and finite-difference checks."""

import numpy as np


def flat_params(net):
    """Concatenated copy of all parameters of a net exposing param_items()."""
    return np.concatenate([p.ravel() for _, p, _ in net.param_items()])


def flat_grads(net):
    return np.concatenate([g.ravel() for _, _, g in net.param_items()])


def set_flat_params(net, vec):
    i = 0
    for _, p, _ in net.param_items():
        p[...] = vec[i : i + p.size].reshape(p.shape)
        i += p.size
    assert i == vec.size


def numeric_grad(loss_fn, net, coords, h=1e-5):
    """Central finite differences of loss_fn() w.r.t. selected flat coords."""
    base = flat_params(net)
    out = np.empty(len(coords))
    for j, c in enumerate(coords):
        vec = base.copy()
        vec[c] = base[c] + h
        set_flat_params(net, vec)
        up = loss_fn()
        vec[c] = base[c] - h
        set_flat_params(net, vec)
        down = loss_fn()
        out[j] = (up - down) / (2.0 * h)
    set_flat_params(net, base)
    return out


def grad_check(loss_and_backward, net, rng, n_coords=30, h=1e-5, tol=1e-4):
    """Compare analytic gradients against central differences.

    ``loss_and_backward()`` must zero grads, run forward+backward and return
    the scalar loss; calling it again after a parameter change must recompute
    from scratch. Returns the max relative error over sampled coordinates.
    """
    loss_and_backward()
    analytic = flat_grads(net)
    n = analytic.size
    coords = rng.choice(n, size=min(n_coords, n), replace=False)
    fd = numeric_grad(lambda: loss_and_backward(), net, coords, h=h)
    got = analytic[coords]
    denom = np.maximum(np.abs(fd) + np.abs(got), 1e-6)
    err = float(np.max(np.abs(fd - got) / denom))
    assert err < tol, f"gradient mismatch: max rel err {err:.3e}"
    return err
