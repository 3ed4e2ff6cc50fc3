"""Finite-difference validation of the hand-written backward pass."""

from __future__ import annotations

import numpy as np

from .model import SurrogateModel
from .training import _shifted

MAX_CHECKED_PARAMETERS = 10**5


def _loss_and_grads(net, x, prev, y):
    net.zero_grads()
    yhat = net.forward(x, prev)
    err = yhat - y
    net.backward(2.0 * err / err.size)
    return float(np.mean(err**2))


def _loss_only(net, x, prev, y):
    yhat = net.forward(x, prev)
    return float(np.mean((yhat - y) ** 2))


def grad_check(
    model: SurrogateModel,
    sample,
    epsilon: float = 1e-5,
    fraction: float = 0.01,
    seed: int = 0,
) -> float:
    """Compare analytic MSE gradients with central finite differences.

    `sample` is one (input, target) pair in raw units.  A random `fraction`
    of each tensor's entries is probed (at least one per tensor).  Returns
    the worst relative error over all probed entries.
    """
    net = model.net
    if net.n_parameters() > MAX_CHECKED_PARAMETERS:
        raise ValueError(f"model too large for finite differences (> {MAX_CHECKED_PARAMETERS} parameters)")
    x_raw, y_raw = sample
    x = model.normalize_input(np.asarray(x_raw, dtype=float).reshape(1, -1))
    y = model.normalize_target(np.asarray(y_raw, dtype=float).reshape(1, -1))
    prev = _shifted(y)

    _loss_and_grads(net, x, prev, y)
    analytic = {name: g.copy() for name, _, g in net.tensors()}

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, p, _ in net.tensors():
        k = max(1, int(round(fraction * p.size)))
        flat_idx = rng.choice(p.size, size=min(k, p.size), replace=False)
        for fi in flat_idx:
            orig = p.flat[fi]
            p.flat[fi] = orig + epsilon
            hi = _loss_only(net, x, prev, y)
            p.flat[fi] = orig - epsilon
            lo = _loss_only(net, x, prev, y)
            p.flat[fi] = orig
            numeric = (hi - lo) / (2.0 * epsilon)
            a = analytic[name].flat[fi]
            # the 1e-5 floor keeps central-difference roundoff on exactly-zero
            # gradients (key biases cancel under softmax shift invariance)
            # from registering as relative error
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-5)
            worst = max(worst, rel)
    return worst
