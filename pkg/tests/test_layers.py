"""Layer-by-layer gradient checks against central finite differences.

Every layer type gets its parameters and inputs perturbed coordinate by
coordinate; the analytic backward pass must agree to 1e-4 relative error.
"""

import numpy as np
import pytest

from qsurrogate.surrogate.layers import (
    DecoderLayer,
    EncoderLayer,
    FeedForward,
    LayerNorm,
    Linear,
    MultiHeadAttention,
    gelu,
    gelu_grad,
    softmax_last,
)

EPS = 1e-5
TOL = 1e-4


def _rel_err(a, n):
    # floor sits above central-difference roundoff, so exactly-zero
    # gradients (e.g. key biases under softmax shift invariance) are not
    # flagged by FD noise
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-5)
    return np.max(np.abs(a - n) / denom)


def _fd_grad(loss_fn, arr):
    g = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + EPS
        hi = loss_fn()
        flat[i] = orig - EPS
        lo = loss_fn()
        flat[i] = orig
        gf[i] = (hi - lo) / (2 * EPS)
    return g


def _check_layer(layer, forward, x_shapes, seed=0):
    """Compare analytic grads (inputs and params) to finite differences."""
    rng = np.random.default_rng(seed)
    xs = [rng.normal(size=s) for s in x_shapes]
    probe = rng.normal(size=forward(*xs).shape)

    def loss():
        return float(np.sum(forward(*xs) * probe))

    # analytic
    for _, _, g in layer.tensors():
        g[...] = 0.0
    out = forward(*xs)
    dxs = layer.backward(probe)
    if not isinstance(dxs, tuple):
        dxs = (dxs,)
    # parameter gradients
    for name, p, g in layer.tensors():
        fd = _fd_grad(loss, p)
        assert _rel_err(g, fd) < TOL, f"parameter {name}"
    # input gradients
    for k, x in enumerate(xs):
        fd = _fd_grad(loss, x)
        assert _rel_err(dxs[k], fd) < TOL, f"input {k}"
    return out


class TestActivations:
    def test_gelu_grad_matches_fd(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=64)
        fd = (gelu(x + EPS) - gelu(x - EPS)) / (2 * EPS)
        assert _rel_err(gelu_grad(x), fd) < 1e-6

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(2)
        s = softmax_last(rng.normal(size=(3, 4, 5, 6)))
        np.testing.assert_allclose(s.sum(axis=-1), np.ones((3, 4, 5)), atol=1e-12)


class TestLinear:
    def test_gradients(self):
        rng = np.random.default_rng(3)
        lin = Linear(5, 7, rng, "lin")
        _check_layer(lin, lin.forward, [(2, 3, 5)])


class TestLayerNorm:
    def test_gradients(self):
        ln = LayerNorm(6, "ln")
        # non-trivial affine params so their gradients are exercised
        rng = np.random.default_rng(4)
        ln.gamma[...] = rng.normal(size=6)
        ln.beta[...] = rng.normal(size=6)
        _check_layer(ln, ln.forward, [(2, 3, 6)])

    def test_normalizes_last_axis(self):
        rng = np.random.default_rng(5)
        ln = LayerNorm(8, "ln")
        y = ln.forward(rng.normal(loc=3.0, scale=2.0, size=(4, 8)))
        np.testing.assert_allclose(y.mean(axis=-1), np.zeros(4), atol=1e-7)


class TestFeedForward:
    def test_gradients(self):
        rng = np.random.default_rng(6)
        ff = FeedForward(4, 9, rng, "ff")
        _check_layer(ff, ff.forward, [(2, 3, 4)])


class TestAttention:
    def test_self_attention_gradients(self):
        rng = np.random.default_rng(7)
        attn = MultiHeadAttention(8, 2, rng, "attn")

        def fwd(x):
            return attn.forward(x, x)

        xs = [rng.normal(size=(2, 3, 8))]
        probe = rng.normal(size=fwd(*xs).shape)

        def loss():
            return float(np.sum(fwd(*xs) * probe))

        for _, _, g in attn.tensors():
            g[...] = 0.0
        fwd(*xs)
        dq, dkv = attn.backward(probe)
        for name, p, g in attn.tensors():
            assert _rel_err(g, _fd_grad(loss, p)) < TOL, name
        assert _rel_err(dq + dkv, _fd_grad(loss, xs[0])) < TOL

    def test_cross_attention_gradients(self):
        rng = np.random.default_rng(8)
        attn = MultiHeadAttention(8, 2, rng, "xattn")
        _check_layer(attn, attn.forward, [(2, 3, 8), (2, 5, 8)])

    def test_causal_mask_blocks_future(self):
        rng = np.random.default_rng(9)
        attn = MultiHeadAttention(8, 2, rng, "causal", causal=True)
        x = rng.normal(size=(1, 4, 8))
        base = attn.forward(x, x)
        x2 = x.copy()
        x2[0, 3, :] += 10.0  # later token must not affect earlier outputs
        pert = attn.forward(x2, x2)
        np.testing.assert_allclose(pert[0, :3], base[0, :3], atol=1e-12)
        assert np.max(np.abs(pert[0, 3] - base[0, 3])) > 1e-3

    def test_attention_rows_are_probabilities(self):
        rng = np.random.default_rng(10)
        attn = MultiHeadAttention(8, 4, rng, "attn", causal=True)
        x = rng.normal(size=(3, 5, 8))
        attn.forward(x, x)
        sums = attn.attn_probs.sum(axis=-1)
        np.testing.assert_allclose(sums, np.ones_like(sums), atol=1e-6)

    def test_causal_self_attention_gradients(self):
        rng = np.random.default_rng(11)
        attn = MultiHeadAttention(4, 1, rng, "causal", causal=True)

        def fwd(x):
            return attn.forward(x, x)

        xs = [rng.normal(size=(1, 3, 4))]
        probe = rng.normal(size=fwd(*xs).shape)

        def loss():
            return float(np.sum(fwd(*xs) * probe))

        for _, _, g in attn.tensors():
            g[...] = 0.0
        fwd(*xs)
        dq, dkv = attn.backward(probe)
        for name, p, g in attn.tensors():
            assert _rel_err(g, _fd_grad(loss, p)) < TOL, name
        assert _rel_err(dq + dkv, _fd_grad(loss, xs[0])) < TOL


class TestBlocks:
    def test_encoder_layer_gradients(self):
        rng = np.random.default_rng(12)
        layer = EncoderLayer(8, 2, 12, rng, "enc")
        _check_layer(layer, layer.forward, [(2, 3, 8)])

    def test_decoder_layer_gradients(self):
        rng = np.random.default_rng(13)
        layer = DecoderLayer(8, 2, 12, rng, "dec")
        _check_layer(layer, layer.forward, [(1, 3, 8), (1, 4, 8)])

    def test_heads_must_divide_d_model(self):
        with pytest.raises(ValueError):
            MultiHeadAttention(6, 4, np.random.default_rng(0), "bad")
