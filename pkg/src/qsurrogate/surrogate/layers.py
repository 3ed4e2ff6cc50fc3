"""Neural-net building blocks with explicit forward/backward passes.

Everything is plain numpy float64.  Each layer caches what its backward pass
needs, accumulates parameter gradients in `g_*` arrays, and exposes
`tensors()` as (name, param, grad) triples so the optimizer and checkpoints
can treat the whole model as a flat list of named arrays.
"""

from __future__ import annotations

import math

import numpy as np

_GELU_C0 = math.sqrt(2.0 / math.pi)
_GELU_C1 = 0.044715


def gelu(x: np.ndarray) -> np.ndarray:
    """tanh-form GELU; smooth, so central differences converge cleanly."""
    x2 = x * x
    u = _GELU_C0 * x * (1.0 + _GELU_C1 * x2)
    return 0.5 * x * (1.0 + np.tanh(u))


def _gelu_with_cache(x: np.ndarray):
    x2 = x * x
    t = np.tanh(_GELU_C0 * x * (1.0 + _GELU_C1 * x2))
    return 0.5 * x * (1.0 + t), (x2, t)


def _gelu_grad_cached(x: np.ndarray, cache) -> np.ndarray:
    x2, t = cache
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C0 * (1.0 + 3.0 * _GELU_C1 * x2)


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return _gelu_grad_cached(x, _gelu_with_cache(x)[1])


def softmax_last(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - np.max(x, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


class Linear:
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, name: str):
        scale = math.sqrt(2.0 / (d_in + d_out))
        self.name = name
        self.w = rng.normal(0.0, scale, size=(d_in, d_out))
        self.b = np.zeros(d_out)
        self.g_w = np.zeros_like(self.w)
        self.g_b = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._x
        x2 = x.reshape(-1, x.shape[-1])
        dy2 = dy.reshape(-1, dy.shape[-1])
        self.g_w += x2.T @ dy2
        self.g_b += dy2.sum(axis=0)
        return dy @ self.w.T

    def tensors(self):
        yield (f"{self.name}.w", self.w, self.g_w)
        yield (f"{self.name}.b", self.b, self.g_b)


class LayerNorm:
    def __init__(self, d: int, name: str, eps: float = 1e-6):
        self.name = name
        self.eps = eps
        self.gamma = np.ones(d)
        self.beta = np.zeros(d)
        self.g_gamma = np.zeros_like(self.gamma)
        self.g_beta = np.zeros_like(self.beta)
        self._xhat = None
        self._inv_std = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        mu = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv_std
        self._xhat = xhat
        self._inv_std = inv_std
        return xhat * self.gamma + self.beta

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xhat, inv_std = self._xhat, self._inv_std
        self.g_gamma += (dy * xhat).reshape(-1, dy.shape[-1]).sum(axis=0)
        self.g_beta += dy.reshape(-1, dy.shape[-1]).sum(axis=0)
        dxhat = dy * self.gamma
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        return inv_std * (dxhat - m1 - xhat * m2)

    def tensors(self):
        yield (f"{self.name}.gamma", self.gamma, self.g_gamma)
        yield (f"{self.name}.beta", self.beta, self.g_beta)


class FeedForward:
    """Gated feed-forward: W2 (gelu(W1 x) * (Wg x)).

    The multiplicative gate matters here: the circuit maps being fitted are
    products of trigonometric features, and a gate forms those products at
    full strength instead of through activation curvature.
    """

    def __init__(self, d_model: int, d_ff: int, rng: np.random.Generator, name: str):
        self.lin1 = Linear(d_model, d_ff, rng, f"{name}.lin1")
        self.gate = Linear(d_model, d_ff, rng, f"{name}.gate")
        self.lin2 = Linear(d_ff, d_model, rng, f"{name}.lin2")
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        pre = self.lin1.forward(x)
        gate = self.gate.forward(x)
        act, gcache = _gelu_with_cache(pre)
        self._cache = (pre, gcache, act, gate)
        return self.lin2.forward(act * gate)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        pre, gcache, act, gate = self._cache
        dh = self.lin2.backward(dy)
        dx = self.gate.backward(dh * act)
        dx += self.lin1.backward(dh * gate * _gelu_grad_cached(pre, gcache))
        return dx

    def tensors(self):
        yield from self.lin1.tensors()
        yield from self.gate.tensors()
        yield from self.lin2.tensors()


class MultiHeadAttention:
    """Scaled dot-product attention; self-attention when both inputs are the
    same array, cross-attention otherwise.  `causal` masks future positions.
    """

    def __init__(self, d_model: int, n_heads: int, rng: np.random.Generator, name: str, causal: bool = False):
        if d_model % n_heads:
            raise ValueError("d_model must be divisible by n_heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.causal = causal
        self.wq = Linear(d_model, d_model, rng, f"{name}.wq")
        self.wk = Linear(d_model, d_model, rng, f"{name}.wk")
        self.wv = Linear(d_model, d_model, rng, f"{name}.wv")
        self.wo = Linear(d_model, d_model, rng, f"{name}.wo")
        self.attn_probs = None  # (B, H, Lq, Lk), kept for inspection
        self._cache = None

    def _split(self, x: np.ndarray) -> np.ndarray:
        b, l, _ = x.shape
        return x.reshape(b, l, self.n_heads, self.d_head).transpose(0, 2, 1, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        b, _, l, _ = x.shape
        return x.transpose(0, 2, 1, 3).reshape(b, l, self.d_model)

    def forward(self, x_q: np.ndarray, x_kv: np.ndarray) -> np.ndarray:
        q = self._split(self.wq.forward(x_q))
        k = self._split(self.wk.forward(x_kv))
        v = self._split(self.wv.forward(x_kv))
        scores = q @ k.transpose(0, 1, 3, 2) / math.sqrt(self.d_head)
        if self.causal:
            lq, lk = scores.shape[-2], scores.shape[-1]
            mask = np.triu(np.full((lq, lk), -1e30), k=1)
            scores = scores + mask
        probs = softmax_last(scores)
        self.attn_probs = probs
        ctx = probs @ v
        self._cache = (q, k, v, probs)
        return self.wo.forward(self._merge(ctx))

    def backward(self, dy: np.ndarray):
        """Returns (d_x_q, d_x_kv); for self-attention add them."""
        q, k, v, probs = self._cache
        dctx = self._split(self.wo.backward(dy))
        dprobs = dctx @ v.transpose(0, 1, 3, 2)
        dv = probs.transpose(0, 1, 3, 2) @ dctx
        dscores = probs * (dprobs - np.sum(dprobs * probs, axis=-1, keepdims=True))
        dscores /= math.sqrt(self.d_head)
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q
        dxq = self.wq.backward(self._merge(dq))
        dxkv = self.wk.backward(self._merge(dk)) + self.wv.backward(self._merge(dv))
        return dxq, dxkv

    def tensors(self):
        yield from self.wq.tensors()
        yield from self.wk.tensors()
        yield from self.wv.tensors()
        yield from self.wo.tensors()


class EncoderLayer:
    """Pre-norm self-attention block followed by a pre-norm feed-forward."""

    def __init__(self, d_model, n_heads, d_ff, rng, name):
        self.ln1 = LayerNorm(d_model, f"{name}.ln1")
        self.attn = MultiHeadAttention(d_model, n_heads, rng, f"{name}.attn")
        self.ln2 = LayerNorm(d_model, f"{name}.ln2")
        self.ff = FeedForward(d_model, d_ff, rng, f"{name}.ff")

    def forward(self, x):
        h = self.ln1.forward(x)
        x = x + self.attn.forward(h, h)
        return x + self.ff.forward(self.ln2.forward(x))

    def backward(self, dout):
        dx = dout + self.ln2.backward(self.ff.backward(dout))
        dq, dkv = self.attn.backward(dx)
        return dx + self.ln1.backward(dq + dkv)

    def tensors(self):
        for part in (self.ln1, self.attn, self.ln2, self.ff):
            yield from part.tensors()


class DecoderLayer:
    """Causal self-attention, cross-attention over the encoder memory, then
    feed-forward; all pre-norm with residuals."""

    def __init__(self, d_model, n_heads, d_ff, rng, name):
        self.ln1 = LayerNorm(d_model, f"{name}.ln1")
        self.self_attn = MultiHeadAttention(d_model, n_heads, rng, f"{name}.self_attn", causal=True)
        self.ln2 = LayerNorm(d_model, f"{name}.ln2")
        self.cross_attn = MultiHeadAttention(d_model, n_heads, rng, f"{name}.cross_attn")
        self.ln3 = LayerNorm(d_model, f"{name}.ln3")
        self.ff = FeedForward(d_model, d_ff, rng, f"{name}.ff")

    def forward(self, x, memory):
        h = self.ln1.forward(x)
        x = x + self.self_attn.forward(h, h)
        x = x + self.cross_attn.forward(self.ln2.forward(x), memory)
        return x + self.ff.forward(self.ln3.forward(x))

    def backward(self, dout):
        dx = dout + self.ln3.backward(self.ff.backward(dout))
        dh2, dmem = self.cross_attn.backward(dx)
        dx = dx + self.ln2.backward(dh2)
        dq, dkv = self.self_attn.backward(dx)
        return dx + self.ln1.backward(dq + dkv), dmem

    def tensors(self):
        for part in (self.ln1, self.self_attn, self.ln2, self.cross_attn, self.ln3, self.ff):
            yield from part.tensors()
