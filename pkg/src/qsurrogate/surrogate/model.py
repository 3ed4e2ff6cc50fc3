"""Encoder-decoder attention model over scalar token sequences.

Each input scalar becomes one token: the scalar times a learned embedding
vector, plus a learned positional encoding.  The encoder self-attends over
the input tokens; the decoder attends causally over previously emitted
output scalars (teacher-forced values during training, its own outputs at
inference) and cross-attends to the encoder memory.  A linear head emits one
scalar per decoder position.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, asdict

import numpy as np

from ..codec import FeatureKind
from .layers import DecoderLayer, EncoderLayer, LayerNorm, Linear


@dataclass(frozen=True)
class ModelConfig:
    input_len: int
    output_len: int
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    d_ff: int = 128
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.input_len < 1 or self.output_len < 1:
            raise ValueError("sequence lengths must be >= 1")
        if self.d_model % self.n_heads:
            raise ValueError("d_model must be divisible by n_heads")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


class EncoderDecoderRegressor:
    """The raw network; operates entirely in normalized feature space."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        c = config
        self.config = c
        s = 1.0 / math.sqrt(c.d_model)
        # one token per scalar position; each token embeds the raw value and
        # its sine/cosine through separate learned vectors.  The circuit maps
        # being fitted are polynomials in sin/cos of the inputs, and asking
        # the stack to synthesize the trigonometry internally trains orders
        # of magnitude slower.
        self.enc_embed = rng.normal(0.0, s, size=(c.input_len, c.d_model))
        self.enc_embed_sin = rng.normal(0.0, s, size=(c.input_len, c.d_model))
        self.enc_embed_cos = rng.normal(0.0, s, size=(c.input_len, c.d_model))
        self.enc_pos = rng.normal(0.0, s, size=(c.input_len, c.d_model))
        self.dec_embed = rng.normal(0.0, s, size=(c.output_len, c.d_model))
        self.dec_start = rng.normal(0.0, s, size=c.d_model)
        self.dec_pos = rng.normal(0.0, s, size=(c.output_len, c.d_model))
        self.g_enc_embed = np.zeros_like(self.enc_embed)
        self.g_enc_embed_sin = np.zeros_like(self.enc_embed_sin)
        self.g_enc_embed_cos = np.zeros_like(self.enc_embed_cos)
        self.g_enc_pos = np.zeros_like(self.enc_pos)
        self.g_dec_embed = np.zeros_like(self.dec_embed)
        self.g_dec_start = np.zeros_like(self.dec_start)
        self.g_dec_pos = np.zeros_like(self.dec_pos)
        # non-trainable input de-normalization so the trig embeddings see raw
        # values (sin/cos of a z-scored angle is not a harmonic of the angle)
        self.input_shift = np.zeros(c.input_len)
        self.input_stretch = np.ones(c.input_len)
        self.encoder = [
            EncoderLayer(c.d_model, c.n_heads, c.d_ff, rng, f"enc.{i}") for i in range(c.n_encoder_layers)
        ]
        self.enc_norm = LayerNorm(c.d_model, "enc.norm")
        self.decoder = [
            DecoderLayer(c.d_model, c.n_heads, c.d_ff, rng, f"dec.{i}") for i in range(c.n_decoder_layers)
        ]
        self.dec_norm = LayerNorm(c.d_model, "dec.norm")
        self.head = Linear(c.d_model, 1, rng, "head")
        # direct linear input->output path; softmax attention is slow to
        # express plain signed mixing of scalar tokens, so the stack only has
        # to learn the modulation on top of this.  Starts at zero.
        self.bypass = np.zeros((c.input_len, c.output_len))
        self.g_bypass = np.zeros_like(self.bypass)
        self._cache = None

    def set_input_stats(self, mean: np.ndarray, scale: np.ndarray) -> None:
        """Record the de-normalization used by the trig embeddings.

        Not trainable; persisted through the checkpoint's normalization
        metadata rather than as tensors.
        """
        self.input_shift = np.asarray(mean, dtype=float).copy()
        self.input_stretch = np.asarray(scale, dtype=float).copy()

    # -- parameter plumbing -------------------------------------------------

    def tensors(self):
        yield ("enc.embed", self.enc_embed, self.g_enc_embed)
        yield ("enc.embed_sin", self.enc_embed_sin, self.g_enc_embed_sin)
        yield ("enc.embed_cos", self.enc_embed_cos, self.g_enc_embed_cos)
        yield ("enc.pos", self.enc_pos, self.g_enc_pos)
        yield ("dec.embed", self.dec_embed, self.g_dec_embed)
        yield ("dec.start", self.dec_start, self.g_dec_start)
        yield ("dec.pos", self.dec_pos, self.g_dec_pos)
        yield ("bypass", self.bypass, self.g_bypass)
        for layer in self.encoder:
            yield from layer.tensors()
        yield from self.enc_norm.tensors()
        for layer in self.decoder:
            yield from layer.tensors()
        yield from self.dec_norm.tensors()
        yield from self.head.tensors()

    def named_tensors(self) -> dict:
        return {name: param for name, param, _ in self.tensors()}

    def n_parameters(self) -> int:
        return sum(p.size for _, p, _ in self.tensors())

    def zero_grads(self) -> None:
        for _, _, g in self.tensors():
            g[...] = 0.0

    def attention_maps(self):
        """Most recent softmax attention tensors, one per attention block."""
        maps = []
        for layer in self.encoder:
            maps.append(layer.attn.attn_probs)
        for layer in self.decoder:
            maps.append(layer.self_attn.attn_probs)
            maps.append(layer.cross_attn.attn_probs)
        return [m for m in maps if m is not None]

    # -- forward / backward ---------------------------------------------------

    def forward(self, x: np.ndarray, prev: np.ndarray) -> np.ndarray:
        """Teacher-forced forward pass.

        x: (B, input_len) normalized inputs.
        prev: (B, output_len) decoder-input scalars; prev[:, 0] is ignored
        (the learned start token sits there) and prev[:, j] is the target
        scalar for position j-1.  Causal masking keeps position j blind to
        prev[:, j+1:].
        """
        c = self.config
        b = x.shape[0]
        if x.shape != (b, c.input_len) or prev.shape != (b, c.output_len):
            raise ValueError("input/teacher shapes do not match the model config")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(prev))):
            raise ValueError("non-finite values fed to the network")

        raw = x * self.input_stretch + self.input_shift
        sin_raw, cos_raw = np.sin(raw), np.cos(raw)
        enc_in = (
            x[:, :, None] * self.enc_embed[None, :, :]
            + sin_raw[:, :, None] * self.enc_embed_sin[None, :, :]
            + cos_raw[:, :, None] * self.enc_embed_cos[None, :, :]
            + self.enc_pos[None, :, :]
        )
        h = enc_in
        for layer in self.encoder:
            h = layer.forward(h)
        memory = self.enc_norm.forward(h)

        dec_in = prev[:, :, None] * self.dec_embed[None, :, :] + self.dec_pos[None, :, :]
        dec_in[:, 0, :] = self.dec_start[None, :] + self.dec_pos[0][None, :]
        h = dec_in
        for layer in self.decoder:
            h = layer.forward(h, memory)
        out = self.dec_norm.forward(h)
        y = self.head.forward(out)[:, :, 0] + x @ self.bypass
        if not np.all(np.isfinite(y)):
            raise FloatingPointError("non-finite activations in forward pass")
        self._cache = (x, prev, sin_raw, cos_raw)
        return y

    def backward(self, dy: np.ndarray) -> None:
        """Accumulate parameter gradients for the last forward pass."""
        x, prev, sin_raw, cos_raw = self._cache
        self.g_bypass += x.T @ dy
        dout = self.head.backward(dy[:, :, None])
        dh = self.dec_norm.backward(dout)
        dmem_total = None
        for layer in reversed(self.decoder):
            dh, dmem = layer.backward(dh)
            dmem_total = dmem if dmem_total is None else dmem_total + dmem
        # dh is the gradient at the decoder token embeddings
        self.g_dec_start += dh[:, 0, :].sum(axis=0)
        self.g_dec_pos += dh.sum(axis=0)
        self.g_dec_embed[1:] += np.einsum("blj,bl->lj", dh[:, 1:, :], prev[:, 1:])
        dmem = self.enc_norm.backward(dmem_total)
        for layer in reversed(self.encoder):
            dmem = layer.backward(dmem)
        self.g_enc_pos += dmem.sum(axis=0)
        self.g_enc_embed += np.einsum("blj,bl->lj", dmem, x)
        self.g_enc_embed_sin += np.einsum("blj,bl->lj", dmem, sin_raw)
        self.g_enc_embed_cos += np.einsum("blj,bl->lj", dmem, cos_raw)

    def predict_sequence(self, x: np.ndarray) -> np.ndarray:
        """Autoregressive decoding: each emitted scalar feeds the next step.

        Produces exactly the teacher-forced output when the teacher scalars
        equal the model's own greedy outputs (causal masking makes position
        j depend only on positions <= j).
        """
        c = self.config
        prev = np.zeros((x.shape[0], c.output_len))
        y = None
        for j in range(c.output_len):
            y = self.forward(x, prev)
            if j + 1 < c.output_len:
                prev[:, j + 1] = y[:, j]
        return y


@dataclass
class SurrogateModel:
    """Trained network plus the normalization and family metadata needed to
    run it on raw angle/feature inputs."""

    config: ModelConfig
    net: EncoderDecoderRegressor
    family: str
    target_kind: FeatureKind
    input_mean: np.ndarray
    input_scale: np.ndarray
    target_mean: np.ndarray
    target_scale: np.ndarray
    # the net caches activations, so concurrent predictions serialize here
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def normalize_input(self, x: np.ndarray) -> np.ndarray:
        return (x - self.input_mean) / self.input_scale

    def normalize_target(self, y: np.ndarray) -> np.ndarray:
        return (y - self.target_mean) / self.target_scale

    def denormalize_output(self, y: np.ndarray) -> np.ndarray:
        return y * self.target_scale + self.target_mean
