"""A small pre-LayerNorm encoder-decoder transformer in float64."""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn
import torch.nn.functional as F

from .vocab import PAD

DTYPE = torch.float64


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 64
    layer_count: int = 2
    head_count: int = 2
    feedforward_dim: int = 128
    max_source_len: int = 96
    max_target_len: int = 32
    seed: int = 0

    def __post_init__(self):
        for name in ("embed_dim", "layer_count", "head_count", "feedforward_dim",
                     "max_source_len", "max_target_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.embed_dim % self.head_count:
            raise ValueError("embed_dim must be divisible by head_count")


def sinusoidal_positions(length: int, dim: int) -> torch.Tensor:
    pos = torch.arange(length, dtype=DTYPE)[:, None]
    i = torch.arange(0, dim, 2, dtype=DTYPE)
    angle = pos / torch.pow(torch.tensor(10000.0, dtype=DTYPE), i / dim)
    pe = torch.zeros(length, dim, dtype=DTYPE)
    pe[:, 0::2] = torch.sin(angle)
    pe[:, 1::2] = torch.cos(angle[:, : dim // 2])
    return pe


class MultiHeadAttention(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.q = nn.Linear(dim, dim, dtype=DTYPE)
        self.k = nn.Linear(dim, dim, dtype=DTYPE)
        self.v = nn.Linear(dim, dim, dtype=DTYPE)
        self.out = nn.Linear(dim, dim, dtype=DTYPE)

    def _split(self, x):
        b, n, _ = x.shape
        return x.view(b, n, self.heads, self.head_dim).transpose(1, 2)

    def forward(self, query, key, value, mask=None, attn_log=None):
        """``mask`` is boolean, broadcastable to (batch, heads, q_len, k_len), True = attend."""
        q, k, v = self._split(self.q(query)), self._split(self.k(key)), self._split(self.v(value))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        if attn_log is not None:
            attn_log.append(weights)
        ctx = (weights @ v).transpose(1, 2).reshape(query.shape)
        return self.out(ctx)


class FeedForward(nn.Module):
    def __init__(self, dim: int, hidden: int):
        super().__init__()
        self.inp = nn.Linear(dim, hidden, dtype=DTYPE)
        self.outp = nn.Linear(hidden, dim, dtype=DTYPE)

    def forward(self, x):
        # GELU keeps the loss smooth for finite-difference checks
        return self.outp(F.gelu(self.inp(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
        self.attn = MultiHeadAttention(cfg.embed_dim, cfg.head_count)
        self.norm2 = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
        self.ff = FeedForward(cfg.embed_dim, cfg.feedforward_dim)

    def forward(self, x, mask, attn_log=None):
        h = self.norm1(x)
        x = x + self.attn(h, h, h, mask, attn_log)
        return x + self.ff(self.norm2(x))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
        self.self_attn = MultiHeadAttention(cfg.embed_dim, cfg.head_count)
        self.norm2 = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
        self.cross_attn = MultiHeadAttention(cfg.embed_dim, cfg.head_count)
        self.norm3 = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
        self.ff = FeedForward(cfg.embed_dim, cfg.feedforward_dim)

    def forward(self, y, memory, self_mask, cross_mask, attn_log=None):
        h = self.norm1(y)
        y = y + self.self_attn(h, h, h, self_mask, attn_log)
        y = y + self.cross_attn(self.norm2(y), memory, memory, cross_mask, attn_log)
        return y + self.ff(self.norm3(y))


class Seq2SeqTransformer(nn.Module):
    def __init__(self, cfg: ModelConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        # seeded init without disturbing the caller's global RNG
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(cfg.seed)
            self.embed = nn.Embedding(vocab_size, cfg.embed_dim, padding_idx=PAD, dtype=DTYPE)
            nn.init.normal_(self.embed.weight, std=cfg.embed_dim ** -0.5)
            with torch.no_grad():
                self.embed.weight[PAD].zero_()
            self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.layer_count))
            self.decoder = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.layer_count))
            self.enc_norm = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
            self.dec_norm = nn.LayerNorm(cfg.embed_dim, dtype=DTYPE)
            self.proj = nn.Linear(cfg.embed_dim, vocab_size, dtype=DTYPE)
        length = max(cfg.max_source_len, cfg.max_target_len) + 1
        self.register_buffer("positions", sinusoidal_positions(length, cfg.embed_dim),
                             persistent=False)

    def _embed(self, ids):
        x = self.embed(ids) * math.sqrt(self.cfg.embed_dim)
        return x + self.positions[: ids.shape[1]]

    def encode(self, src, attn_log=None):
        """Returns (memory, key mask) for a padded batch of source ids."""
        mask = (src != PAD)[:, None, None, :]
        x = self._embed(src)
        for layer in self.encoder:
            x = layer(x, mask, attn_log)
        return self.enc_norm(x), mask

    def decode(self, tgt_in, memory, src_mask, attn_log=None):
        """Logits for every decoder position given the shifted target prefix."""
        n = tgt_in.shape[1]
        causal = torch.ones(n, n, dtype=torch.bool).tril()[None, None]
        y = self._embed(tgt_in)
        for layer in self.decoder:
            y = layer(y, memory, causal, src_mask, attn_log)
        return self.proj(self.dec_norm(y))

    def forward(self, src, tgt_in, attn_log=None):
        memory, mask = self.encode(src, attn_log)
        return self.decode(tgt_in, memory, mask, attn_log)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
