"""Teacher-forced training and a finite-difference gradient check."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .model import ModelConfig, Seq2SeqTransformer
from .vocab import BOS, EOS, PAD, Vocab

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-4
    batch_size: int = 32
    epochs: int = 30

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("learning_rate and batch_size must be positive, epochs >= 0")


def _pad(seqs: Sequence[Sequence[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    out = torch.full((len(seqs), width), PAD, dtype=torch.long)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = torch.tensor(s, dtype=torch.long)
    return out


def encode_batch(pairs, vocab: Vocab, cfg: ModelConfig):
    """Padded (source, decoder input, decoder output) id tensors."""
    src, tin, tout = [], [], []
    for p in pairs:
        s = vocab.encode(p.source)
        t = vocab.encode(p.target)
        if len(s) > cfg.max_source_len:
            raise ValueError(f"source of {len(s)} tokens exceeds max_source_len "
                             f"{cfg.max_source_len}: {p.source[:60]!r}")
        if len(t) + 1 > cfg.max_target_len:
            raise ValueError(f"target of {len(t)} tokens exceeds max_target_len "
                             f"{cfg.max_target_len}: {p.target[:60]!r}")
        src.append(s)
        tin.append([BOS] + t)
        tout.append(t + [EOS])
    return _pad(src), _pad(tin), _pad(tout)


def sequence_loss(model: Seq2SeqTransformer, batch, reduction: str = "mean") -> torch.Tensor:
    src, tin, tout = batch
    logits = model(src, tin)
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), tout.reshape(-1),
                           ignore_index=PAD, reduction=reduction)


def train(pairs, vocab: Vocab, model_config: ModelConfig = ModelConfig(),
          train_config: TrainConfig = TrainConfig(), model: Seq2SeqTransformer | None = None):
    """Train from the config seed; returns ``(model, per-epoch mean token loss)``."""
    pairs = list(pairs)
    if model is None:
        model = Seq2SeqTransformer(model_config, len(vocab))
    src, tin, tout = encode_batch(pairs, vocab, model_config)
    n_tokens = (tout != PAD).sum(dim=1)
    opt = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate)
    rng = np.random.default_rng(model_config.seed)
    losses = []
    model.train()
    for epoch in range(train_config.epochs):
        order = rng.permutation(len(pairs))
        total, count = 0.0, 0
        for start in range(0, len(order), train_config.batch_size):
            idx = torch.as_tensor(order[start:start + train_config.batch_size])
            # trim padding columns the batch does not need
            s_w = int((src[idx] != PAD).sum(dim=1).max())
            t_w = int(n_tokens[idx].max())
            batch = (src[idx, :s_w], tin[idx, :t_w], tout[idx, :t_w])
            loss = sequence_loss(model, batch)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss {loss.item()} at epoch {epoch}, batch starting {start}; "
                    f"lr={train_config.learning_rate}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            k = int(n_tokens[idx].sum())
            total += loss.item() * k
            count += k
        losses.append(total / count)
        log.info("epoch %d loss %.4f", epoch, losses[-1])
    model.eval()
    return model, losses


def grad_check(model: Seq2SeqTransformer, pairs, vocab: Vocab, epsilon: float = 1e-4,
               coordinates: int = 200, seed: int = 0) -> float:
    """Largest relative error between autograd and central differences.

    ``coordinates`` parameter entries are drawn uniformly over all parameters.
    """
    batch = encode_batch(pairs, vocab, model.cfg)
    params = [p for p in model.parameters() if p.requires_grad]
    model.zero_grad()
    sequence_loss(model, batch, reduction="sum").backward()
    sizes = np.array([p.numel() for p in params])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    rng = np.random.default_rng(seed)
    picks = rng.choice(offsets[-1], size=min(coordinates, offsets[-1]), replace=False)
    worst = 0.0
    with torch.no_grad():
        for flat in picks:
            k = int(np.searchsorted(offsets, flat, side="right") - 1)
            p, j = params[k].view(-1), int(flat - offsets[k])
            analytic = params[k].grad.view(-1)[j].item()
            orig = p[j].item()
            p[j] = orig + epsilon
            up = sequence_loss(model, batch, reduction="sum").item()
            p[j] = orig - epsilon
            down = sequence_loss(model, batch, reduction="sum").item()
            p[j] = orig
            numeric = (up - down) / (2 * epsilon)
            denom = max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, abs(analytic - numeric) / denom)
    model.zero_grad()
    if math.isnan(worst):
        return float("inf")
    return worst
