"""Greedy and beam decoding, the backend wrapper, and checkpoints."""

from __future__ import annotations

import math
from dataclasses import asdict

import torch

from ..backend import Candidate, GenerationBackend, GenerationRequest, normalize_candidates
from .model import ModelConfig, Seq2SeqTransformer
from .vocab import BOS, EOS, PAD, Vocab

CHECKPOINT_FORMAT = "grec-toy-checkpoint/1"


def _encode_source(model, vocab, source):
    ids = vocab.encode(source)[: model.cfg.max_source_len]
    src = torch.tensor([ids], dtype=torch.long)
    return model.encode(src)


@torch.no_grad()
def greedy_decode(model: Seq2SeqTransformer, vocab: Vocab, source: str):
    """Argmax decoding; returns (token ids without BOS/EOS, log-probability)."""
    memory, mask = _encode_source(model, vocab, source)
    prefix = [BOS]
    logp = 0.0
    for _ in range(model.cfg.max_target_len):
        logits = model.decode(torch.tensor([prefix]), memory, mask)[0, -1]
        lp = torch.log_softmax(logits, dim=-1)
        lp[PAD] = float("-inf")
        lp[BOS] = float("-inf")
        tok = int(torch.argmax(lp))
        logp += lp[tok].item()
        if tok == EOS:
            return prefix[1:], logp
        prefix.append(tok)
    return prefix[1:], logp


@torch.no_grad()
def beam_search(model: Seq2SeqTransformer, vocab: Vocab, source: str, width: int):
    """Top-``width`` hypotheses by total log-probability.

    Returns ``[(ids, logp), ...]`` best first. Hypotheses that reach
    ``max_target_len`` without EOS are kept with the score they have.
    """
    memory, mask = _encode_source(model, vocab, source)
    alive = [([BOS], 0.0)]
    finished = []
    for _ in range(model.cfg.max_target_len):
        prefixes = torch.tensor([h for h, _ in alive], dtype=torch.long)
        mem = memory.expand(len(alive), -1, -1)
        logits = model.decode(prefixes, mem, mask.expand(len(alive), -1, -1, -1))[:, -1]
        lp = torch.log_softmax(logits, dim=-1)
        lp[:, PAD] = float("-inf")
        lp[:, BOS] = float("-inf")
        totals = torch.tensor([s for _, s in alive], dtype=lp.dtype)[:, None] + lp
        k = min(width, totals.numel())
        top_scores, top_idx = torch.topk(totals.view(-1), k)
        new_alive = []
        for score, flat in zip(top_scores.tolist(), top_idx.tolist()):
            if score == float("-inf"):
                continue
            row, tok = divmod(flat, lp.shape[1])
            hyp = alive[row][0] + [tok]
            if tok == EOS:
                finished.append((hyp[1:-1], score))
            else:
                new_alive.append((hyp, score))
        alive = new_alive
        finished.sort(key=lambda h: -h[1])
        finished = finished[:width]
        # extending a hypothesis can only lower its score
        if not alive or (len(finished) >= width and finished[-1][1] >= alive[0][1]):
            break
    else:
        finished.extend((h[1:], s) for h, s in alive)
    finished.sort(key=lambda h: -h[1])
    return finished[:width]


class ToySeq2Seq(GenerationBackend):
    """Wraps a trained model as a generation backend.

    The model is read-only here, so concurrent ``generate_top_n`` calls are safe.
    """

    def __init__(self, model: Seq2SeqTransformer, vocab: Vocab, beam_width: int = 5):
        self.model = model.eval()
        self.vocab = vocab
        self.beam_width = beam_width

    def generate_top_n(self, request: GenerationRequest) -> list[Candidate]:
        width = max(self.beam_width, request.top_n)
        out = []
        for ids, logp in beam_search(self.model, self.vocab, request.source, width):
            score = math.exp(logp)
            if score > 0:
                out.append(Candidate(self.vocab.decode(ids), min(score, 1.0)))
        return normalize_candidates(out)[: request.top_n]

    def save(self, path) -> None:
        torch.save({
            "format": CHECKPOINT_FORMAT,
            "model_config": asdict(self.model.cfg),
            "vocab": list(self.vocab.itos),
            "state": self.model.state_dict(),
        }, path)

    @classmethod
    def load(cls, path, beam_width: int = 5) -> "ToySeq2Seq":
        blob = torch.load(path, weights_only=True)
        if blob.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
        vocab = Vocab(tuple(blob["vocab"]))
        model = Seq2SeqTransformer(ModelConfig(**blob["model_config"]), len(vocab))
        model.load_state_dict(blob["state"])
        return cls(model, vocab, beam_width)
