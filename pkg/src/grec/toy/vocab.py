"""Word-level vocabulary for the toy model.

Tokens are whitespace-separated words, with ``[`` and ``]`` always split off
into tokens of their own, so ``[Toefting`` and ``Toefting`` share an id.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<bos>", "<eos>", "<unk>")

_BRACKETS = re.compile(r"([\[\]])")


def tokenize(text: str) -> list[str]:
    return _BRACKETS.sub(r" \1 ", text).split()


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens).replace("[ ", "[").replace(" ]", "]")


@dataclass(frozen=True)
class Vocab:
    itos: tuple[str, ...]

    def __post_init__(self):
        if self.itos[:4] != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        if len(set(self.itos)) != len(self.itos):
            raise ValueError("vocabulary entries must be unique")
        object.__setattr__(self, "_stoi", {t: i for i, t in enumerate(self.itos)})

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token: str):
        return token in self._stoi

    def id(self, token: str) -> int:
        return self._stoi.get(token, UNK)

    def encode(self, text: str) -> list[int]:
        return [self.id(t) for t in tokenize(text)]

    def decode(self, ids: Iterable[int]) -> str:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i in (PAD, BOS):
                continue
            out.append(self.itos[i])
        return detokenize(out)


def build_vocab(pairs) -> Vocab:
    """Vocabulary over sources and targets, by descending frequency then lexically."""
    counts: Counter = Counter()
    n = 0
    for p in pairs:
        counts.update(tokenize(p.source))
        counts.update(tokenize(p.target))
        n += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    for r in RESERVED:
        counts.pop(r, None)
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    return Vocab(RESERVED + tuple(ordered))
