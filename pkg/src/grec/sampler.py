"""Negative sampling: keep every positive, keep a fraction of the negatives."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .encoder import EncodedPair


@dataclass(frozen=True)
class SamplingConfig:
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def negative_quota(alpha: float, n_negative: int) -> int:
    """round_half_up(alpha * n_negative), computed on the decimal form of alpha."""
    exact = Decimal(repr(float(alpha))) * n_negative
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def sample_negatives(pairs: Sequence[EncodedPair],
                     config: SamplingConfig) -> list[EncodedPair]:
    neg_idx = [i for i, p in enumerate(pairs) if not p.is_positive]
    k = negative_quota(config.alpha, len(neg_idx))
    # one permutation per seed: larger alpha keeps a superset of the negatives
    perm = np.random.default_rng(config.seed).permutation(len(neg_idx))
    keep = {neg_idx[j] for j in perm[:k]}
    return [p for i, p in enumerate(pairs) if p.is_positive or i in keep]
