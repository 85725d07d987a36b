"""Prediction selection over top-N candidates with a decoding scaling factor.

The best positive candidate is emitted only when its sequence probability
beats the best negative one by a factor of at least ``beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .backend import Candidate
from .encoder import TargetOrder
from .parser import Malformed, parse_target, resolve_pair
from .schema import Entity, RelationSchema, RelationTriple


@dataclass(frozen=True)
class ScalingConfig:
    beta: float = 1.0
    top_n: int = 5

    def __post_init__(self):
        if not self.beta >= 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")


@dataclass(frozen=True)
class ScoredTriple:
    triple: RelationTriple
    score: float
    text: str
    malformed: bool = False
    unknown_relation: bool = False
    entity_mismatch: bool = False


@dataclass(frozen=True)
class SelectedPrediction:
    triple: RelationTriple
    score: float
    positive_score: float | None = None
    negative_score: float | None = None
    # set when there were no candidates at all; score is then 0
    empty: bool = False

    def __post_init__(self):
        if self.empty:
            if self.score != 0:
                raise ValueError("empty prediction must carry score 0")
        elif not 0 < self.score <= 1:
            raise ValueError(f"score must lie in (0, 1], got {self.score}")


def classify_candidates(candidates: Sequence[Candidate], subj: Entity, obj: Entity,
                        schema: RelationSchema,
                        order: TargetOrder = TargetOrder.SRO
                        ) -> tuple[list[ScoredTriple], list[ScoredTriple]]:
    positives, negatives = [], []
    for cand in sorted(candidates, key=lambda c: (-c.score, c.text)):
        outcome = parse_target(cand.text, order)
        if isinstance(outcome, Malformed) or len(outcome.triples) != 1:
            negatives.append(ScoredTriple(
                RelationTriple(subj, schema.null_type, obj), cand.score, cand.text,
                malformed=True))
            continue
        res = resolve_pair(outcome.triples[0], subj, obj, schema, order)
        st = ScoredTriple(res.triple, cand.score, cand.text,
                          unknown_relation=res.unknown_relation,
                          entity_mismatch=res.entity_mismatch)
        (negatives if schema.is_null(res.triple.relation) else positives).append(st)
    return positives, negatives


def ratio_passes(positive_score: float, negative_score: float, beta: float) -> bool:
    """Exact ``positive / negative >= beta`` on the float values given."""
    return Fraction(positive_score) >= Fraction(beta) * Fraction(negative_score)


def select_prediction(candidates: Sequence[Candidate], config: ScalingConfig,
                      subj: Entity, obj: Entity, schema: RelationSchema,
                      order: TargetOrder = TargetOrder.SRO) -> SelectedPrediction:
    ranked = sorted(candidates, key=lambda c: (-c.score, c.text))[:config.top_n]
    if not ranked:
        return SelectedPrediction(RelationTriple(subj, schema.null_type, obj), 0.0,
                                  empty=True)
    positives, negatives = classify_candidates(ranked, subj, obj, schema, order)
    if not negatives:
        best = positives[0]
        return SelectedPrediction(best.triple, best.score, positive_score=best.score)
    if not positives:
        best = negatives[0]
        return SelectedPrediction(best.triple, best.score, negative_score=best.score)
    pos, neg = positives[0], negatives[0]
    chosen = pos if ratio_passes(pos.score, neg.score, config.beta) else neg
    return SelectedPrediction(chosen.triple, chosen.score, pos.score, neg.score)
