"""In-memory glue between the stages: predictions from candidates, experiment runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .backend import Candidate, GenerationBackend, GenerationRequest
from .encoder import (EncodedPair, MarkerScheme, Mode, TargetOrder,
                      build_one_pass_source, build_pair_source, encode_dataset)
from .ingest import SyntheticGrammarConfig, synthesize_corpus
from .metrics import PRF, micro_prf
from .parser import Parsed, parse_target, resolve_one_pass
from .sampler import SamplingConfig, sample_negatives
from .scaling import ScalingConfig, select_prediction
from .schema import LabeledExample, RelationSchema, RelationTriple

# (sentence id, [(triple, score), ...]) for every sentence
Predictions = list[tuple[str, list[tuple[RelationTriple, float]]]]


def pair_sources(ex: LabeledExample, scheme: MarkerScheme, schema: RelationSchema):
    """(subj, obj, source) for every ordered entity pair of the sentence."""
    from .encoder import enumerate_pairs
    sent = ex.sentence
    return [(s, o, build_pair_source(sent, s, o, scheme, schema))
            for s, o in enumerate_pairs(sent)]


def generate_candidates(backend: GenerationBackend, sources: Sequence[str],
                        top_n: int) -> list[list[Candidate]]:
    return [backend.generate_top_n(GenerationRequest(s, top_n)) for s in sources]


def select_entity_pair(examples: Iterable[LabeledExample],
                       candidates: dict[str, list[Candidate]],
                       scaling: ScalingConfig, scheme: MarkerScheme,
                       order: TargetOrder, schema: RelationSchema) -> Predictions:
    """Apply the scaling rule to every pair; keeps positive predictions only."""
    out = []
    for ex in examples:
        kept = []
        for subj, obj, src in pair_sources(ex, scheme, schema):
            pred = select_prediction(candidates.get(src, []), scaling, subj, obj,
                                     schema, order)
            if not schema.is_null(pred.triple.relation):
                kept.append((pred.triple, pred.score))
        out.append((ex.sentence.id, kept))
    return out


def select_one_pass(examples: Iterable[LabeledExample],
                    candidates: dict[str, list[Candidate]], order: TargetOrder,
                    schema: RelationSchema, with_entities: bool = True) -> Predictions:
    """Top-1 parse per sentence; malformed generations predict nothing."""
    out = []
    for ex in examples:
        src = build_one_pass_source(ex.sentence, schema, with_entities)
        cands = candidates.get(src, [])
        triples = []
        if cands:
            parsed = parse_target(cands[0].text, order)
            if isinstance(parsed, Parsed):
                resolved, _ = resolve_one_pass(parsed.triples, ex.sentence, schema, order)
                triples = [(t, cands[0].score) for t in resolved]
        out.append((ex.sentence.id, triples))
    return out


def gold_items(examples: Iterable[LabeledExample]):
    return [(ex.sentence.id, t) for ex in examples for t in ex.gold_triples]


def pred_items(preds: Predictions):
    return [(sid, t) for sid, ts in preds for t, _ in ts]


@dataclass
class ExperimentResult:
    losses: list[float]
    train_pairs: int
    sampled_negatives: int
    cells: dict[float, PRF] = field(default_factory=dict)
    positive_counts: dict[float, int] = field(default_factory=dict)


def run_toy_experiment(train_examples, test_examples, schema: RelationSchema,
                       betas: Sequence[float] = (1.0,), alpha: float = 1.0,
                       top_n: int = 5, scheme: MarkerScheme = MarkerScheme.TYPED,
                       order: TargetOrder = TargetOrder.SRO, model_config=None,
                       train_config=None, sample_seed: int = 0) -> ExperimentResult:
    """encode -> sample -> train toy model -> generate -> select per beta -> score."""
    from .toy import ModelConfig, ToySeq2Seq, TrainConfig, build_vocab, train

    model_config = model_config or ModelConfig()
    train_config = train_config or TrainConfig()
    enc = encode_dataset(train_examples, Mode.ENTITY_PAIR, scheme, order, schema)
    pairs = sample_negatives(enc.pairs, SamplingConfig(alpha, sample_seed))
    vocab = build_vocab(pairs)
    model, losses = train(pairs, vocab, model_config, train_config)
    backend = ToySeq2Seq(model, vocab, beam_width=top_n)
    sources = sorted({src for ex in test_examples
                      for _, _, src in pair_sources(ex, scheme, schema)})
    cands = dict(zip(sources, generate_candidates(backend, sources, top_n)))
    result = ExperimentResult(losses, len(pairs),
                              sum(1 for p in pairs if not p.is_positive))
    golds = gold_items(test_examples)
    for beta in betas:
        preds = select_entity_pair(test_examples, cands, ScalingConfig(beta, top_n),
                                   scheme, order, schema)
        items = pred_items(preds)
        result.cells[beta] = micro_prf(items, golds, null_type=schema.null_type)
        result.positive_counts[beta] = len(items)
    return result


def synthetic_experiment(config: SyntheticGrammarConfig, **kwargs) -> ExperimentResult:
    train, _dev, test, schema = synthesize_corpus(config)
    return run_toy_experiment(train, test, schema, **kwargs)
