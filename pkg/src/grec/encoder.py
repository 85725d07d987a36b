"""Source/target sequence construction for entity-pair and one-pass modes."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .schema import Entity, LabeledExample, RelationSchema, RelationTriple, Sentence

SUBJECT_MARKER = "$"
OBJECT_MARKER = "&"
RESERVED_SURFACE_CHARS = "[]|#"
NULL_BLOCK_FIELD = "None"


class EncodingError(ValueError):
    pass


class MarkerScheme(enum.Enum):
    NONE = "none"
    SPECIAL = "special"
    TYPED = "typed"


class TargetOrder(enum.Enum):
    R = "r"
    SRO = "sro"
    RSO = "rso"
    SOR = "sor"

    @property
    def arity(self) -> int:
        return 1 if self is TargetOrder.R else 3

    @property
    def relation_index(self) -> int:
        return self.value.index("r")


class Mode(enum.Enum):
    ENTITY_PAIR = "entity-pair"
    ONE_PASS = "one-pass"


@dataclass(frozen=True)
class EncodedPair:
    source: str
    target: str
    sentence_id: str
    subj_idx: int | None = None
    obj_idx: int | None = None
    is_positive: bool = False

    def __post_init__(self):
        if not self.source or not self.target:
            raise EncodingError("source and target must be non-empty")

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "EncodedPair":
        return cls(d["source"], d["target"], d["sentence_id"],
                   d.get("subj_idx"), d.get("obj_idx"), bool(d["is_positive"]))


def mark_entities(sentence: Sentence, subj: Entity, obj: Entity,
                  scheme: MarkerScheme) -> list[str]:
    """Insert entity markers around the subject and object spans.

    Markers follow the entity's role, not its position: when the subject
    comes after the object in the sentence the ``$``/``&`` pairs simply
    appear in the other order.
    """
    if subj.overlaps(obj):
        raise EncodingError(
            f"sentence {sentence.id}: subject {subj.span} and object {obj.span} overlap"
        )
    tokens = list(sentence.tokens)
    if scheme is MarkerScheme.NONE:
        return tokens
    if scheme is MarkerScheme.SPECIAL:
        subj_mark, obj_mark = SUBJECT_MARKER, OBJECT_MARKER
    else:
        subj_mark, obj_mark = subj.entity_type, obj.entity_type
    # insert from the right so earlier indices stay valid
    for ent, mark in sorted([(subj, subj_mark), (obj, obj_mark)],
                            key=lambda p: p[0].span_start, reverse=True):
        tokens[ent.span_start:ent.span_end] = [mark, *tokens[ent.span_start:ent.span_end], mark]
    return tokens


def mark_all_entities(sentence: Sentence) -> list[str]:
    """Type-mark every entity of the sentence.

    Nested spans are bracketed properly: at a shared start the outer entity
    opens first, at a shared end the inner entity closes first.
    """
    opens: dict[int, list[Entity]] = {}
    closes: dict[int, list[Entity]] = {}
    for ent in sentence.entities:
        opens.setdefault(ent.span_start, []).append(ent)
        closes.setdefault(ent.span_end, []).append(ent)
    out: list[str] = []
    for i in range(len(sentence.tokens) + 1):
        for ent in sorted(closes.get(i, ()), key=lambda e: (-e.span_start, e.entity_type)):
            out.append(ent.entity_type)
        if i == len(sentence.tokens):
            break
        for ent in sorted(opens.get(i, ()), key=lambda e: (-e.span_end, e.entity_type)):
            out.append(ent.entity_type)
        out.append(sentence.tokens[i])
    return out


def direction_block(subj: Entity, obj: Entity) -> str:
    return f"[{subj.surface} # {subj.entity_type} , {obj.surface} # {obj.entity_type}]"


def entity_list_block(entities: Sequence[Entity]) -> str:
    return "[" + " , ".join(f"{e.surface} # {e.entity_type}" for e in entities) + "]"


def relation_list_block(schema: RelationSchema) -> str:
    return "[" + " - ".join(schema.relation_types) + "]"


def build_pair_source(sentence: Sentence, subj: Entity, obj: Entity,
                      scheme: MarkerScheme, schema: RelationSchema) -> str:
    marked = " ".join(mark_entities(sentence, subj, obj, scheme))
    return f"{marked} {direction_block(subj, obj)} {relation_list_block(schema)}"


def build_pair_target(subj: Entity, obj: Entity, relation: str,
                      order: TargetOrder = TargetOrder.SRO) -> str:
    fields = {"s": subj.surface, "r": relation, "o": obj.surface}
    return "[" + " | ".join(fields[k] for k in order.value) + "]"


def enumerate_pairs(sentence: Sentence) -> list[tuple[Entity, Entity]]:
    """All ordered pairs of distinct entities, subject-major."""
    ents = sentence.entities
    return [(ents[i], ents[j])
            for i in range(len(ents)) for j in range(len(ents)) if i != j]


def build_one_pass_source(sentence: Sentence, schema: RelationSchema,
                          with_entities: bool = True) -> str:
    if not with_entities:
        return f"{sentence.text} {relation_list_block(schema)}"
    ordered = sorted(sentence.entities, key=lambda e: (e.span_start, e.span_end))
    marked = " ".join(mark_all_entities(sentence))
    return f"{marked} {entity_list_block(ordered)} {relation_list_block(schema)}"


def triple_sort_key(t: RelationTriple):
    return (t.subject.span_start, t.object.span_start, t.relation,
            t.subject.span_end, t.object.span_end)


def build_one_pass_target(gold_triples: Iterable[RelationTriple],
                          order: TargetOrder = TargetOrder.SRO) -> str:
    triples = sorted(gold_triples, key=triple_sort_key)
    if not triples:
        return "[" + " | ".join([NULL_BLOCK_FIELD] * order.arity) + "]"
    return " ".join(build_pair_target(t.subject, t.object, t.relation, order)
                    for t in triples)


def check_surfaces(sentence: Sentence) -> None:
    for ent in sentence.entities:
        bad = [c for c in RESERVED_SURFACE_CHARS if c in ent.surface]
        if bad:
            raise EncodingError(
                f"sentence {sentence.id}: entity {ent.surface!r} contains "
                f"reserved character(s) {''.join(bad)!r}"
            )


@dataclass
class EncodeResult:
    pairs: list[EncodedPair] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def encode_example(example: LabeledExample, mode: Mode, scheme: MarkerScheme,
                   order: TargetOrder, schema: RelationSchema,
                   with_entities: bool = True) -> list[EncodedPair]:
    sent = example.sentence
    check_surfaces(sent)
    if mode is Mode.ONE_PASS:
        return [EncodedPair(
            build_one_pass_source(sent, schema, with_entities),
            build_one_pass_target(example.gold_triples, order),
            sent.id,
            is_positive=bool(example.gold_triples),
        )]
    out = []
    for subj, obj in enumerate_pairs(sent):
        rel = example.gold_relation(subj, obj, schema)
        out.append(EncodedPair(
            build_pair_source(sent, subj, obj, scheme, schema),
            build_pair_target(subj, obj, rel, order),
            sent.id,
            sent.entity_index(subj),
            sent.entity_index(obj),
            not schema.is_null(rel),
        ))
    return out


def encode_dataset(examples: Iterable[LabeledExample], mode: Mode,
                   scheme: MarkerScheme, order: TargetOrder,
                   schema: RelationSchema, with_entities: bool = True,
                   strict: bool = False) -> EncodeResult:
    """Encode every example; records that cannot be encoded are skipped and logged.

    A sentence is skipped as a whole when any of its entity-pairs fails, so
    per-sentence pair counts are always either m(m-1) or zero.
    """
    result = EncodeResult()
    for ex in examples:
        try:
            result.pairs.extend(
                encode_example(ex, mode, scheme, order, schema, with_entities))
        except EncodingError as err:
            if strict:
                raise
            result.errors.append(str(err))
    return result


def write_pairs(pairs: Iterable[EncodedPair], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(p.to_json() + "\n")
            n += 1
    return n


def read_pairs(path) -> list[EncodedPair]:
    with open(Path(path), encoding="utf-8") as f:
        return [EncodedPair.from_dict(json.loads(line)) for line in f if line.strip()]
