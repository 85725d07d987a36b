"""Core domain types shared across the toolkit.

Spans are 0-based and end-exclusive everywhere. Every type validates itself
on construction and is immutable afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

RESERVED_RELATION_CHARS = "[]|"
_WHITESPACE = re.compile(r"\s")


class SchemaError(ValueError):
    """Raised when a domain object violates one of its invariants."""


@dataclass(frozen=True)
class Entity:
    span_start: int
    span_end: int
    entity_type: str
    surface: str

    def __post_init__(self):
        if not 0 <= self.span_start < self.span_end:
            raise SchemaError(
                f"invalid span [{self.span_start}, {self.span_end})"
            )
        if not self.entity_type:
            raise SchemaError("entity type must be non-empty")
        if not self.surface:
            raise SchemaError("entity surface must be non-empty")

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], start: int, end: int,
                    entity_type: str) -> "Entity":
        if not 0 <= start < end <= len(tokens):
            raise SchemaError(
                f"span [{start}, {end}) outside sentence of {len(tokens)} tokens"
            )
        return cls(start, end, entity_type, " ".join(tokens[start:end]))

    @property
    def span(self) -> tuple[int, int]:
        return (self.span_start, self.span_end)

    def overlaps(self, other: "Entity") -> bool:
        return self.span_start < other.span_end and other.span_start < self.span_end


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[str, ...]
    entities: tuple[Entity, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "entities", tuple(self.entities))
        for i, tok in enumerate(self.tokens):
            if not tok:
                raise SchemaError(f"sentence {self.id}: empty token at {i}")
            if _WHITESPACE.search(tok):
                raise SchemaError(
                    f"sentence {self.id}: token {i} {tok!r} contains whitespace"
                )
        for ent in self.entities:
            if ent.span_end > len(self.tokens):
                raise SchemaError(
                    f"sentence {self.id}: entity span {ent.span} out of range"
                )
            expected = " ".join(self.tokens[ent.span_start:ent.span_end])
            if ent.surface != expected:
                raise SchemaError(
                    f"sentence {self.id}: entity surface {ent.surface!r} "
                    f"does not match tokens {expected!r}"
                )
        if len(set(self.entities)) != len(self.entities):
            raise SchemaError(f"sentence {self.id}: duplicate entity")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def entity_index(self, entity: Entity) -> int:
        return self.entities.index(entity)


@dataclass(frozen=True)
class RelationSchema:
    relation_types: tuple[str, ...]
    null_type: str = "None"
    entity_types: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relation_types", tuple(self.relation_types))
        object.__setattr__(self, "entity_types", tuple(self.entity_types))
        problems = validate_schema(self)
        if problems:
            raise SchemaError("; ".join(problems))

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(self.relation_types) | {self.null_type}

    def is_null(self, relation: str) -> bool:
        return relation == self.null_type

    def to_dict(self) -> dict:
        return {
            "relation_types": list(self.relation_types),
            "null_type": self.null_type,
            "entity_types": list(self.entity_types),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RelationSchema":
        return cls(
            tuple(d["relation_types"]),
            d.get("null_type", "None"),
            tuple(d.get("entity_types", ())),
        )


def validate_schema(schema: RelationSchema | Mapping) -> list[str]:
    """Return a list of human-readable violations; empty when the schema is valid.

    Accepts either a schema object or its raw dict form (as stored in the
    sidecar JSON file), so invalid schemas can be reported without first
    being constructed.
    """
    if isinstance(schema, Mapping):
        rels = list(schema.get("relation_types", ()))
        null_type = schema.get("null_type", "None")
    else:
        rels = list(schema.relation_types)
        null_type = schema.null_type
    problems = []
    if len(rels) < 1:
        problems.append("at least one relation type is required")
    seen = set()
    for rel in rels:
        if not rel:
            problems.append("empty relation type")
        elif rel in seen:
            problems.append(f"duplicate relation type {rel!r}")
        seen.add(rel)
        if rel == null_type:
            problems.append(f"relation type {rel!r} equals the null type")
        bad = [c for c in RESERVED_RELATION_CHARS if c in rel]
        if bad:
            problems.append(
                f"relation type {rel!r} contains reserved character(s) {''.join(bad)!r}"
            )
    if not null_type:
        problems.append("null type must be non-empty")
    return problems


@dataclass(frozen=True)
class RelationTriple:
    subject: Entity
    relation: str
    object: Entity

    def __post_init__(self):
        if not self.relation:
            raise SchemaError("relation label must be non-empty")


@dataclass(frozen=True)
class LabeledExample:
    sentence: Sentence
    gold_triples: tuple[RelationTriple, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gold_triples", tuple(self.gold_triples))
        ents = set(self.sentence.entities)
        for t in self.gold_triples:
            if t.subject not in ents or t.object not in ents:
                raise SchemaError(
                    f"sentence {self.sentence.id}: triple entity not in sentence"
                )
            if t.subject == t.object:
                raise SchemaError(
                    f"sentence {self.sentence.id}: self-relation on {t.subject.surface!r}"
                )

    def check_labels(self, schema: RelationSchema) -> None:
        """Gold triples must carry non-null labels from ``schema``."""
        for t in self.gold_triples:
            if t.relation == schema.null_type:
                raise SchemaError(
                    f"sentence {self.sentence.id}: gold triple has null relation"
                )
            if t.relation not in schema.labels:
                raise SchemaError(
                    f"sentence {self.sentence.id}: unknown relation {t.relation!r}"
                )

    def gold_relation(self, subj: Entity, obj: Entity, schema: RelationSchema) -> str:
        for t in self.gold_triples:
            if t.subject == subj and t.object == obj:
                return t.relation
        return schema.null_type
