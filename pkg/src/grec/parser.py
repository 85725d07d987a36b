"""Parsing of generated target strings back into relation triples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .encoder import NULL_BLOCK_FIELD, TargetOrder
from .schema import Entity, RelationSchema, RelationTriple, Sentence


@dataclass(frozen=True)
class RawTriple:
    fields: tuple[str, ...]

    def field(self, role: str, order: TargetOrder) -> str | None:
        """Field for role 's', 'r' or 'o'; None if the order has no such field."""
        i = order.value.find(role)
        return self.fields[i] if i >= 0 else None


@dataclass(frozen=True)
class Parsed:
    triples: tuple[RawTriple, ...]


@dataclass(frozen=True)
class Malformed:
    reason: str


ParseOutcome = Union[Parsed, Malformed]


def parse_target(text: str, order: TargetOrder = TargetOrder.SRO) -> ParseOutcome:
    """Parse ``[a | b | c] [d | e | f] ...`` into raw triples.

    Returns :class:`Malformed` with the first problem found rather than
    raising; anything can come out of a generator.
    """
    blocks = []
    i, n = 0, len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i == n:
            break
        if text[i] != "[":
            return Malformed(f"unexpected text at offset {i}")
        close = text.find("]", i + 1)
        nested = text.find("[", i + 1)
        if close < 0:
            return Malformed("unclosed block")
        if 0 <= nested < close:
            return Malformed(f"nested block at offset {nested}")
        parts = [p.strip() for p in text[i + 1:close].split("|")]
        if len(parts) != order.arity:
            return Malformed(
                f"block {len(blocks) + 1} has {len(parts)} fields, expected {order.arity}"
            )
        if any(not p for p in parts):
            return Malformed(f"block {len(blocks) + 1} has an empty field")
        blocks.append(RawTriple(tuple(parts)))
        i = close + 1
    if not blocks:
        return Malformed("no blocks")
    return Parsed(tuple(blocks))


@dataclass(frozen=True)
class ResolvedPair:
    triple: RelationTriple
    unknown_relation: bool = False
    entity_mismatch: bool = False


def resolve_pair(raw: RawTriple, subj: Entity, obj: Entity,
                 schema: RelationSchema,
                 order: TargetOrder = TargetOrder.SRO) -> ResolvedPair:
    # the known pair wins; generated entity fields are only checked
    relation = raw.field("r", order)
    unknown = relation not in schema.labels
    if unknown:
        relation = schema.null_type
    mismatch = False
    s, o = raw.field("s", order), raw.field("o", order)
    if s is not None and s != subj.surface:
        mismatch = True
    if o is not None and o != obj.surface:
        mismatch = True
    return ResolvedPair(RelationTriple(subj, relation, obj), unknown, mismatch)


def _lookup(surface: str, entities: Sequence[Entity]) -> Entity | None:
    hits = [e for e in entities if e.surface == surface]
    if not hits:
        return None
    return min(hits, key=lambda e: (e.span_start, e.span_end))


def resolve_one_pass(raws: Sequence[RawTriple], sentence: Sentence,
                     schema: RelationSchema,
                     order: TargetOrder = TargetOrder.SRO
                     ) -> tuple[list[RelationTriple], int]:
    """Map raw one-pass triples onto the sentence's entities.

    Returns the resolved positive triples (deduplicated, in generation order)
    and the number of raw triples that had to be dropped.
    """
    out: list[RelationTriple] = []
    dropped = 0
    for raw in raws:
        if all(f == NULL_BLOCK_FIELD for f in raw.fields):
            continue
        rel = raw.field("r", order)
        if rel not in schema.labels:
            dropped += 1
            continue
        if schema.is_null(rel):
            continue
        s_surface, o_surface = raw.field("s", order), raw.field("o", order)
        if s_surface is None or o_surface is None:
            dropped += 1
            continue
        subj = _lookup(s_surface, sentence.entities)
        obj = _lookup(o_surface, sentence.entities)
        if subj is None or obj is None or subj == obj:
            dropped += 1
            continue
        t = RelationTriple(subj, rel, obj)
        if t not in out:
            out.append(t)
    return out, dropped
