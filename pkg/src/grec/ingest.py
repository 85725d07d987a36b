"""Dataset adapters, the canonical JSONL format, and a synthetic corpus generator."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .schema import (Entity, LabeledExample, RelationSchema, RelationTriple,
                     SchemaError, Sentence)

SEMEVAL_RELATIONS = (
    "Cause-Effect", "Component-Whole", "Content-Container", "Entity-Destination",
    "Entity-Origin", "Instrument-Agency", "Member-Collection", "Message-Topic",
    "Product-Producer",
)
SEMEVAL_ENTITY_TYPE = "Entity"
SEMEVAL_SCHEMA = RelationSchema(SEMEVAL_RELATIONS, "Other", (SEMEVAL_ENTITY_TYPE,))


class IngestError(ValueError):
    """Fatal problem with an input file (bad JSON, unreadable schema, ...)."""


@dataclass(frozen=True)
class RecordError:
    record_id: str
    message: str

    def __str__(self):
        return f"{self.record_id}: {self.message}"


@dataclass
class LoadResult:
    examples: list[LabeledExample] = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)

    def __iter__(self):
        return iter(self.examples)

    def __len__(self):
        return len(self.examples)

    def raise_if_errors(self) -> None:
        if self.errors:
            raise IngestError(f"{len(self.errors)} record error(s); first: {self.errors[0]}")


def _build_example(sid: str, tokens, entities, triples,
                   schema: RelationSchema | None) -> LabeledExample:
    sent = Sentence(sid, tuple(tokens), tuple(entities))
    ex = LabeledExample(sent, tuple(triples))
    if schema is not None:
        ex.check_labels(schema)
    return ex


# ---------------------------------------------------------------- TACRED

def load_tacred(path, schema: RelationSchema, strict: bool = False) -> LoadResult:
    """Read the TACRED JSON array (inclusive token indices).

    The schema's null type plays the role of TACRED's ``no_relation``.
    """
    try:
        with open(path, encoding="utf-8") as f:
            records = json.load(f)
    except json.JSONDecodeError as err:
        raise IngestError(f"{path}: malformed JSON: {err}") from err
    if not isinstance(records, list):
        raise IngestError(f"{path}: expected a JSON array")
    result = LoadResult()
    for n, rec in enumerate(records):
        rid = str(rec.get("id", n)) if isinstance(rec, dict) else str(n)
        try:
            tokens = rec["token"]
            ss, se = int(rec["subj_start"]), int(rec["subj_end"])
            os_, oe = int(rec["obj_start"]), int(rec["obj_end"])
            for a, b in ((ss, se), (os_, oe)):
                if not 0 <= a <= b < len(tokens):
                    raise SchemaError(f"span [{a}, {b}] out of range for {len(tokens)} tokens")
            subj = Entity.from_tokens(tokens, ss, se + 1, rec["subj_type"])
            obj = Entity.from_tokens(tokens, os_, oe + 1, rec["obj_type"])
            relation = rec["relation"]
            if relation not in schema.labels:
                raise SchemaError(f"unknown relation {relation!r}")
            triples = [] if schema.is_null(relation) else [RelationTriple(subj, relation, obj)]
            ents = sorted([subj, obj], key=lambda e: (e.span_start, e.span_end))
            result.examples.append(_build_example(rid, tokens, ents, triples, schema))
        except (KeyError, TypeError, ValueError) as err:
            if strict:
                raise IngestError(f"record {rid}: {err}") from err
            result.errors.append(RecordError(rid, str(err)))
    return result


# ---------------------------------------------------------------- SemEval

_TOKEN = re.compile(r"</?e[12]>|\w+(?:[-'.]\w+)*|[^\w\s]")
_LABEL = re.compile(r"^(?P<base>[^()]+)\((?P<a>e[12]),(?P<b>e[12])\)$")


def tokenize_semeval(text: str) -> tuple[list[str], dict[str, tuple[int, int]]]:
    """Tokenize a tagged SemEval sentence; returns tokens and tag spans."""
    tokens: list[str] = []
    opened: dict[str, int] = {}
    spans: dict[str, tuple[int, int]] = {}
    for tok in _TOKEN.findall(text):
        if tok in ("<e1>", "<e2>"):
            name = tok[1:3]
            if name in opened or name in spans:
                raise SchemaError(f"repeated tag <{name}>")
            opened[name] = len(tokens)
        elif tok in ("</e1>", "</e2>"):
            name = tok[2:4]
            if name not in opened:
                raise SchemaError(f"closing tag </{name}> without opening tag")
            spans[name] = (opened.pop(name), len(tokens))
        else:
            tokens.append(tok)
    if opened or set(spans) != {"e1", "e2"}:
        raise SchemaError("missing <e1>/<e2> tag pair")
    return tokens, spans


def _semeval_records(lines: list[str]):
    """Yield (record_id, sentence_text, label_line) triples."""
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        m = re.match(r"^(\S+)\s+(.*)$", line)
        rid, text = (m.group(1), m.group(2)) if m else (str(i + 1), line)
        label = lines[i + 1].strip() if i + 1 < len(lines) else ""
        i += 2
        # optional Comment line(s) up to the blank separator
        while i < len(lines) and lines[i].strip():
            if re.match(r"^\S+\s+\"", lines[i].strip()):
                break
            i += 1
        yield rid, text.strip().strip('"'), label


def load_semeval(path, schema: RelationSchema = SEMEVAL_SCHEMA,
                 strict: bool = False) -> LoadResult:
    """Read the SemEval-2010 Task 8 text format.

    ``Base(e2,e1)`` makes the ``<e2>`` mention the subject. The label
    "Other" (the schema null type) yields no triples.
    """
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    result = LoadResult()
    for rid, text, label in _semeval_records(lines):
        try:
            tokens, spans = tokenize_semeval(text)
            ents = {k: Entity.from_tokens(tokens, *spans[k], SEMEVAL_ENTITY_TYPE)
                    for k in ("e1", "e2")}
            if schema.is_null(label):
                triples = []
            else:
                m = _LABEL.match(label)
                if not m or m["a"] == m["b"]:
                    raise SchemaError(f"unparseable label {label!r}")
                if m["base"] not in schema.relation_types:
                    raise SchemaError(f"unknown relation {m['base']!r}")
                triples = [RelationTriple(ents[m["a"]], m["base"], ents[m["b"]])]
            ordered = sorted(ents.values(), key=lambda e: (e.span_start, e.span_end))
            result.examples.append(_build_example(rid, tokens, ordered, triples, schema))
        except (KeyError, ValueError) as err:
            if strict:
                raise IngestError(f"record {rid}: {err}") from err
            result.errors.append(RecordError(rid, str(err)))
    return result


# ---------------------------------------------------------------- canonical JSONL

def example_to_record(ex: LabeledExample) -> dict:
    ents = list(ex.sentence.entities)
    return {
        "id": ex.sentence.id,
        "tokens": list(ex.sentence.tokens),
        "entities": [{"start": e.span_start, "end": e.span_end, "type": e.entity_type}
                     for e in ents],
        "triples": [{"subj_idx": ents.index(t.subject), "obj_idx": ents.index(t.object),
                     "relation": t.relation} for t in ex.gold_triples],
    }


def record_to_example(rec: dict, schema: RelationSchema | None = None) -> LabeledExample:
    tokens = rec["tokens"]
    ents = [Entity.from_tokens(tokens, int(e["start"]), int(e["end"]), e["type"])
            for e in rec["entities"]]
    triples = []
    for t in rec.get("triples", ()):
        si, oi = int(t["subj_idx"]), int(t["obj_idx"])
        if si == oi or not (0 <= si < len(ents) and 0 <= oi < len(ents)):
            raise SchemaError(f"bad triple indices ({si}, {oi})")
        triples.append(RelationTriple(ents[si], t["relation"], ents[oi]))
    return _build_example(str(rec["id"]), tokens, ents, triples, schema)


def write_canonical(examples: Iterable[LabeledExample], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(json.dumps(example_to_record(ex), ensure_ascii=False) + "\n")
            n += 1
    return n


def load_canonical(path, schema: RelationSchema | None = None,
                   strict: bool = False) -> LoadResult:
    result = LoadResult()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise IngestError(f"{path}:{lineno}: malformed JSON: {err}") from err
            rid = str(rec.get("id", lineno))
            try:
                result.examples.append(record_to_example(rec, schema))
            except (KeyError, TypeError, ValueError) as err:
                if strict:
                    raise IngestError(f"record {rid}: {err}") from err
                result.errors.append(RecordError(rid, str(err)))
    return result


def write_schema(schema: RelationSchema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def load_schema(path) -> RelationSchema:
    try:
        return RelationSchema.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, SchemaError) as err:
        raise IngestError(f"{path}: invalid schema: {err}") from err


# ---------------------------------------------------------------- synthetic corpus

_ENTITY_TYPE_NAMES = ("Person", "Organization", "Location", "Product",
                      "Event", "Facility", "Vehicle", "Weapon")
_RELATION_NAMES = ("works for", "located at", "part of", "makes",
                   "owns", "visits", "founded", "leads")
_ONSETS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SyntheticGrammarConfig:
    entity_type_count: int = 4
    relation_type_count: int = 4
    templates_per_relation: int = 3
    vocabulary_size: int = 40
    negative_fraction: float = 0.3
    seed: int = 0
    train_size: int = 500
    dev_size: int = 100
    test_size: int = 100
    names_per_type: int = 12

    def __post_init__(self):
        for name in ("entity_type_count", "relation_type_count",
                     "templates_per_relation", "vocabulary_size", "names_per_type"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.negative_fraction <= 1:
            raise ValueError("negative_fraction must lie in [0, 1]")
        if min(self.train_size, self.dev_size, self.test_size) < 0:
            raise ValueError("split sizes must be non-negative")


@dataclass(frozen=True)
class Template:
    """A sentence skeleton with two entity slots; ``relation`` None marks a negative."""
    words: tuple[str, ...]   # "<1>"/"<2>" are the slots, in surface order
    slot_types: tuple[str, str]
    relation: str | None
    subject_first: bool


def _words(rng: np.random.Generator, n: int, syllables: int, taken: set) -> list[str]:
    out = []
    while len(out) < n:
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(syllables))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def _label(names: tuple[str, ...], i: int, fallback: str) -> str:
    return names[i] if i < len(names) else f"{fallback}{i}"


def synthesize_corpus(config: SyntheticGrammarConfig):
    """Deterministically generate ``(train, dev, test, schema)`` from templates.

    Every template owns a unique middle phrase, so a sentence's template and
    entity order determine its relation.
    """
    rng = np.random.default_rng(config.seed)
    etypes = [_label(_ENTITY_TYPE_NAMES, i, "Type") for i in range(config.entity_type_count)]
    rels = [_label(_RELATION_NAMES, i, "relation ") for i in range(config.relation_type_count)]
    schema = RelationSchema(tuple(rels), "None", tuple(etypes))

    taken: set = set()
    filler = _words(rng, config.vocabulary_size, 2, taken)
    names = {t: [w.capitalize() for w in _words(rng, config.names_per_type, 3, taken)]
             for t in etypes}

    def signature(r: int) -> tuple[str, str]:
        e = len(etypes)
        return etypes[r % e], etypes[(r + 1) % e]

    middles: set = set()

    def make(slot_types, relation, subject_first) -> Template:
        while True:
            middle = tuple(filler[i] for i in rng.choice(len(filler), rng.integers(1, 4)))
            if middle not in middles:
                middles.add(middle)
                break
        prefix = [filler[i] for i in rng.choice(len(filler), rng.integers(0, 3))]
        suffix = [filler[i] for i in rng.choice(len(filler), rng.integers(0, 3))]
        words = (*prefix, "<1>", *middle, "<2>", *suffix, ".")
        return Template(words, slot_types, relation, subject_first)

    positive_templates = []
    for r, rel in enumerate(rels):
        s_type, o_type = signature(r)
        for _ in range(config.templates_per_relation):
            subject_first = bool(rng.integers(2))
            slots = (s_type, o_type) if subject_first else (o_type, s_type)
            positive_templates.append(make(slots, rel, subject_first))
    negative_templates = []
    for _ in range(config.templates_per_relation):
        slots = (etypes[rng.integers(len(etypes))], etypes[rng.integers(len(etypes))])
        negative_templates.append(make(slots, None, True))

    def instantiate(tpl: Template, sid: str) -> LabeledExample:
        first_name = names[tpl.slot_types[0]][rng.integers(config.names_per_type)]
        while True:
            second_name = names[tpl.slot_types[1]][rng.integers(config.names_per_type)]
            if second_name != first_name or config.names_per_type == 1:
                break
        fills = {"<1>": (first_name, tpl.slot_types[0]), "<2>": (second_name, tpl.slot_types[1])}
        tokens: list[str] = []
        ents = []
        for w in tpl.words:
            if w in fills:
                surface, etype = fills[w]
                start = len(tokens)
                tokens.extend(surface.split())
                ents.append(Entity(start, len(tokens), etype, surface))
            else:
                tokens.append(w)
        triples = []
        if tpl.relation is not None:
            subj, obj = (ents[0], ents[1]) if tpl.subject_first else (ents[1], ents[0])
            triples.append(RelationTriple(subj, tpl.relation, obj))
        return LabeledExample(Sentence(sid, tuple(tokens), tuple(ents)), tuple(triples))

    def split(name: str, size: int) -> list[LabeledExample]:
        n_neg = int(np.floor(config.negative_fraction * size + 0.5))
        is_neg = np.zeros(size, dtype=bool)
        is_neg[rng.permutation(size)[:n_neg]] = True
        out = []
        for i in range(size):
            pool = negative_templates if is_neg[i] else positive_templates
            tpl = pool[rng.integers(len(pool))]
            out.append(instantiate(tpl, f"{name}-{i:05d}"))
        return out

    train = split("train", config.train_size)
    dev = split("dev", config.dev_size)
    test = split("test", config.test_size)
    return train, dev, test, schema
