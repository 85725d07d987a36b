"""Triple matching and the evaluation protocols: micro P/R/F1, Rel, Rel+,
and the directional macro F1 used for SemEval-style data.

All ratios are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import enum
import json
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .schema import Entity, RelationSchema, RelationTriple


class ScoringMode(enum.Enum):
    MICRO = "micro"
    MACRO_SEMEVAL = "macro-semeval"
    REL = "rel"
    REL_PLUS = "rel+"


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class PRF:
    true_positives: int
    predicted_positives: int
    gold_positives: int

    def __post_init__(self):
        if self.true_positives > min(self.predicted_positives, self.gold_positives):
            raise ValueError("true positives exceed predictions or golds")

    @property
    def precision(self) -> Fraction:
        if not self.predicted_positives:
            return Fraction(0)
        return Fraction(self.true_positives, self.predicted_positives)

    @property
    def recall(self) -> Fraction:
        if not self.gold_positives:
            return Fraction(0)
        return Fraction(self.true_positives, self.gold_positives)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)

    def as_dict(self) -> dict:
        return {
            "precision": float(self.precision), "recall": float(self.recall),
            "f1": float(self.f1), "true_positives": self.true_positives,
            "predicted_positives": self.predicted_positives,
            "gold_positives": self.gold_positives,
        }


def _tagged(items) -> list[tuple[Optional[str], RelationTriple]]:
    out = []
    for it in items:
        if isinstance(it, RelationTriple):
            out.append((None, it))
        else:
            sid, t = it
            out.append((sid, t))
    return out


def _match_key(sid, t: RelationTriple, mode: ScoringMode):
    if mode is ScoringMode.REL_PLUS:
        return (sid, t.subject.span, t.subject.entity_type,
                t.object.span, t.object.entity_type, t.relation)
    return (sid, t.subject.span, t.object.span, t.relation)


def match_triples(pred: RelationTriple, gold: RelationTriple,
                  mode: ScoringMode = ScoringMode.MICRO) -> bool:
    """Direction-sensitive match; Rel+ additionally compares entity types."""
    return _match_key(None, pred, mode) == _match_key(None, gold, mode)


def _dedup(items, null_type):
    seen, out = set(), []
    for sid, t in _tagged(items):
        if null_type is not None and t.relation == null_type:
            continue
        if (sid, t) not in seen:
            seen.add((sid, t))
            out.append((sid, t))
    return out


def micro_prf(preds, golds, mode: ScoringMode = ScoringMode.MICRO,
              null_type: str | None = None) -> PRF:
    """One-to-one matching of predicted against gold triples.

    ``preds``/``golds`` hold triples or ``(sentence_id, triple)`` pairs.
    Duplicates are collapsed and, when ``null_type`` is given, null-labelled
    triples are ignored.
    """
    if mode is ScoringMode.MACRO_SEMEVAL:
        mode = ScoringMode.MICRO
    p = _dedup(preds, null_type)
    g = _dedup(golds, null_type)
    pk = Counter(_match_key(sid, t, mode) for sid, t in p)
    gk = Counter(_match_key(sid, t, mode) for sid, t in g)
    tp = sum(min(n, gk[k]) for k, n in pk.items())
    return PRF(tp, len(p), len(g))


_DIRECTED = re.compile(r"^(?P<base>.+)\((?P<a>e[12]),(?P<b>e[12])\)$")


def base_and_direction(t: RelationTriple) -> tuple[str, str]:
    """Split a relation into (base type, direction).

    ``Cause-Effect(e2,e1)`` carries its direction in the label. A plain label
    gets its direction from the mention order: ``e1,e2`` when the subject
    precedes the object in the sentence.
    """
    m = _DIRECTED.match(t.relation)
    if m:
        if m["a"] == m["b"]:
            raise ScoringError(f"unparseable directed label {t.relation!r}")
        return m["base"], f"{m['a']},{m['b']}"
    if "(" in t.relation or ")" in t.relation:
        raise ScoringError(f"unparseable directed label {t.relation!r}")
    first = t.subject.span_start < t.object.span_start
    return t.relation, "e1,e2" if first else "e2,e1"


@dataclass(frozen=True)
class MacroReport:
    per_type: dict[str, PRF]

    @property
    def macro_f1(self) -> Fraction:
        if not self.per_type:
            return Fraction(0)
        return sum((p.f1 for p in self.per_type.values()), Fraction(0)) / len(self.per_type)

    def as_dict(self) -> dict:
        return {"macro_f1": float(self.macro_f1),
                "per_type": {k: v.as_dict() for k, v in sorted(self.per_type.items())}}


def _pair_key(sid, t: RelationTriple):
    # the unordered mention pair, so a direction flip still lands on the same pair
    return (sid,) + tuple(sorted([t.subject.span, t.object.span]))


def macro_semeval(preds, golds, schema: RelationSchema) -> MacroReport:
    """Per-base-type P/R/F1 with direction errors counted as wrong.

    Base types seen in neither predictions nor golds are left out of the mean;
    a type that is predicted but never gold scores F1 = 0.
    """
    p = _dedup(preds, schema.null_type)
    g = _dedup(golds, schema.null_type)
    p_bd = [(sid, t, *base_and_direction(t)) for sid, t in p]
    g_bd = [(sid, t, *base_and_direction(t)) for sid, t in g]
    bases = sorted({b for *_, b, _d in p_bd} | {b for *_, b, _d in g_bd})
    gold_keys = Counter((_pair_key(sid, t), b, d) for sid, t, b, d in g_bd)
    per_type = {}
    for base in bases:
        pk = Counter((_pair_key(sid, t), b, d) for sid, t, b, d in p_bd if b == base)
        tp = sum(min(n, gold_keys[k]) for k, n in pk.items())
        per_type[base] = PRF(tp, sum(pk.values()),
                             sum(1 for *_, b, _d in g_bd if b == base))
    return MacroReport(per_type)


# ---------------------------------------------------------------- files

def _entity_from_json(d: dict) -> Entity:
    return Entity(int(d["start"]), int(d["end"]), d["type"], d["surface"])


def entity_to_json(e: Entity) -> dict:
    return {"start": e.span_start, "end": e.span_end, "type": e.entity_type,
            "surface": e.surface}


def triple_to_json(t: RelationTriple, score: float | None = None) -> dict:
    d = {"subj": entity_to_json(t.subject), "obj": entity_to_json(t.object),
         "relation": t.relation}
    if score is not None:
        d["score"] = score
    return d


def read_prediction_file(path) -> dict[str, list[RelationTriple]]:
    """Read ``{sentence_id, triples: [...]}`` lines.

    Canonical dataset lines (with ``tokens``/``entities``) are accepted too and
    converted to their gold triples.
    """
    out: dict[str, list[RelationTriple]] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "tokens" in rec:
                from .ingest import record_to_example
                ex = record_to_example(rec)
                out.setdefault(ex.sentence.id, []).extend(ex.gold_triples)
                continue
            out.setdefault(rec["sentence_id"], []).extend(
                RelationTriple(_entity_from_json(t["subj"]), t["relation"],
                               _entity_from_json(t["obj"]))
                for t in rec["triples"])
    return out


def write_prediction_file(path, records: Iterable[tuple[str, list[tuple[RelationTriple, float | None]]]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for sid, triples in records:
            f.write(json.dumps({
                "sentence_id": sid,
                "triples": [triple_to_json(t, s) for t, s in triples],
            }, ensure_ascii=False) + "\n")
            n += 1
    return n


def score_run(pred_file, gold_file, mode: ScoringMode,
              schema: RelationSchema) -> dict:
    preds = read_prediction_file(pred_file)
    golds = read_prediction_file(gold_file)
    for sid in preds:
        if sid not in golds:
            raise ScoringError(f"prediction for unknown sentence id {sid!r}")
    p_items = [(sid, t) for sid, ts in preds.items() for t in ts]
    g_items = [(sid, t) for sid, ts in golds.items() for t in ts]
    if mode is ScoringMode.MACRO_SEMEVAL:
        report = macro_semeval(p_items, g_items, schema)
        return {"mode": mode.value, **report.as_dict()}
    prf = micro_prf(p_items, g_items, mode, schema.null_type)
    return {"mode": mode.value, **prf.as_dict()}
