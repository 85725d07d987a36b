import pytest

from grec.schema import (Entity, LabeledExample, RelationSchema, RelationTriple,
                         SchemaError, Sentence, validate_schema)


def test_valid_schema_has_empty_report():
    assert validate_schema(RelationSchema(("works for", "located at"), "None")) == []


def test_duplicate_relation_reported_once():
    report = validate_schema({"relation_types": ["works for", "works for"], "null_type": "None"})
    assert len(report) == 1
    assert "duplicate" in report[0]


def test_reserved_character_reported():
    report = validate_schema({"relation_types": ["a|b"], "null_type": "None"})
    assert len(report) == 1
    assert "reserved" in report[0]


@pytest.mark.parametrize("bad", [
    {"relation_types": [], "null_type": "None"},
    {"relation_types": ["None"], "null_type": "None"},
    {"relation_types": ["a]"], "null_type": "None"},
])
def test_invalid_schema_rejected_at_construction(bad):
    assert validate_schema(bad)
    with pytest.raises(SchemaError):
        RelationSchema.from_dict(bad)


def test_entity_span_invariants():
    with pytest.raises(SchemaError):
        Entity(2, 2, "T", "x")
    with pytest.raises(SchemaError):
        Entity(-1, 1, "T", "x")


def test_sentence_rejects_whitespace_tokens_and_bad_surfaces():
    with pytest.raises(SchemaError):
        Sentence("s", ("a b",))
    with pytest.raises(SchemaError):
        Sentence("s", ("a", ""))
    with pytest.raises(SchemaError):
        Sentence("s", ("a", "b"), (Entity(0, 1, "T", "b"),))
    with pytest.raises(SchemaError):
        Sentence("s", ("a",), (Entity(0, 2, "T", "a b"),))


def test_overlapping_entities_allowed_in_sentence():
    toks = ("New", "York", "City")
    s = Sentence("s", toks, (Entity.from_tokens(toks, 0, 3, "LOC"),
                             Entity.from_tokens(toks, 0, 2, "LOC")))
    assert len(s.entities) == 2


def test_surface_round_trips(toefting):
    ex, _ = toefting
    for e in ex.sentence.entities:
        assert " ".join(ex.sentence.tokens[e.span_start:e.span_end]) == e.surface


def test_labeled_example_rejects_foreign_entities_and_self_relations(toefting):
    ex, ents = toefting
    stranger = Entity(0, 1, "Organization", "Toefting")
    with pytest.raises(SchemaError):
        LabeledExample(ex.sentence, (RelationTriple(stranger, "works for", ents["Bolton"]),))
    with pytest.raises(SchemaError):
        LabeledExample(ex.sentence, (RelationTriple(ents["Bolton"], "works for", ents["Bolton"]),))


def test_check_labels(toefting, ace_schema):
    ex, ents = toefting
    ex.check_labels(ace_schema)
    bad = LabeledExample(ex.sentence, (RelationTriple(ents["club"], "None", ents["German"]),))
    with pytest.raises(SchemaError):
        bad.check_labels(ace_schema)


def test_types_are_immutable(toefting):
    ex, ents = toefting
    with pytest.raises(AttributeError):
        ents["Bolton"].surface = "x"
    with pytest.raises(AttributeError):
        ex.sentence.id = "y"
