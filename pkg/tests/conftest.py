import numpy as np
import pytest
import torch

from grec.schema import Entity, LabeledExample, RelationSchema, RelationTriple, Sentence

torch.set_num_threads(1)

ACE_RELATIONS = ("affiliated to", "located at", "makes", "part of", "relationship", "works for")
TOEFTING_TOKENS = tuple("Toefting transferred to Bolton in February 2002 from German club Hamburg .".split())


@pytest.fixture
def ace_schema():
    return RelationSchema(ACE_RELATIONS, "None",
                          ("Person", "Organization", "Geo-political"))


@pytest.fixture
def toefting():
    tok = TOEFTING_TOKENS
    ents = {
        "Toefting": Entity.from_tokens(tok, 0, 1, "Person"),
        "Bolton": Entity.from_tokens(tok, 3, 4, "Organization"),
        "German": Entity.from_tokens(tok, 8, 9, "Geo-political"),
        "club": Entity.from_tokens(tok, 9, 10, "Organization"),
        "Hamburg": Entity.from_tokens(tok, 10, 11, "Organization"),
    }
    sent = Sentence("toefting", tok, tuple(ents.values()))
    triples = (
        RelationTriple(ents["Toefting"], "works for", ents["Bolton"]),
        RelationTriple(ents["Toefting"], "works for", ents["Hamburg"]),
        RelationTriple(ents["club"], "affiliated to", ents["German"]),
    )
    return LabeledExample(sent, triples), ents


# ---------------------------------------------------------------- random corpora

WORDS = ("alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota",
         "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma", ".", ",")
TYPES = ("Person", "Organization", "Location", "Misc")


def random_schema(rng, k=None):
    k = k or int(rng.integers(1, 6))
    rels = [f"rel{i} {'x' * int(rng.integers(1, 3))}" for i in range(k)]
    return RelationSchema(tuple(rels), "None", TYPES)


def random_example(rng, schema, sid="s", max_entities=5, unique_surfaces=True,
                   positive_rate=0.4):
    """A valid sentence with non-overlapping entities and random positive triples."""
    m = int(rng.integers(0, max_entities + 1))
    tokens, ents = [], []
    used = set()
    for i in range(m):
        for _ in range(int(rng.integers(0, 3))):
            tokens.append(str(rng.choice(WORDS)))
        n = int(rng.integers(1, 3))
        while True:
            name = [f"N{int(rng.integers(0, 10 ** 6))}" for _ in range(n)]
            if not unique_surfaces or " ".join(name) not in used:
                break
        used.add(" ".join(name))
        start = len(tokens)
        tokens.extend(name)
        ents.append(Entity(start, len(tokens), str(rng.choice(TYPES)), " ".join(name)))
    tokens.append(".")
    triples = []
    for a in ents:
        for b in ents:
            if a != b and rng.random() < positive_rate:
                triples.append(RelationTriple(a, str(rng.choice(schema.relation_types)), b))
    return LabeledExample(Sentence(sid, tuple(tokens), tuple(ents)), tuple(triples))


def random_corpus(rng, schema, n, **kw):
    return [random_example(rng, schema, sid=f"s{i}", **kw) for i in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
