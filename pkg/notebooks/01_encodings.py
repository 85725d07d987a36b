# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Encoding sentences as generation targets
#
# A labeled sentence becomes one or more (source, target) string pairs.
# Entity-pair mode asks about one ordered pair at a time; one-pass mode asks
# for every triple of the sentence at once.

# %%
from grec import (Entity, LabeledExample, RelationSchema, RelationTriple, Sentence)
from grec.encoder import (MarkerScheme, Mode, TargetOrder, build_one_pass_source,
                          build_one_pass_target, build_pair_source, build_pair_target,
                          encode_dataset)
from grec.parser import parse_target, resolve_one_pass

tokens = "Toefting transferred to Bolton in February 2002 from German club Hamburg .".split()
toefting = Entity.from_tokens(tokens, 0, 1, "Person")
bolton = Entity.from_tokens(tokens, 3, 4, "Organization")
german = Entity.from_tokens(tokens, 8, 9, "Geo-political")
club = Entity.from_tokens(tokens, 9, 10, "Organization")
hamburg = Entity.from_tokens(tokens, 10, 11, "Organization")
sentence = Sentence("toefting", tokens, (toefting, bolton, german, club, hamburg))
example = LabeledExample(sentence, (
    RelationTriple(toefting, "works for", bolton),
    RelationTriple(toefting, "works for", hamburg),
    RelationTriple(club, "affiliated to", german),
))
schema = RelationSchema(("affiliated to", "located at", "makes", "part of",
                         "relationship", "works for"), "None",
                        ("Person", "Organization", "Geo-political"))

# %% [markdown]
# ## Entity-pair mode
# The three marker schemes only change how the two entities are flagged in
# the sentence. The direction block and the relation list are always appended.

# %%
for scheme in MarkerScheme:
    print(f"{scheme.value:8s}", build_pair_source(sentence, toefting, bolton, scheme, schema))

# %%
for order in TargetOrder:
    print(f"{order.value:4s}", build_pair_target(toefting, bolton, "works for", order))

# %% [markdown]
# Five entities give 5 * 4 = 20 ordered pairs, three of them positive.

# %%
res = encode_dataset([example], Mode.ENTITY_PAIR, MarkerScheme.TYPED, TargetOrder.SRO, schema)
print(len(res.pairs), "pairs,", sum(p.is_positive for p in res.pairs), "positive")
for p in res.pairs[:4]:
    print(p.target)

# %% [markdown]
# ## One-pass mode

# %%
print(build_one_pass_source(sentence, schema))
target = build_one_pass_target(example.gold_triples)
print(target)

# %% [markdown]
# Parsing the target and resolving surfaces back to mentions recovers the triples.
# Blocks that name an unknown entity or relation are dropped and counted.

# %%
triples, dropped = resolve_one_pass(parse_target(target).triples, sentence, schema)
print(triples == sorted(example.gold_triples, key=lambda t: (t.subject.span_start,
                                                             t.object.span_start,
                                                             t.relation)), dropped)
noisy = target + " [Ghost | works for | Bolton]"
print(resolve_one_pass(parse_target(noisy).triples, sentence, schema)[1], "dropped")
print(parse_target("[Toefting | works for"))
