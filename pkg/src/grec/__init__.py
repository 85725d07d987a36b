"""Generative relation extraction: sequence encodings, negative sampling,
decoding scaling over top-N candidates, target parsing and triple scorers."""

from .backend import Candidate, GenerationBackend, GenerationRequest, MockBackend
from .encoder import (EncodedPair, MarkerScheme, Mode, TargetOrder, build_one_pass_source,
                      build_one_pass_target, build_pair_source, build_pair_target,
                      direction_block, encode_dataset, enumerate_pairs, mark_entities,
                      relation_list_block)
from .metrics import PRF, ScoringMode, macro_semeval, match_triples, micro_prf, score_run
from .parser import Malformed, Parsed, RawTriple, parse_target, resolve_one_pass, resolve_pair
from .sampler import SamplingConfig, sample_negatives
from .scaling import ScalingConfig, SelectedPrediction, classify_candidates, select_prediction
from .schema import (Entity, LabeledExample, RelationSchema, RelationTriple, SchemaError,
                     Sentence, validate_schema)

__version__ = "0.1.0"
