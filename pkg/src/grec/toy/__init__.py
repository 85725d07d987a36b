"""A tiny trainable encoder-decoder that implements the generation backend."""

from .decode import ToySeq2Seq, beam_search, greedy_decode
from .model import ModelConfig, Seq2SeqTransformer
from .train import TrainConfig, TrainingDiverged, grad_check, train
from .vocab import Vocab, build_vocab, detokenize, tokenize

__all__ = [
    "ModelConfig", "Seq2SeqTransformer", "ToySeq2Seq", "TrainConfig",
    "TrainingDiverged", "Vocab", "beam_search", "build_vocab", "detokenize",
    "grad_check", "greedy_decode", "tokenize", "train",
]
