"""Command-line driver. Every stage reads and writes JSONL files.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import encoder as enc
from .backend import GenerationRequest, MockBackend
from .ingest import (SEMEVAL_SCHEMA, IngestError, SyntheticGrammarConfig, load_canonical,
                     load_schema, load_semeval, load_tacred, synthesize_corpus,
                     write_canonical, write_schema)
from .metrics import ScoringError, ScoringMode, score_run, write_prediction_file
from .schema import SchemaError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("grec")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_hash(args: argparse.Namespace) -> str:
    d = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    blob = json.dumps(d, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _summary(args, **fields) -> None:
    out = {"command": args.command, **fields,
           "seed": getattr(args, "seed", None), "config_hash": _config_hash(args)}
    print(json.dumps(out, sort_keys=True))


def _need(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"missing input: {p}")
    return p


def _schema(args):
    return load_schema(_need(args.schema))


def _examples(path, schema, strict=False):
    res = load_canonical(_need(path), schema, strict=strict)
    for err in res.errors:
        log.warning("skipped record %s", err)
    return res.examples


# ---------------------------------------------------------------- commands

def cmd_convert(args):
    schema_path = Path(args.schema) if args.schema else None
    if args.adapter == "semeval":
        schema = load_schema(schema_path) if schema_path and schema_path.exists() else SEMEVAL_SCHEMA
        res = load_semeval(_need(args.input), schema, strict=args.strict)
        if schema_path and not schema_path.exists():
            write_schema(schema, schema_path)
    elif args.adapter == "tacred":
        schema = _schema(args)
        res = load_tacred(_need(args.input), schema, strict=args.strict)
    else:
        schema = _schema(args)
        res = load_canonical(_need(args.input), schema, strict=args.strict)
    for err in res.errors:
        log.warning("skipped record %s", err)
    n = write_canonical(res.examples, args.output)
    _summary(args, records=n, errors=len(res.errors))


def cmd_synthesize(args):
    cfg = SyntheticGrammarConfig(
        entity_type_count=args.entity_types, relation_type_count=args.relation_types,
        templates_per_relation=args.templates, vocabulary_size=args.vocabulary,
        negative_fraction=args.negative_fraction, seed=args.seed,
        train_size=args.train_size, dev_size=args.dev_size, test_size=args.test_size)
    train, dev, test, schema = synthesize_corpus(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in (("train", train), ("dev", dev), ("test", test)):
        write_canonical(data, out / f"{name}.jsonl")
    write_schema(schema, out / "schema.json")
    _summary(args, train=len(train), dev=len(dev), test=len(test))


def cmd_encode(args):
    schema = _schema(args)
    examples = _examples(args.data, schema, args.strict)
    res = enc.encode_dataset(examples, enc.Mode(args.mode), enc.MarkerScheme(args.marker),
                             enc.TargetOrder(args.order), schema,
                             with_entities=not args.no_entities, strict=args.strict)
    for err in res.errors:
        log.warning("skipped record %s", err)
    n = enc.write_pairs(res.pairs, args.output)
    _summary(args, pairs=n, positives=sum(p.is_positive for p in res.pairs),
             errors=len(res.errors))


def cmd_sample(args):
    from .sampler import SamplingConfig, sample_negatives
    pairs = enc.read_pairs(_need(args.input))
    kept = sample_negatives(pairs, SamplingConfig(args.alpha, args.seed))
    n = enc.write_pairs(kept, args.output)
    _summary(args, input=len(pairs), output=n,
             negatives=sum(not p.is_positive for p in kept))


def _model_configs(args):
    from .toy import ModelConfig, TrainConfig
    mc = ModelConfig(args.embed_dim, args.layers, args.heads, args.ff_dim,
                     args.max_source_len, args.max_target_len, args.seed)
    tc = TrainConfig(args.lr, args.batch_size, args.epochs)
    return mc, tc


def cmd_train(args):
    import torch
    from .toy import ToySeq2Seq, build_vocab, train
    torch.set_num_threads(1)
    pairs = enc.read_pairs(_need(args.pairs))
    mc, tc = _model_configs(args)
    vocab = build_vocab(pairs)
    model, losses = train(pairs, vocab, mc, tc)
    ToySeq2Seq(model, vocab).save(args.output)
    if args.loss_out:
        Path(args.loss_out).write_text(json.dumps(losses) + "\n")
    _summary(args, pairs=len(pairs), vocab=len(vocab), epochs=tc.epochs,
             final_loss=losses[-1] if losses else None)


def _backend(args):
    if args.mock:
        return MockBackend.from_jsonl(_need(args.mock))
    if not args.checkpoint:
        raise UsageError("generate needs --checkpoint or --mock")
    from .toy import ToySeq2Seq
    return ToySeq2Seq.load(_need(args.checkpoint), beam_width=max(args.beam_width, args.top_n))


def cmd_generate(args):
    backend = _backend(args)
    sources = list(dict.fromkeys(p.source for p in enc.read_pairs(_need(args.pairs))))
    with open(args.output, "w", encoding="utf-8") as f:
        for src in sources:
            cands = backend.generate_top_n(GenerationRequest(src, args.top_n))
            f.write(json.dumps({"source": src, "candidates": [
                {"text": c.text, "score": c.score} for c in cands]}, ensure_ascii=False) + "\n")
    _summary(args, sources=len(sources), top_n=args.top_n)


def cmd_select(args):
    from .pipeline import select_entity_pair, select_one_pass
    from .scaling import ScalingConfig
    schema = _schema(args)
    examples = _examples(args.data, schema)
    mock = MockBackend.from_jsonl(_need(args.candidates))
    table = {s: mock.generate_top_n(GenerationRequest(s, args.top_n)) for s in mock.sources()}
    order = enc.TargetOrder(args.order)
    if args.mode == enc.Mode.ONE_PASS.value:
        preds = select_one_pass(examples, table, order, schema, not args.no_entities)
    else:
        preds = select_entity_pair(examples, table, ScalingConfig(args.beta, args.top_n),
                                   enc.MarkerScheme(args.marker), order, schema)
    write_prediction_file(args.output, preds)
    _summary(args, sentences=len(preds), positives=sum(len(t) for _, t in preds),
             beta=args.beta)


def cmd_score(args):
    schema = _schema(args)
    report = score_run(_need(args.pred), _need(args.gold), ScoringMode(args.scoring), schema)
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2) + "\n")
    _summary(args, **{k: v for k, v in report.items() if k != "per_type"})


def cmd_ablate(args):
    import torch
    from .pipeline import run_toy_experiment
    torch.set_num_threads(1)
    schema = _schema(args)
    train = _examples(args.train, schema)
    test = _examples(args.test, schema)
    mc, tc = _model_configs(args)
    grid = {"alphas": args.alphas, "betas": args.betas, "rows": []}
    for alpha in args.alphas:
        r = run_toy_experiment(train, test, schema, betas=args.betas, alpha=alpha,
                               top_n=args.top_n, scheme=enc.MarkerScheme(args.marker),
                               order=enc.TargetOrder(args.order), model_config=mc,
                               train_config=tc, sample_seed=args.seed)
        grid["rows"].append({
            "alpha": alpha, "train_pairs": r.train_pairs,
            "sampled_negatives": r.sampled_negatives,
            "cells": [{"beta": b, "positive_predictions": r.positive_counts[b],
                       **r.cells[b].as_dict()} for b in args.betas],
        })
    text = json.dumps(grid, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    _summary(args, alphas=len(args.alphas), betas=len(args.betas))


def cmd_grad_check(args):
    import torch
    from .encoder import EncodedPair
    from .toy import ModelConfig, Seq2SeqTransformer, build_vocab, grad_check
    torch.set_num_threads(1)
    pairs = [EncodedPair("a b c", "[a | r | c]", "s0"),
             EncodedPair("c b a", "[c | None | a]", "s1"),
             EncodedPair("b a", "[b | r | a]", "s2"),
             EncodedPair("a c", "[a | None | c]", "s3")]
    vocab = build_vocab(pairs)
    model = Seq2SeqTransformer(ModelConfig(16, 1, 2, 32, 16, 16, args.seed), len(vocab))
    err = grad_check(model, pairs, vocab, args.epsilon, args.coordinates, args.seed)
    _summary(args, max_relative_error=err, parameters=model.parameter_count(),
             passed=err < args.tolerance)
    if err >= args.tolerance:
        return EXIT_INTERNAL


# ---------------------------------------------------------------- parser

def _add_encoding(p, marker=True):
    p.add_argument("--mode", choices=[m.value for m in enc.Mode], default="entity-pair")
    if marker:
        p.add_argument("--marker", choices=[m.value for m in enc.MarkerScheme], default="typed")
    p.add_argument("--order", choices=[o.value for o in enc.TargetOrder], default="sro")
    p.add_argument("--no-entities", action="store_true",
                   help="one-pass only: encode the bare sentence")


def _add_model(p):
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--ff-dim", type=int, default=128)
    p.add_argument("--max-source-len", type=int, default=96)
    p.add_argument("--max-target-len", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = _Parser(prog="grec", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("convert", cmd_convert, "convert a benchmark file to canonical JSONL")
    p.add_argument("--adapter", required=True, choices=["tacred", "semeval", "canonical"])
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--schema")
    p.add_argument("--strict", action="store_true")

    p = add("synthesize", cmd_synthesize, "write a synthetic train/dev/test corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--entity-types", type=int, default=4)
    p.add_argument("--relation-types", type=int, default=4)
    p.add_argument("--templates", type=int, default=3)
    p.add_argument("--vocabulary", type=int, default=40)
    p.add_argument("--negative-fraction", type=float, default=0.3)
    p.add_argument("--train-size", type=int, default=500)
    p.add_argument("--dev-size", type=int, default=100)
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("encode", cmd_encode, "build source/target pairs")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strict", action="store_true")
    _add_encoding(p)

    p = add("sample", cmd_sample, "negative sampling over encoded pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("train", cmd_train, "train the toy seq2seq model")
    p.add_argument("--pairs", required=True)
    p.add_argument("--output", required=True, help="checkpoint path")
    p.add_argument("--loss-out", help="write the per-epoch loss trace here")
    _add_model(p)

    p = add("generate", cmd_generate, "top-N generation for encoded sources")
    p.add_argument("--pairs", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--mock", help="candidate fixtures JSONL instead of a model")
    p.add_argument("--top-n", type=int, default=5)
    p.add_argument("--beam-width", type=int, default=5)

    p = add("select", cmd_select, "pick predictions from candidates (decoding scaling)")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--top-n", type=int, default=5)
    _add_encoding(p)

    p = add("score", cmd_score, "score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--scoring", choices=[m.value for m in ScoringMode], default="micro")
    p.add_argument("--output")

    p = add("ablate", cmd_ablate, "alpha x beta grid with the toy model")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--alphas", type=float, nargs="+", default=[1.0])
    p.add_argument("--betas", type=float, nargs="+", default=[1.0])
    p.add_argument("--top-n", type=int, default=5)
    p.add_argument("--output")
    p.add_argument("--marker", choices=[m.value for m in enc.MarkerScheme], default="typed")
    p.add_argument("--order", choices=[o.value for o in enc.TargetOrder], default="sro")
    _add_model(p)

    p = add("grad-check", cmd_grad_check, "finite-difference check of the toy model")
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--coordinates", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)

    return parser, subs


def _parse(argv):
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = json.loads(_need(known.config).read_text())
        cmd = next((a for a in argv if a in subs), None)
        if cmd:
            valid = {a.dest for a in subs[cmd]._actions}
            unknown = set(cfg) - valid
            if unknown:
                parser.error(f"unknown config key(s): {', '.join(sorted(unknown))}")
            subs[cmd].set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:
        # argparse exits on usage errors and --help; hand back the code instead
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except FileNotFoundError as err:
        print(f"grec: {err}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as err:
        print(f"grec: bad config file: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except (IngestError, SchemaError, ScoringError, enc.EncodingError,
            json.JSONDecodeError, FileNotFoundError, KeyError) as err:
        print(f"grec {args.command}: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ValueError) as err:
        # remaining ValueErrors come from config validation (alpha, beta, sizes, ...)
        print(f"grec {args.command}: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as err:  # noqa: BLE001
        log.exception("internal error")
        print(f"grec {args.command}: internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
