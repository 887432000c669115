"""Command-line interface.

Subcommands: annotate, stats, train, predict, eval, synth.  Exit codes:
0 success, 1 runtime failure (bad/missing data), 2 usage or configuration
error.  Human-readable output goes to stdout, logs to stderr; pass --json
for a single-line machine-readable summary on stdout instead.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import corpus as corpus_mod
from . import features as feat_mod
from . import inference as infer_mod
from . import report as report_mod
from . import supervision as sup_mod
from . import synth as synth_mod
from . import training as train_mod
from .errors import ConfigError, DataError
from .model import Hyperparams, Model, load_model, save_model

logger = logging.getLogger("weakrel")

_HYPER_KEYS = {
    "alpha": float, "lambda1": float, "lambda2": float, "negatives": int,
    "dropout": float, "pair_samples": int, "epochs": int, "seed": int,
    "min_count": int, "dim_v": int, "dim_z": int, "eta": float,
    "phi0": float, "phi1": float, "linear_decay": bool,
}


def read_config(path) -> dict:
    """Flat key=value config; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip().strip("\"'")
    return values


def _coerce(key, value):
    kind = _HYPER_KEYS[key]
    if kind is bool:
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"config key {key}: expected a boolean, got {value!r}")
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"config key {key}: expected {kind.__name__}, got {value!r}") from None


def build_hyperparams(config: dict, args) -> Hyperparams:
    """Precedence: CLI flag > config file > built-in default."""
    hyper = Hyperparams()
    for key in _HYPER_KEYS:
        if key in config:
            setattr(hyper, key, _coerce(key, config[key]))
    for key in _HYPER_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(hyper, key, flag)
    hyper.validate()
    return hyper


def _label_space_from_lf_file(path) -> sup_mod.LabelSpace:
    """Relation names in first-occurrence order over the LF file."""
    relations = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            record = json.loads(raw)
            name = record.get("relation")
            if name and name != sup_mod.NONE_LABEL and name not in relations:
                relations.append(name)
    if not relations:
        raise ConfigError(f"no relation names found in {path}")
    return sup_mod.LabelSpace(tuple(relations))


def _resolve_label_space(config: dict, lfs_path) -> sup_mod.LabelSpace:
    if "relations" in config:
        names = tuple(n.strip() for n in config["relations"].split(",") if n.strip())
        return sup_mod.LabelSpace(names)
    return _label_space_from_lf_file(lfs_path)


def _emit(args, human_lines, payload):
    if getattr(args, "json", False):
        print(json.dumps(payload))
    else:
        for line in human_lines:
            print(line)


def cmd_annotate(args):
    corpus = corpus_mod.load_corpus(args.corpus)
    label_space = _label_space_from_lf_file(args.lfs)
    lfs = sup_mod.load_labeling_functions(args.lfs, label_space)
    mentions = corpus_mod.generate_mentions(corpus)
    annotations = sup_mod.annotate(corpus, mentions, lfs)
    sup_mod.write_annotations_tsv(annotations, label_space, args.out)
    if args.mentions_out:
        corpus_mod.write_mentions_tsv(mentions, args.mentions_out)
    c_l, c_u = sup_mod.split_labeled(mentions, annotations)
    payload = {
        "mentions": len(mentions),
        "annotations": len(annotations),
        "labeled": len(c_l),
        "unlabeled": len(c_u),
        "out": args.out,
    }
    _emit(args, [
        f"{len(mentions)} mentions, {len(annotations)} annotations "
        f"({len(c_l)} labeled, {len(c_u)} unlabeled) -> {args.out}",
    ], payload)
    return 0


def cmd_stats(args):
    annotations, label_space = sup_mod.read_annotations_tsv(args.annotations)
    stats = sup_mod.conflict_stats(annotations, label_space)
    human = [
        f"Total number of RM: {stats.total_rm}",
        f"RM annotated as None: {stats.rm_annotated_as_none}",
        f"RM with conflicts: {stats.rm_with_conflicts}",
        f"Conflicts involving None: {stats.conflicts_involving_none}",
    ]
    _emit(args, human, stats.as_dict())
    return 0


def _pipeline_inputs(args, config):
    corpus = corpus_mod.load_corpus(args.corpus)
    label_space = _resolve_label_space(config, args.lfs)
    lfs = sup_mod.load_labeling_functions(args.lfs, label_space)
    mentions = corpus_mod.generate_mentions(corpus)
    annotations = sup_mod.annotate(corpus, mentions, lfs)
    return corpus, label_space, lfs, mentions, annotations


def cmd_train(args):
    config = read_config(args.config) if args.config else {}
    hyper = build_hyperparams(config, args)
    corpus, label_space, lfs, mentions, annotations = _pipeline_inputs(args, config)
    brown = feat_mod.load_brown_clusters(args.brown) if args.brown else None

    sentences = {s.id: s for s in corpus}
    raw_features = [
        feat_mod.extract_features(m, sentences[m.sentence_id], brown)
        for m in mentions
    ]
    labeled = set(annotations.by_mention)
    vocab = feat_mod.build_vocab(
        (raw_features[m.id] for m in mentions if m.id in labeled),
        min_count=hyper.min_count,
    )
    bags = [
        feat_mod.encode(raw_features[m.id], vocab, mention_id=m.id)
        for m in mentions
    ]
    logger.info(
        "training on %d labeled mentions, %d features, %d labeling functions",
        len(labeled), len(vocab), len(lfs),
    )
    params, report = train_mod.train(
        bags, annotations, label_space, vocab, hyper, n_lfs=len(lfs)
    )
    model = Model(params, label_space, tuple(lf.name for lf in lfs), vocab)
    save_model(model, args.model_out)

    extras = []
    if args.vocab_out:
        feat_mod.write_vocab_tsv(vocab, args.vocab_out)
        extras.append(args.vocab_out)
    if args.truth_out:
        assignments = train_mod.infer_all_truth(bags, annotations, params)
        from .truth import write_truth_tsv

        write_truth_tsv(assignments, label_space, args.truth_out)
        extras.append(args.truth_out)
    if args.report_dir:
        extras.extend(report_mod.write_train_report(report, args.report_dir))

    payload = report.as_dict() | {"model": args.model_out, "reports": extras}
    _emit(args, [
        f"trained {hyper.epochs} epochs in {report.wall_time_s:.1f}s "
        f"(skipped {report.skipped_mentions} empty-bag mentions) -> {args.model_out}",
    ], payload)
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    corpus = corpus_mod.load_corpus(args.corpus)
    mentions = corpus_mod.generate_mentions(corpus)
    brown = feat_mod.load_brown_clusters(args.brown) if args.brown else None
    sentences = {s.id: s for s in corpus}
    bags = [
        feat_mod.encode(
            feat_mod.extract_features(m, sentences[m.sentence_id], brown),
            model.vocab,
            mention_id=m.id,
        )
        for m in mentions
    ]
    eta = args.eta if args.eta is not None else infer_mod.default_eta(model.label_space.k)
    empty = sum(1 for b in bags if len(b) == 0)
    if empty:
        logger.warning("%d mentions have no in-vocabulary features; predicted None", empty)

    if args.classify:
        predictions = []
        for bag in bags:
            label = infer_mod.classify(bag, model.params)
            probs = (
                infer_mod.predict(bag, model.params, eta=float("inf")).probs
                if len(bag)
                else np.zeros(model.params.n_labels)
            )
            predictions.append(
                infer_mod.Prediction(bag.mention_id, label, probs, 0.0, "restricted")
            )
    else:
        predictions = infer_mod.predict_all(bags, model.params, eta)
    infer_mod.write_predictions_tsv(predictions, model.label_space, args.out)

    extras = []
    if args.report_dir:
        extras.extend(report_mod.write_prediction_report(predictions, eta, args.report_dir))
    n_none = sum(1 for p in predictions if p.label == 0)
    payload = {
        "mentions": len(predictions),
        "predicted_none": n_none,
        "empty_bags": empty,
        "eta": eta,
        "out": args.out,
        "reports": extras,
    }
    _emit(args, [
        f"{len(predictions)} predictions ({n_none} None, eta={eta:.4f}) -> {args.out}",
    ], payload)
    return 0


def cmd_eval(args):
    preds = infer_mod.read_label_tsv(args.pred)
    gold = infer_mod.read_label_tsv(args.gold)
    if args.mode == "extraction":
        metrics = infer_mod.evaluate_extraction(preds, gold, none_label=sup_mod.NONE_LABEL)
        human = [
            f"precision: {metrics.precision:.4f}",
            f"recall:    {metrics.recall:.4f}",
            f"f1:        {metrics.f1:.4f}",
        ]
    else:
        metrics = infer_mod.evaluate_classification(preds, gold, none_label=sup_mod.NONE_LABEL)
        human = [f"accuracy:  {metrics.accuracy:.4f}"]
    human.extend(f"{key}: {value}" for key, value in metrics.counts.items())
    if args.report_dir:
        report_mod.write_metrics_report(metrics, args.report_dir)
    _emit(args, human, metrics.as_dict())
    return 0


def cmd_synth(args):
    summary = synth_mod.generate(
        args.out_dir,
        seed=args.seed,
        train_sentences=args.train_sentences,
        test_sentences=args.test_sentences,
    )
    _emit(args, [
        f"wrote synthetic dataset to {args.out_dir}: "
        f"{summary['train_mentions']} train mentions "
        f"({summary['conflict_fraction']:.1%} conflicting), "
        f"{summary['test_mentions']} test mentions",
    ], summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakrel",
        description="Relation extraction from conflicting labeling-function annotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="apply labeling functions to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lfs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mentions-out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("stats", help="conflict statistics of an annotation file")
    p.add_argument("--annotations", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lfs", required=True)
    p.add_argument("--config")
    p.add_argument("--model-out", required=True)
    p.add_argument("--brown")
    p.add_argument("--report-dir")
    p.add_argument("--vocab-out")
    p.add_argument("--truth-out")
    p.add_argument("--json", action="store_true")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--negatives", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--pair-samples", dest="pair_samples", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--dim-v", dest="dim_v", type=int)
    p.add_argument("--dim-z", dest="dim_z", type=int)
    p.add_argument("--phi0", type=float)
    p.add_argument("--phi1", type=float)
    p.add_argument("--linear-decay", dest="linear_decay", action="store_const", const=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--eta", type=float)
    p.add_argument("--brown")
    p.add_argument("--classify", action="store_true",
                   help="restricted arg max over relations (no None, no eta)")
    p.add_argument("--report-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--mode", required=True, choices=["extraction", "classification"])
    p.add_argument("--report-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate the synthetic benchmark dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--train-sentences", type=int, default=2500)
    p.add_argument("--test-sentences", type=int, default=500)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
