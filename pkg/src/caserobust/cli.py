"""Command-line entry point: ``caserobust <group> <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import casing
from .corpus_io import FixtureSpec, generate_fixture, read_corpus, write_conll
from .errors import ContractViolation, ModelFormatError, ParseError, TrainingError
from .evaluation import format_score, word_level_prf
from .experiments import ALL_SCENARIOS, Metric, ScenarioId, render_report, run_matrix, score
from .tagger import TaggerTrainConfig, load_tagger, save_tagger, tag_corpus, train_tagger
from .truecaser import (
    TruecaserTrainConfig,
    load_model,
    save_model,
    train_truecaser,
    truecase_corpus,
    truecase_many,
)

log = logging.getLogger("caserobust")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_fixture_generate(args):
    with open(args.spec, encoding="utf-8") as fh:
        spec = FixtureSpec.from_json(fh.read())
    train, test = generate_fixture(spec)
    _write(args.out_train, write_conll(train))
    _write(args.out_test, write_conll(test))


def cmd_truecase_train(args):
    corpus = read_corpus(args.train, args.input_format)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = TruecaserTrainConfig.from_json(fh.read())
    else:
        config = TruecaserTrainConfig()
    model, history = train_truecaser(corpus, config)
    save_model(model, args.out)
    for epoch, loss in enumerate(history, 1):
        print(f"epoch {epoch}\tloss {loss:.6f}")
    if args.loss_plot:
        from .plotting import plot_loss_history

        plot_loss_history(history, args.loss_plot)


def cmd_truecase_apply(args):
    model = load_model(args.model)
    with open(args.input, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    restored = truecase_many(model, lines)
    _write(args.out, "\n".join(restored))


def cmd_truecase_eval(args):
    model = load_model(args.model)
    gold = read_corpus(args.gold, "conll")
    predicted = truecase_corpus(model, casing.lowercase_corpus(gold))
    prf = word_level_prf(gold, predicted)
    print(
        f"tp={prf.true_positives} fp={prf.false_positives} fn={prf.false_negatives}\t"
        f"precision={prf.precision:.4f}\trecall={prf.recall:.4f}\tf1={prf.f1:.4f}"
    )


def cmd_augment(args):
    strategy = casing.AugmentationStrategy.parse(args.strategy)
    corpus = read_corpus(args.input, "conll")
    fn = None
    if strategy.kind is casing.StrategyKind.TRUECASE_TRAIN:
        if not args.truecaser:
            raise ContractViolation("--truecaser is required for truecase-train")
        model = load_model(args.truecaser)
        fn = lambda text: truecase_many(model, [text])[0]  # noqa: E731
    _write(args.out, write_conll(casing.augment_corpus(corpus, strategy, args.seed, fn)))


def cmd_tag_train(args):
    corpus = read_corpus(args.train, "conll")
    model = train_tagger(corpus, TaggerTrainConfig(args.epochs, args.seed, not args.no_shuffle))
    save_tagger(model, args.out)


def cmd_tag_eval(args):
    model = load_tagger(args.model)
    gold = read_corpus(args.gold, "conll")
    metric = Metric(args.metric)
    value = score(metric, gold, tag_corpus(model, gold))
    print(f"{metric.value}\t{format_score(value)}")


def cmd_experiment_run(args):
    train = read_corpus(args.train, "conll")
    test = read_corpus(args.test, "conll")
    truecaser = load_model(args.truecaser) if args.truecaser else None
    if args.scenarios:
        scenarios = [ScenarioId.parse(s) for s in args.scenarios.split(",") if s.strip()]
    elif truecaser is not None:
        scenarios = list(ALL_SCENARIOS)
    else:
        scenarios = [s for s in ALL_SCENARIOS if not s.needs_truecaser]
    report = run_matrix(
        train,
        test,
        scenarios,
        truecaser,
        TaggerTrainConfig(epochs=args.epochs, seed=args.seed),
        Metric(args.metric),
        args.seed,
    )
    _write(args.out, render_report(report, args.format))
    if args.figure:
        from .plotting import plot_report

        plot_report(report, args.figure)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="caserobust",
        description="Casing robustness experiments for sequence taggers.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    groups = parser.add_subparsers(dest="group", required=True)

    fixture = groups.add_parser("fixture", help="synthetic corpora").add_subparsers(dest="command", required=True)
    p = fixture.add_parser("generate", help="write a train/test fixture from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=cmd_fixture_generate)

    tc = groups.add_parser("truecase", help="character-level truecaser").add_subparsers(dest="command", required=True)
    p = tc.add_parser("train", help="train on cased text (CoNLL or one sentence per line)")
    p.add_argument("--train", required=True)
    p.add_argument("--input-format", choices=("auto", "conll", "plain"), default="auto")
    p.add_argument("--config", help="JSON with TruecaserTrainConfig fields")
    p.add_argument("--out", required=True)
    p.add_argument("--loss-plot", help="also write a loss-curve figure here")
    p.set_defaults(func=cmd_truecase_train)
    p = tc.add_parser("apply", help="truecase a text file line by line")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_truecase_apply)
    p = tc.add_parser("eval", help="word-level P/R/F1 against a cased CoNLL file")
    p.add_argument("--model", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_truecase_eval)

    p = groups.add_parser("augment", help="apply a casing strategy to a CoNLL file")
    p.add_argument("--strategy", required=True, help="cased|uncased|c+u|half-mixed:<p>|truecase-train")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truecaser")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_augment)

    tag = groups.add_parser("tag", help="perceptron tagger").add_subparsers(dest="command", required=True)
    p = tag.add_parser("train")
    p.add_argument("--train", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tag_train)
    p = tag.add_parser("eval")
    p.add_argument("--model", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--metric", choices=[m.value for m in Metric], default="span-f1")
    p.set_defaults(func=cmd_tag_eval)

    exp = groups.add_parser("experiment", help="scenario matrix").add_subparsers(dest="command", required=True)
    p = exp.add_parser("run", help="train and score every casing scenario")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--truecaser", help="truecaser model (needed for e4/e5)")
    p.add_argument("--metric", choices=[m.value for m in Metric], default="span-f1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--scenarios", help="comma-separated subset, e.g. e1,e3,e3.5")
    p.add_argument("--format", choices=("text", "json", "tsv"), default="text")
    p.add_argument("--out", default="-")
    p.add_argument("--figure", help="write a bar chart of the report here")
    p.set_defaults(func=cmd_experiment_run)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (ContractViolation, ParseError, ModelFormatError, TrainingError, OSError, json.JSONDecodeError) as exc:
        msg = " ".join(str(exc).split())
        print(f"caserobust: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
