import argparse
import dataclasses
import logging
import os
import shutil
import sys

from cli.config import load_run_config
from core.errors import ConfigError, FormatError, ShapeError, ValidationError
from core.fileio import staging_dir, write_csv_atomic, write_json_atomic
from core.log import setup_logging
from core.types import CANONICAL_SPECS, Split
from data.annotations import aggregate_csv
from data.archive import load_feature_archive, write_feature_archive
from data.dataset import dataset_statistics
from data.synthetic import generate_synthetic
from evaluation.evaluate import (
    evaluate, predict, prediction_file, summary_line, write_predictions, write_reports,
)
from training.checkpoint import load_checkpoint
from training.experiments import VARIANTS, run_experiments, summarize
from training.loop import HISTORY_FILE, fit

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2

REPORT_FILE = "report.json"
RUN_CONFIG_FILE = "run_config.json"


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _split_list(values):
    out = []
    for value in values or ():
        out.extend(v.strip() for v in value.split(",") if v.strip())
    return out


def _label_sources(value):
    return ("multimodal", "unimodal") if value == "both" else (value,)


def cmd_train(args):
    config = load_run_config(args.config, args.set)
    train = config.train
    if args.semi:
        train = dataclasses.replace(train, mode="semi")
    if args.progress:
        train = dataclasses.replace(train, progress=True)
    ablations = _split_list(args.ablate)
    if ablations:
        train = train.with_ablations(ablations)
    seed = config.seed if args.seed is None else args.seed
    output_dir = args.output_dir or config.output_dir
    config = dataclasses.replace(config, train=train, seed=seed, output_dir=output_dir)

    dataset = load_feature_archive(config.archive)
    with staging_dir(output_dir) as staging:
        if args.resume and os.path.exists(os.path.join(output_dir, HISTORY_FILE)):
            shutil.copy(os.path.join(output_dir, HISTORY_FILE), os.path.join(staging, HISTORY_FILE))
        result = fit(dataset, config.train, config.model, seed=seed, output_dir=staging,
                     resume_from=args.resume)
        report = evaluate(result.state.model, dataset, Split.VALID, tasks=("m",))[0]
        write_reports([report], os.path.join(staging, REPORT_FILE))
        write_json_atomic(config.to_dict(), os.path.join(staging, RUN_CONFIG_FILE))
    print(summary_line(report))
    return EXIT_OK


def cmd_eval(args):
    dataset = load_feature_archive(args.archive)
    split = Split.parse(args.split)
    model = load_checkpoint(args.checkpoint, specs=dataset.specs).model
    reports = evaluate(model, dataset, split, tasks=_split_list([args.tasks]),
                       label_sources=_label_sources(args.label_source))
    write_reports(reports, args.out)
    for report in reports:
        print(summary_line(report))
    return EXIT_OK


def cmd_predict(args):
    dataset = load_feature_archive(args.archive)
    splits = [Split.parse(s) for s in _split_list([args.split])]
    model = load_checkpoint(args.checkpoint, specs=dataset.specs).model
    frame = predict(model, dataset, splits)
    write_predictions(prediction_file(frame, args.task, args.label_source), args.out)
    print(f"wrote {len(frame)} predictions to {args.out}")
    return EXIT_OK


def cmd_synth(args):
    specs = CANONICAL_SPECS if args.canonical_shapes else None
    dataset = generate_synthetic(args.n_labeled, args.n_unlabeled, specs=specs, seed=args.seed)
    write_feature_archive(dataset, args.out)
    print(f"wrote {len(dataset)} instances to {args.out}")
    return EXIT_OK


def cmd_aggregate(args):
    out = aggregate_csv(args.scores, args.out)
    print(f"wrote {len(out)} labels to {args.out}")
    return EXIT_OK


def cmd_stats(args):
    dataset = load_feature_archive(args.archive)
    table = dataset_statistics(dataset, task=args.task)
    print(table.to_string())
    print(f"unlabeled: {dataset.stats.n_unsupervised}")
    if args.out:
        write_csv_atomic(table.reset_index(), args.out)
    return EXIT_OK


def cmd_compare(args):
    config = load_run_config(args.config, args.set)
    dataset = load_feature_archive(config.archive)
    names = _split_list(args.variants) or list(VARIANTS)
    unknown = [n for n in names if n not in VARIANTS]
    if unknown:
        raise ConfigError(f"--variants: unknown variant {unknown[0]!r}; expected one of {list(VARIANTS)}")
    seeds = [int(s) for s in _split_list([args.seeds])]
    results = run_experiments(dataset, config.train, config.model,
                              variants={n: VARIANTS[n] for n in names}, seeds=seeds)
    write_csv_atomic(results, args.out)
    print(summarize(results).to_string())
    return EXIT_OK


def build_parser():
    parser = ArgumentParser(prog="avmc", description="Acoustic-visual mixup consistent sentiment regression")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("train", help="fit a model from a JSON run config")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--semi", action="store_true", help="semi-supervised two-phase training")
    p.add_argument("--seed", type=int)
    p.add_argument("--ablate", action="append", default=[],
                   help="mixup-a, mixup-v, mixup-av, unimodal (repeatable or comma-separated)")
    p.add_argument("--output-dir")
    p.add_argument("--resume", help="last.ckpt to continue from")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metric reports for a checkpoint on one split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--tasks", default="m")
    p.add_argument("--label-source", choices=["multimodal", "unimodal", "both"], default="multimodal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="write id,prediction,label CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--task", default="m")
    p.add_argument("--label-source", choices=["multimodal", "unimodal"], default="multimodal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="write a synthetic feature archive")
    p.add_argument("--out", required=True)
    p.add_argument("--n-labeled", type=int, required=True)
    p.add_argument("--n-unlabeled", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--canonical-shapes", action="store_true", help="use the (50,768)/(925,25)/(232,177) shapes")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("aggregate", help="aggregate seven annotator scores per row")
    p.add_argument("scores")
    p.add_argument("out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("stats", help="per-split sentiment class counts of an archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--task", default="m")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", help="multi-seed comparison of modes and ablations")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--variants", action="append", default=[])
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, FormatError, ShapeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
