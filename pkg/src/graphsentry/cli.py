"""Command-line entry points.

Exit codes: 0 success, 2 input or usage error, 3 empty-result error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .attacks import ATTACKS, plan_lines, plan_succeeds, plan_summary, run_attack
from .attributes import ATTRIBUTE_NAMES, write_feature_csv
from .config import ConfigError, load_config
from .detection import EmptyResultError, read_samples_csv, write_importances_csv
from .forest import GiniForestClassifier
from .graph import ParseError, load_graph
from .pipeline import collect_run_reports, format_report_table, run_experiment

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        if args.out is not None:
            config = dataclasses.replace(config, output_dir=Path(args.out))
        if args.seed is not None:
            config = dataclasses.replace(config, sampling_seed=args.seed)
        run_experiment(config, quiet=args.quiet)
    except (ConfigError, ParseError, OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    except EmptyResultError as exc:
        return _fail(str(exc), EXIT_EMPTY)
    return EXIT_OK


def _cmd_attributes(args) -> int:
    try:
        g = load_graph(args.edges, args.labels)
        write_feature_csv(sys.stdout, g, args.nodes)
    except (ParseError, OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    return EXIT_OK


def _cmd_attack(args) -> int:
    try:
        g = load_graph(args.edges, args.labels)
        plan = run_attack(g, args.attack, args.target, args.budget)
    except (ParseError, OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    success = bool(plan.flips) and plan_succeeds(g, plan)
    if not args.quiet:
        for line in plan_lines(plan):
            print(line)
    print(json.dumps(plan_summary(plan, success), sort_keys=True))
    return EXIT_OK


def _cmd_train(args) -> int:
    try:
        with open(args.features, "r", encoding="utf-8", newline="") as handle:
            X, y, _ = read_samples_csv(handle)
        clf = GiniForestClassifier(seed=args.seed, feature_names=list(ATTRIBUTE_NAMES))
        clf.fit(X, y)
        clf.save(Path(args.out))
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    write_importances_csv(sys.stdout, clf.feature_importances_)
    return EXIT_OK


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        return _fail(f"not a directory: {run_dir}", EXIT_INPUT)
    reports = collect_run_reports(run_dir)
    if not reports:
        return _fail(f"no metrics found under {run_dir}", EXIT_EMPTY)
    print(format_report_table(reports))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsentry",
        description="Detect and recognize structural adversarial attacks on "
                    "node classifiers via topological attributes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a full configured experiment")
    p_run.add_argument("--config", required=True, help="YAML run configuration")
    p_run.add_argument("--out", help="override the configured output directory")
    p_run.add_argument("--seed", type=int, help="override the target-sampling seed")
    p_run.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p_run.set_defaults(func=_cmd_run)

    p_attr = sub.add_parser("attributes",
                            help="print the 17 attribute columns as CSV")
    p_attr.add_argument("edges", help="edge-list file (one 'u v' pair per line)")
    p_attr.add_argument("labels", help="label file (one 'node label' pair per line)")
    p_attr.add_argument("--nodes", type=int, nargs="+",
                        help="node ids to report (default: all nodes)")
    p_attr.set_defaults(func=_cmd_attributes)

    p_attack = sub.add_parser("attack", help="attack one target node")
    p_attack.add_argument("edges")
    p_attack.add_argument("labels")
    p_attack.add_argument("--attack", required=True, choices=sorted(ATTACKS))
    p_attack.add_argument("--target", required=True, type=int)
    p_attack.add_argument("--budget", type=int,
                          help="maximum edge flips (default: attack-specific)")
    p_attack.add_argument("--quiet", action="store_true",
                          help="print only the JSON summary")
    p_attack.set_defaults(func=_cmd_attack)

    p_train = sub.add_parser("train", help="train a detector forest on a samples CSV")
    p_train.add_argument("features", help="samples CSV produced by run")
    p_train.add_argument("--out", default="forest.json",
                         help="where to write the trained forest")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=_cmd_train)

    p_report = sub.add_parser("report", help="summarize metrics under a run directory")
    p_report.add_argument("run_dir")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
