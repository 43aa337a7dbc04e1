"""Command line: fuzz, replay, compare-strategies, report.

Exit status: 0 when the run was clean, 2 when findings exist, 1 on error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import List, Optional

from ..harness.metrics import Classification, TooFewBackends
from ..lang.parser import ParseError
from ..mutation.strategy import StrategyChoice
from .config import ConfigError, load_config
from .findings import InvalidFinding, read_index
from .report import load_corpus_report, render_comparison, render_text
from .run import FINDINGS_DIR, NoViableSeeds, StaleFinding, compare_strategies, replay, run_campaign

EXIT_CLEAN, EXIT_ERROR, EXIT_FINDINGS = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="campaign config (JSON); defaults to bundled seeds")
    p.add_argument("--seed", type=int, help="rng seed override")
    p.add_argument("--iterations", type=int, help="iteration budget override")
    p.add_argument("--corpus", help="corpus directory override")
    p.add_argument("--strategy", help="combination strategy override")


def _config(args):
    cfg = load_config(args.config)
    strategy = StrategyChoice.parse(args.strategy) if getattr(args, "strategy", None) else None
    return cfg.with_overrides(seed=args.seed, iterations=args.iterations, corpus=args.corpus, strategy=strategy)


def cmd_fuzz(args) -> int:
    cfg = _config(args)
    report = run_campaign(cfg)
    findings = read_index(os.path.join(cfg.corpus, FINDINGS_DIR))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(render_text(report, findings), end="")
    return EXIT_FINDINGS if report.findings_unique else EXIT_CLEAN


def cmd_replay(args) -> int:
    fresh, stored = replay(args.finding)
    same = fresh.classification.value == stored["classification"]
    print(f"finding   {stored['id']}")
    print(f"stored    {stored['classification']}")
    print(f"replayed  {fresh.classification.value}  aggregate_diff {fresh.aggregate_diff:.4f}  out_vul {fresh.out_vul}")
    print("reproduced" if same else "NOT reproduced")
    if args.json:
        print(json.dumps(fresh.to_dict(), indent=2, sort_keys=True))
    if fresh.classification is Classification.ALL_AGREE:
        return EXIT_CLEAN
    return EXIT_FINDINGS


def cmd_compare(args) -> int:
    cfg = _config(args)
    strategies = [StrategyChoice.parse(s) for s in args.strategies.split(",")]
    cmp = compare_strategies(cfg, strategies, args.trials)
    print(render_comparison(cmp), end="")
    if args.out:
        rows = cmp.table()
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["iteration"] + cmp.strategies)
            w.writeheader()
            w.writerows(rows)
    return EXIT_CLEAN


def cmd_report(args) -> int:
    report, findings = load_corpus_report(args.corpus)
    if args.json:
        print(json.dumps({"report": report.to_dict(), "findings": findings}, indent=2, sort_keys=True))
    else:
        print(render_text(report, findings), end="")
    return EXIT_FINDINGS if findings else EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contractdiff", description="Differential fuzzing of contract VMs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuzz", help="run a campaign")
    _common(p)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("replay", help="re-run a stored finding")
    p.add_argument("finding")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("compare-strategies", help="run several strategies over the same trial seeds")
    _common(p)
    p.add_argument("--strategies", default="AllComb,RandomComb")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", help="write the median series table as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="re-render the report stored in a corpus")
    p.add_argument("--corpus", default="corpus")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, NoViableSeeds, StaleFinding, InvalidFinding, TooFewBackends, ParseError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
