"""Command-line entry point: ``newsflow <subcommand> [options]``.

Exit status is 0 on success, 2 on invalid configuration or input paths and
3 when a pipeline stage fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
import typing
from pathlib import Path

from . import __version__
from .fixture import FixtureSpec, generate
from .pipeline import (
    PipelineConfig,
    StageError,
    ValidationError,
    read_config_file,
    retweet_delay_stats,
    run_pipeline,
    run_stages,
)

__all__ = ["main", "retweet_delay_stats"]

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 2, 3

SUBCOMMANDS = {
    "classify": ("resolve URLs and attach hostnames", ("classify",)),
    "tally": ("per-category tweet and user volumes", ("tally",)),
    "graph": ("retweet networks and their statistics", ("graph",)),
    "rank": ("Collective Influence rankings", ("rank",)),
    "series": ("activity series, STL remainders and ADF tests", ("series",)),
    "correlate": ("correlation matrix and threshold graph", ("correlate",)),
    "granger": ("Granger-causality tests and graph", ("granger",)),
    "report": ("every stage, fresh, plus retweet delays", None),
}
_NEEDS = {
    "series": ("records", "catalog", "supporters"),
    "correlate": ("records", "catalog", "supporters"),
    "granger": ("records", "catalog", "supporters"),
}

_HELP = {
    "records": "JSON-Lines tweet records",
    "catalog": "CSV hostname,category,provenance",
    "clients": "official client names, one per line (default: bundled list)",
    "redirects": "CSV from_url,to_url",
    "outages": "CSV start_utc,end_utc of collection outages",
    "supporters": "CSV user_id,label",
    "output_dir": "directory for all outputs",
    "granger_criterion": "AIC, BIC or HQC; overrides --granger-lag per pair",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value file; flags override it")
    p.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    hints = typing.get_type_hints(PipelineConfig)
    for key in PipelineConfig.keys():
        default = getattr(PipelineConfig, key)
        hint = hints[key]
        typ = str
        if hint in (int, float):
            typ = hint
        p.add_argument(
            "--" + key.replace("_", "-"), dest=key, type=typ, default=None,
            metavar=key.split("_")[-1].upper(), help=f"{_HELP.get(key, key.replace('_', ' '))} (default: {default})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newsflow", description="News diffusion networks and activity dynamics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (helptext, _) in SUBCOMMANDS.items():
        _add_config_flags(sub.add_parser(name, help=helptext, description=helptext))
    fx = sub.add_parser("gen-fixture", help="write a synthetic corpus with planted structure")
    fx.add_argument("out", help="output directory")
    fx.add_argument("--n-records", type=int, default=FixtureSpec.n_records)
    fx.add_argument("--days", type=int, default=FixtureSpec.n_days)
    fx.add_argument("--seed", type=int, default=FixtureSpec.seed)
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in PipelineConfig.keys():
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return PipelineConfig.from_mapping(values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "gen-fixture":
        if args.n_records < 3 or args.days < 1:
            print("error: need at least 3 records and 1 day", file=sys.stderr)
            return EXIT_VALIDATION
        truth = generate(args.out, FixtureSpec(n_records=args.n_records, n_days=args.days, seed=args.seed))
        print(f"wrote {truth['n_records']} records to {Path(args.out) / 'records.jsonl'}")
        return EXIT_OK
    try:
        config = resolve_config(args)
        if args.print_config:
            print("\n".join(config.to_lines()))
            return EXIT_OK
        if args.command == "report":
            pipe = run_pipeline(config)
        else:
            stages = SUBCOMMANDS[args.command][1]
            pipe = run_stages(config, stages, _NEEDS.get(args.command, ("records", "catalog")))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    print(f"{args.command}: outputs in {pipe.out} (stages: {', '.join(pipe.completed)})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
