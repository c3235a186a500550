"""Command line entry point: ``constellation-access {access,network,conjunction}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .report import (
    ConfigError,
    load_run_config,
    run_access_analysis,
    run_conjunction_screen,
    run_network_analysis,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="constellation-access", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "access": "per-station access table (accessible ratio, T_a, gamma)",
        "network": "per-satellite access ratio of a station network",
        "conjunction": "pairwise closest-approach screening",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path, help="run config JSON")
        p.add_argument("--duration-s", type=float, help="override mission duration")
        p.add_argument("--step-s", type=float, help="override sampling step")
        p.add_argument("--min-elev-deg", type=float, help="override every station's elevation mask")
        p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory (default: .)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_run_config(args.config, args.duration_s, args.step_s, args.min_elev_deg)
        if args.command == "access":
            rows = run_access_analysis(config, args.out_dir)
            print(f"wrote {len(rows)} rows to {args.out_dir / 'access_table.csv'}")
        elif args.command == "network":
            results = run_network_analysis(config, args.out_dir)
            print(f"wrote {len(results)} rows to {args.out_dir / 'network_ratio.csv'}")
        else:
            events, summary = run_conjunction_screen(config, args.out_dir)
            for line in summary:
                print(line)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # single-line diagnostic, details only with -v
        logging.getLogger(__name__).info("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
