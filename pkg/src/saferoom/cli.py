"""Command-line runner: a thin client over the core package.

Exit codes: 0 completed run (alarmed or not), 2 scenario parse error,
3 config error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import build_config, load_config_file
from .errors import ConfigError, ParseError, StoreError
from .runner import audit_lines, format_report_text, run_scenario, write_audit
from .scenario import parse_scenario

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_IO = 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="saferoom",
        description="Run a room-security scenario and report the audit log.",
    )
    parser.add_argument("--scenario", required=True, help="scenario script path")
    parser.add_argument("--config", help="config file path (defaults apply)")
    parser.add_argument("--audit", help="write the audit log to this path")
    parser.add_argument(
        "--format",
        choices=("text", "lines"),
        default="text",
        help="stdout report style: summary text or raw audit lines",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario_text = fh.read()
    except OSError as exc:
        print(f"saferoom: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        scenario = parse_scenario(scenario_text)
    except ParseError as exc:
        print(f"saferoom: scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        cfg = load_config_file(args.config) if args.config else build_config()
    except ConfigError as exc:
        print(f"saferoom: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"saferoom: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        report = run_scenario(scenario, cfg)
    except StoreError as exc:
        print(f"saferoom: credential store error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.audit:
        try:
            write_audit(report, args.audit)
        except OSError as exc:
            print(f"saferoom: cannot write audit log: {exc}", file=sys.stderr)
            return EXIT_IO

    if args.format == "lines":
        for line in audit_lines(report):
            print(line)
    else:
        print(format_report_text(report), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
