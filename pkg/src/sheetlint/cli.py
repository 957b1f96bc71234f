"""Command-line driver: load workbooks, audit them, render reports."""

from __future__ import annotations

import argparse
import sys

from .config import AuditConfig, ConfigError, Severity, load_config, parse_rule_list
from .loaders import LoadError, load_workbook
from .report import AuditResult, audit_workbook, render_dot, render_json, render_text

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetlint",
        description="Audit spreadsheet readability: flow direction, dangling "
                    "cells, relics, formatting and simplifiable formulas.")
    parser.add_argument("paths", nargs="+", metavar="WORKBOOK",
                        help="workbook files (.xlsx or text fixtures)")
    parser.add_argument("--format", choices=("text", "json", "dot"),
                        default="text", help="report format (default: text)")
    parser.add_argument("--config", metavar="PATH",
                        help="flat key=value configuration file")
    parser.add_argument("--rules", metavar="IDS",
                        help="comma-separated rule ids to run (e.g. R01,R05)")
    parser.add_argument("--severity-threshold", choices=("error", "warning", "info"),
                        default="warning",
                        help="lowest severity that makes the exit code 1 "
                             "(default: warning)")
    parser.add_argument("--bottom-line", metavar="CELLS",
                        help="comma-separated bottom-line cells, e.g. Model!C51")
    parser.add_argument("--output", metavar="PATH",
                        help="write the report here instead of stdout")
    parser.add_argument("--input-format", choices=("auto", "text", "xlsx"),
                        default="auto", help="override input detection by extension")
    return parser


def _assemble_config(args: argparse.Namespace) -> AuditConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = AuditConfig()
    overrides = {}
    if args.rules:
        overrides["enabled_rules"] = parse_rule_list(args.rules)
    if args.bottom_line:
        overrides["bottom_line"] = tuple(
            part.strip() for part in args.bottom_line.split(",") if part.strip())
    if overrides:
        from dataclasses import replace
        config = replace(config, **overrides)
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        config = _assemble_config(args)
    except (ConfigError, OSError) as exc:
        print(f"sheetlint: {exc}", file=sys.stderr)
        return EXIT_USAGE

    threshold = Severity.from_label(args.severity_threshold)
    results: list[AuditResult] = []
    for path in args.paths:
        try:
            workbook = load_workbook(path, args.input_format)
        except LoadError as exc:
            print(f"sheetlint: {exc}", file=sys.stderr)
            return EXIT_USAGE
        results.append(audit_workbook(workbook, config, input_path=str(path)))

    if args.format == "json":
        body = render_json([r.report for r in results])
    elif args.format == "dot":
        body = "".join(render_dot(r) for r in results)
    else:
        chunks = []
        for result in results:
            if len(results) > 1:
                chunks.append(f"== {result.report.input} ==\n")
            chunks.append(render_text(result.report))
        body = "".join(chunks)

    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as handle:
                handle.write(body)
        except OSError as exc:
            print(f"sheetlint: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(body)

    flagged = any(d.severity >= threshold
                  for r in results for d in r.report.diagnostics)
    return EXIT_FINDINGS if flagged else EXIT_CLEAN


if __name__ == "__main__":
    sys.exit(main())
