"""Command-line entry point: ``ccgauge {run,compare,soc-lookup,validate-table}``."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness
from .frontend import AdcModel
from .ocv import DEFAULT_TABLE, OcvOutOfRange, TableError, is_structural, load_table, parse_table, soc_from_ocv, validate_table


def _print_summary(label: str, summary: harness.Summary) -> None:
    print(
        f"{label}: max_abs_err={summary.max_abs_err_pct:.6f} % "
        f"mean_abs_err={summary.mean_abs_err_pct:.6f} % "
        f"final_err={summary.final_err_pct:.6f} %"
    )


def cmd_run(args) -> int:
    scenario = harness.load_scenario(args.scenario)
    report = harness.run_ideal(scenario) if args.ideal else harness.run(scenario, seed=args.seed)
    with open(args.out, "w", newline="") as fh:
        harness.write_run_csv(report, fh)
    print(f"rows={len(report.rows)}")
    _print_summary("soc", report.summary)
    return 0


def cmd_compare(args) -> int:
    scenario = harness.load_scenario(args.scenario)
    adc = scenario.adc_model()
    if args.adc_bits is not None:
        adc = dataclasses.replace(adc, bits=args.adc_bits)
    if args.lsb_mv is not None:
        adc = dataclasses.replace(adc, lsb=args.lsb_mv / 1000.0)
    comparison = harness.compare(scenario, adc, seed=args.seed)
    with open(args.out, "w", newline="") as fh:
        harness.write_compare_csv(comparison, fh)
    print(f"rows={len(comparison.quantized.rows)} adc_bits={adc.bits} lsb_mV={adc.lsb * 1000:g}")
    _print_summary("capacity", comparison.summary)
    _print_summary("soc (quantized run)", comparison.quantized.summary)
    return 0


def cmd_soc_lookup(args) -> int:
    table = load_table(args.table) if args.table else DEFAULT_TABLE
    try:
        soc = soc_from_ocv(args.ocv, args.temp, table)
    except OcvOutOfRange as exc:
        print(f"out of range: {exc}", file=sys.stderr)
        return 1
    print(f"{soc:.2f}")
    return 0


def cmd_validate_table(args) -> int:
    try:
        with open(args.table) as fh:
            text = fh.read()
        table = parse_table(text)
    except TableError as exc:
        print(f"invalid table: {exc}", file=sys.stderr)
        return 1
    for diag in validate_table(table):
        print(diag)
    return 0 if not any(is_structural(d) for d in validate_table(table)) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccgauge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write a CSV trace")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ideal", action="store_true", help="bypass the ADC model")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="exact vs quantized measurement chain")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--adc-bits", type=int)
    p.add_argument("--lsb-mv", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("soc-lookup", help="SOC from a rested OCV")
    p.add_argument("--ocv", type=float, required=True)
    p.add_argument("--temp", type=float, default=25.0)
    p.add_argument("--table")
    p.set_defaults(func=cmd_soc_lookup)

    p = sub.add_parser("validate-table", help="check an OCV table file")
    p.add_argument("--table", required=True)
    p.set_defaults(func=cmd_validate_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.ScenarioInvalid, TableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
