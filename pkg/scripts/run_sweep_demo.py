#!/usr/bin/env python3
"""End-to-end demo: fixture generation, link adaptation, channel replay.

Generates a seeded token grid plus mask, sweeps SNR at a fixed bandwidth,
and prints one row per operating point: the selected precision/MCS pair,
objective value, payload rate, and Monte Carlo erasure statistics. The
full machine-readable report lands in --out.
"""

import argparse
import json
import pathlib
import sys
import tempfile

from toklink.cli import main as toklink_main


def run(argv) -> int:
    rc = toklink_main(argv)
    if rc != 0:
        print(f"toklink {' '.join(argv[:1])} exited {rc}", file=sys.stderr)
    return rc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snr", type=float, nargs="+",
                    default=[-2.0, 0.0, 2.0, 4.0, 6.0, 8.0])
    ap.add_argument("--bw", type=float, default=350e3)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("sweep_report.json"))
    ap.add_argument("--keep-fixtures", type=pathlib.Path, default=None,
                    help="directory for the generated fixtures (default: temp)")
    args = ap.parse_args()

    if args.keep_fixtures:
        args.keep_fixtures.mkdir(parents=True, exist_ok=True)
        fixture_dir = args.keep_fixtures
        cleanup = None
    else:
        cleanup = tempfile.TemporaryDirectory(prefix="toklink_demo_")
        fixture_dir = pathlib.Path(cleanup.name)

    try:
        if run(["gen-fixtures", "--out-dir", str(fixture_dir),
                "--seed", str(args.seed)]):
            return 1
        sweep_argv = [
            "sweep",
            "--grid", str(fixture_dir / "fixture.tg"),
            "--mask", str(fixture_dir / "fixture.tm"),
            "--snr", *[str(s) for s in args.snr],
            "--bw", str(args.bw),
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--out", str(args.out),
        ]
        if run(sweep_argv):
            return 1
    finally:
        if cleanup:
            cleanup.cleanup()

    report = json.loads(args.out.read_text())
    header = (
        f"{'snr_db':>7} {'class s':>14} {'class n':>15} {'J':>8} "
        f"{'kbps':>8} {'util':>6} {'lost_n%':>8} {'err_n':>7}"
    )
    print()
    print(header)
    print("-" * len(header))
    for point in report["points"]:
        if not point["feasible"]:
            constraints = ",".join(point["infeasible_constraints"])
            print(f"{point['snr_db']:>7.1f}  infeasible ({constraints})")
            continue
        plan = point["plan"]
        chan = point["channel"]
        print(
            f"{point['snr_db']:>7.1f}"
            f" {plan['class_s']['name']:>14}"
            f" {plan['class_n']['name']:>15}"
            f" {plan['objective']:>8.4f}"
            f" {point['codec']['source_rate_kbps']:>8.2f}"
            f" {point['utilization']:>6.2f}"
            f" {100 * chan['mean_pdu_loss_fraction_n']:>8.2f}"
            f" {chan['mean_value_errors_n']:>7.1f}"
        )
    print(f"\nfull report: {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
