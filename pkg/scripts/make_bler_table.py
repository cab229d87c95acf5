#!/usr/bin/env python3
"""Regenerate the packaged default BLER table.

Each MCS gets a logistic curve 1 / (1 + exp(a * (snr - snr50))) sampled on
a fixed SNR grid. The midpoints are spaced so that, under the default
reliability caps, the selected class-n scheme steps up with SNR instead of
leaving low-SNR points with no feasible candidate.
"""

import argparse
import json
import math
import pathlib

SNR_MIN_DB = -15.0
SNR_MAX_DB = 20.0
SNR_STEP_DB = 0.5
SLOPE_PER_DB = 1.5

MIDPOINTS_DB = {
    "QPSK_1/3": -8.0,
    "QPSK_1/2": -5.0,
    "16QAM_1/2": 3.0,
    "16QAM_3/4": 7.0,
}


def logistic_bler(snr_db: float, snr50_db: float) -> float:
    return 1.0 / (1.0 + math.exp(SLOPE_PER_DB * (snr_db - snr50_db)))


def build_table() -> dict:
    steps = round((SNR_MAX_DB - SNR_MIN_DB) / SNR_STEP_DB)
    grid = [SNR_MIN_DB + i * SNR_STEP_DB for i in range(steps + 1)]
    return {
        name: [[snr, logistic_bler(snr, mid)] for snr in grid]
        for name, mid in MIDPOINTS_DB.items()
    }


def main():
    default_out = (
        pathlib.Path(__file__).resolve().parent.parent
        / "src" / "toklink" / "data" / "default_bler.json"
    )
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path, default=default_out)
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(build_table(), fh, indent=1)
        fh.write("\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
