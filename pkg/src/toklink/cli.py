"""Command-line front end for the token transmission pipeline.

Subcommands compose the library stages: mask pooling, encode/decode,
link adaptation, channel simulation, SNR/bandwidth sweeps, and seeded
fixture generation. All outputs are deterministic given (inputs, flags,
seed); reports are JSON with sorted keys so re-runs are byte-identical.

Exit codes: 0 ok, 2 input/format error, 3 integrity error, 4 infeasible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import channel as ch
from . import codec, fileio, linkadapt, tokens
from .rng import SplitMix64

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTEGRITY = 3
EXIT_INFEASIBLE = 4


def _emit(payload: dict):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def _build_profile(args, snr_db=None, bandwidth_hz=None) -> linkadapt.LinkProfile:
    """Profile file (if given) overlaid with any explicit flags."""
    overrides = {}
    if snr_db is not None:
        overrides["snr_db"] = snr_db
    if bandwidth_hz is not None:
        overrides["bandwidth_hz"] = bandwidth_hz
    for flag, field in (
        ("eta", "resource_fraction"),
        ("wd", "weight_distortion"),
        ("wt", "weight_delay"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if getattr(args, "bler_table", None):
        overrides["bler_table"] = linkadapt.load_bler_table(args.bler_table)
    if getattr(args, "profile", None):
        base = linkadapt.load_profile(args.profile)
        return linkadapt.with_overrides(base, **overrides)
    if "snr_db" not in overrides or "bandwidth_hz" not in overrides:
        raise linkadapt.LinkAdaptError(
            "--snr and --bw are required unless a profile file supplies them"
        )
    return linkadapt.LinkProfile(**overrides)


def cmd_pool_mask(args) -> int:
    pixel = fileio.load_pixel_masks(args.pixel_masks)
    geometry = tokens.Geometry(
        frames=pixel.frames,
        height=pixel.height,
        width=pixel.width,
        d_t=args.dt,
        d_s=args.ds,
    )
    mask = tokens.pool_pixel_masks(pixel, geometry, args.theta)
    fileio.save_token_mask(args.out, mask)
    _emit(
        {
            "out": str(args.out),
            "t": mask.t,
            "h": mask.h,
            "w": mask.w,
            "theta": args.theta,
            "intended_ratio": tokens.intended_ratio(mask),
            "intended_count": mask.intended_count,
        }
    )
    return EXIT_OK


def _codec_report(grid, mask, cfg, args) -> dict:
    rho = tokens.intended_ratio(mask)
    return {
        "codebook_size": cfg.codebook_size,
        "b_full": cfg.b_full,
        "b_delta": cfg.b_delta,
        "rho_s": rho,
        "payload_bits": codec.payload_bits(mask, cfg),
        "bpp": round(codec.bpp(mask, cfg, grid.geometry), 6),
        "side_info_overhead": codec.side_info_overhead(
            grid.geometry.t, args.mv_block, args.mv_bits, rho, cfg
        ),
    }


def cmd_encode(args) -> int:
    grid = fileio.load_token_grid(args.grid)
    mask = fileio.load_token_mask(args.mask)
    b_full = math.ceil(math.log2(grid.codebook_size))
    if args.bfull is not None and args.bfull != b_full:
        raise codec.CodecError(
            f"--bfull {args.bfull} does not match the grid codebook "
            f"(needs {b_full})"
        )
    cfg = codec.CodecConfig.for_codebook(grid.codebook_size, args.bdelta)
    stream = codec.encode(grid, mask, cfg)
    codec.save_bitstream(args.out, stream)
    report = _codec_report(grid, mask, cfg, args)
    report["out"] = str(args.out)
    report["token_bits_serialized"] = stream.token_bit_length
    _emit(report)
    return EXIT_OK


def cmd_decode(args) -> int:
    mask = fileio.load_token_mask(args.mask)
    stream = codec.load_bitstream(args.bitstream, mask)
    grid = codec.decode(stream, mask, strict=not args.lenient)
    fileio.save_token_grid(args.out, grid)
    _emit(
        {
            "out": str(args.out),
            "codebook_size": grid.codebook_size,
            "t": grid.geometry.t,
            "h": grid.geometry.h,
            "w": grid.geometry.w,
        }
    )
    return EXIT_OK


def _counts_from_args(args) -> tuple[int, int]:
    if args.counts is not None:
        return args.counts[0], args.counts[1]
    mask = fileio.load_token_mask(args.mask)
    return codec.transmitted_counts(mask)


def cmd_optimize(args) -> int:
    profile = _build_profile(args, args.snr, args.bw)
    count_s, count_n = _counts_from_args(args)
    plan = linkadapt.optimize(profile, count_s, count_n)
    payload = {
        "plan": linkadapt.plan_to_dict(plan),
        "profile": profile.to_dict(),
        "caps": {
            "p_max_s": profile.p_max_s,
            "p_max_n": profile.p_max_n_at(profile.snr_db),
        },
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(payload)
    return EXIT_OK


def _sweep_point(profile, grid, mask, trials, point_seed, mv_block, mv_bits):
    count_s, count_n = codec.transmitted_counts(mask)
    try:
        plan = linkadapt.optimize(profile, count_s, count_n)
    except linkadapt.InfeasibleError as exc:
        return {
            "snr_db": profile.snr_db,
            "bandwidth_hz": profile.bandwidth_hz,
            "feasible": False,
            "infeasible_constraints": list(exc.binding_constraints),
            "rejected_pair_counts": exc.pair_counts,
        }
    cfg = codec.CodecConfig(
        codebook_size=grid.codebook_size,
        b_full=profile.full_precision_bits,
        b_delta=plan.candidate_n.bit_precision,
    )
    stream = codec.encode(grid, mask, cfg)
    plans = ch.pack_pdus(stream, mask, profile)
    candidates = (plan.candidate_s, plan.candidate_n)
    loss_probs = (plan.candidate_s.bler, plan.candidate_n.bler)
    summary = ch.monte_carlo(
        stream, mask, plans, candidates, loss_probs, trials, point_seed
    )
    rho = tokens.intended_ratio(mask)
    bits = codec.payload_bits(mask, cfg)
    return {
        "snr_db": profile.snr_db,
        "bandwidth_hz": profile.bandwidth_hz,
        "feasible": True,
        "seed": point_seed,
        "plan": linkadapt.plan_to_dict(plan),
        "codec": {
            "b_full": cfg.b_full,
            "b_delta": cfg.b_delta,
            "rho_s": rho,
            "payload_bits": bits,
            "bpp": round(codec.bpp(mask, cfg, grid.geometry), 6),
            "side_info_overhead": codec.side_info_overhead(
                grid.geometry.t, mv_block, mv_bits, rho, cfg
            ),
            "source_rate_kbps": bits / profile.block_duration_s / 1000.0,
        },
        "channel": summary.to_dict(),
        "utilization": plan.utilization,
    }


def cmd_sweep(args) -> int:
    grid = fileio.load_token_grid(args.grid)
    mask = fileio.load_token_mask(args.mask)
    if mask.mask.shape != (grid.geometry.t, grid.geometry.h, grid.geometry.w):
        raise tokens.TokenModelError(
            "dimension mismatch: mask does not fit the grid"
        )
    b_full = math.ceil(math.log2(grid.codebook_size))

    points = sorted((s, b) for s in args.snr for b in args.bw)
    entries = []
    for index, (snr_db, bandwidth_hz) in enumerate(points):
        profile = _build_profile(args, snr_db, bandwidth_hz)
        profile = linkadapt.with_overrides(profile, full_precision_bits=b_full)
        point_seed = args.seed + index * args.trials
        entries.append(
            _sweep_point(
                profile, grid, mask, args.trials, point_seed,
                args.mv_block, args.mv_bits,
            )
        )

    base_profile = _build_profile(args, points[0][0], points[0][1])
    report = {
        "inputs": {
            "grid": str(args.grid),
            "grid_sha256": _sha256_file(args.grid),
            "mask": str(args.mask),
            "mask_sha256": _sha256_file(args.mask),
        },
        "sweep": {
            "snr_db": [s for s, _ in points],
            "bandwidth_hz": [b for _, b in points],
            "trials": args.trials,
            "base_seed": args.seed,
        },
        "profile_base": base_profile.to_dict(),
        "points": entries,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    feasible = sum(1 for e in entries if e["feasible"])
    _emit(
        {
            "out": str(args.out),
            "points": len(entries),
            "feasible_points": feasible,
        }
    )
    return EXIT_OK


def _random_grid(rng: SplitMix64, geometry, codebook_size, jitter):
    """Reference slice uniform; later slices jitter around it so diffs stay
    within +/-jitter before clipping."""
    t, h, w = geometry.t, geometry.h, geometry.w
    base = np.empty((h, w), dtype=np.int64)
    for i in range(h):
        for j in range(w):
            base[i, j] = rng.randrange(codebook_size)
    slices = [base]
    for _ in range(t - 1):
        offs = np.empty((h, w), dtype=np.int64)
        for i in range(h):
            for j in range(w):
                offs[i, j] = rng.randrange(2 * jitter + 1) - jitter
        slices.append(np.clip(base + offs, 0, codebook_size - 1))
    return tokens.TokenGrid(
        codebook_size=codebook_size,
        geometry=geometry,
        indices=np.stack(slices),
    )


def _block_pixel_masks(rng: SplitMix64, frames, height, width):
    """A seeded rectangle drifting one pixel per frame, clipped at borders."""
    bh = max(1, height // 3)
    bw = max(1, width // 3)
    r0 = rng.randrange(max(1, height - bh))
    c0 = rng.randrange(max(1, width - bw))
    dr = rng.randrange(3) - 1
    dc = rng.randrange(3) - 1
    out = np.zeros((frames, height, width), dtype=np.uint8)
    for k in range(frames):
        r = min(max(r0 + dr * k, 0), height - bh)
        c = min(max(c0 + dc * k, 0), width - bw)
        out[k, r : r + bh, c : c + bw] = 1
    return tokens.PixelMaskSequence(masks=out)


def cmd_gen_fixtures(args) -> int:
    import pathlib

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    geometry = tokens.Geometry(
        frames=args.frames,
        height=args.height,
        width=args.width,
        d_t=args.dt,
        d_s=args.ds,
    )
    rng = SplitMix64(args.seed)
    grid = _random_grid(rng, geometry, args.codebook, args.jitter)
    pixel = _block_pixel_masks(rng, args.frames, args.height, args.width)
    mask = tokens.pool_pixel_masks(pixel, geometry, args.theta)

    grid_path = out_dir / "fixture.tg"
    pixel_path = out_dir / "fixture.pm"
    mask_path = out_dir / "fixture.tm"
    fileio.save_token_grid(grid_path, grid)
    fileio.save_pixel_masks(pixel_path, pixel)
    fileio.save_token_mask(mask_path, mask)
    _emit(
        {
            "grid": str(grid_path),
            "pixel_masks": str(pixel_path),
            "token_mask": str(mask_path),
            "seed": args.seed,
            "intended_ratio": tokens.intended_ratio(mask),
            "max_abs_diff_vs_reference": int(
                np.abs(
                    grid.indices[1:].astype(np.int64)
                    - grid.indices[0].astype(np.int64)
                ).max()
                if geometry.t > 1
                else 0
            ),
        }
    )
    return EXIT_OK


def _add_profile_flags(sub):
    sub.add_argument("--profile", help="link profile JSON file")
    sub.add_argument("--bler-table", help="BLER table JSON file")
    sub.add_argument("--eta", type=float, help="resource fraction in [0, 1]")
    sub.add_argument("--wd", type=float, help="distortion weight")
    sub.add_argument("--wt", type=float, help="delay weight")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toklink",
        description="token grid coding, link adaptation, and channel simulation",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool-mask", help="pool pixel masks onto the token grid")
    p.add_argument("--pixel-masks", required=True)
    p.add_argument("--dt", type=int, required=True)
    p.add_argument("--ds", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pool_mask)

    p = sub.add_parser("encode", help="encode a token grid against a mask")
    p.add_argument("--grid", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--bfull", type=int, default=None)
    p.add_argument("--bdelta", type=int, required=True)
    p.add_argument("--mv-block", type=int, default=4)
    p.add_argument("--mv-bits", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct a token grid")
    p.add_argument("--bitstream", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument(
        "--lenient",
        action="store_true",
        help="clip out-of-range values instead of failing",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("optimize", help="select bit precision and MCS per class")
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--bw", type=float, default=None)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--counts", type=int, nargs=2, metavar=("N_S", "N_N"))
    group.add_argument("--mask")
    p.add_argument("--out")
    _add_profile_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="optimize and simulate over a grid of points")
    p.add_argument("--grid", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--snr", type=float, nargs="+", required=True)
    p.add_argument("--bw", type=float, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--mv-block", type=int, default=4)
    p.add_argument("--mv-bits", type=float, default=4.0)
    p.add_argument("--out", required=True)
    _add_profile_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-fixtures", help="write seeded grid and mask fixtures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--dt", type=int, default=4)
    p.add_argument("--ds", type=int, default=16)
    p.add_argument("--codebook", type=int, default=64000)
    p.add_argument("--jitter", type=int, default=512)
    p.add_argument("--theta", type=float, default=0.3)
    p.set_defaults(func=cmd_gen_fixtures)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except linkadapt.InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except codec.IntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (
        fileio.FileFormatError,
        tokens.TokenModelError,
        codec.CodecError,
        linkadapt.LinkAdaptError,
        ch.ChannelError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
