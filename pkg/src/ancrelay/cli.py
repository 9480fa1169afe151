"""Command-line front end for the relay simulation experiments."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import (ALL_SCHEMES, PRESETS, ChannelSpec, ExperimentConfig,
                      emit_csv, run_experiment)


def _parse_codes(values):
    codes = []
    for v in values:
        parts = v.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"--code expects J,K, got {v!r}")
        codes.append((int(parts[0]), int(parts[1])))
    return tuple(codes)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ancrelay",
        description="Monte Carlo simulation of packet-level relay estimation "
                    "in a two-way relay channel with superimposed LDPC-coded "
                    "BPSK uplinks.")
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="start from a canned experiment; explicit flags override it")
    p.add_argument("--code", action="append", metavar="J,K",
                   help="column,row weight of a regular code (repeatable)")
    p.add_argument("--n", type=int, help="coded packet length (default 1800)")
    p.add_argument("--snr-db", metavar="LIST",
                   help="comma-separated SNR points in dB")
    p.add_argument("--packets", type=int, help="packets per SNR point")
    p.add_argument("--max-iters", type=int, help="decoder iteration cap (default 20)")
    p.add_argument("--channel", metavar="SPEC",
                   help="fixed:H13,H23 or rayleigh:VARIANCE")
    p.add_argument("--scheme", metavar="LIST",
                   help=f"comma-separated subset of {','.join(ALL_SCHEMES)}")
    p.add_argument("--seed", type=int, help="master seed (default 1)")
    p.add_argument("--out", default="results.csv", help="output CSV path")
    p.add_argument("--f1-samples", type=int,
                   help="Monte Carlo samples per reference-curve point; "
                        "0 disables the SNR-improvement summaries")
    p.add_argument("--fix-h", action="store_true",
                   help="build one parity-check matrix per code instead of "
                        "regenerating it for every packet")
    p.add_argument("--workers", type=int, help="parallel trial workers (default 1)")
    return p


def config_from_args(args) -> ExperimentConfig:
    if args.preset:
        cfg = PRESETS[args.preset](seed=args.seed if args.seed is not None else 1)
    else:
        cfg = ExperimentConfig(
            codes=((3, 6),),
            snr_db=tuple(float(s) for s in range(-4, 9)),
            packets=100,
            channel=ChannelSpec.fixed(1, 1),
            seed=1)
    overrides = {}
    if args.code:
        overrides["codes"] = _parse_codes(args.code)
    if args.n is not None:
        overrides["n"] = args.n
    if args.snr_db is not None:
        overrides["snr_db"] = tuple(float(s) for s in args.snr_db.split(","))
    if args.packets is not None:
        overrides["packets"] = args.packets
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if args.channel is not None:
        overrides["channel"] = ChannelSpec.parse(args.channel)
    if args.scheme is not None:
        overrides["schemes"] = tuple(args.scheme.split(","))
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.f1_samples is not None:
        overrides["f1_samples"] = args.f1_samples
    if args.fix_h:
        overrides["regenerate_h"] = False
    if args.workers is not None:
        overrides["workers"] = args.workers
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records, summaries = run_experiment(cfg)
    emit_csv(records, summaries, args.out)
    print(f"wrote {len(records)} detail rows and {len(summaries)} summaries "
          f"to {args.out}")
    print(f"{'scheme':<18}{'code':<8}{'snr_db':>8}{'mean_mse':>14}"
          f"{'mean_ber':>10}{'dsnr_db':>9}")
    for s in summaries:
        delta = f"{s.delta_snr_db:8.2f}" if s.delta_snr_db is not None else "       -"
        flag = "*" if s.extrapolation_flag else ""
        print(f"{s.scheme:<18}{s.code:<8}{s.snr_db:8.2f}{s.mean_mse:14.6g}"
              f"{s.mean_ber:10.4f}{delta}{flag}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
