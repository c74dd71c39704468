"""Command-line entry point: ``robust-l0 {sample,bench,f0,gen}``."""

from __future__ import annotations

import argparse
import json
import sys

from robust_l0.datagen import LabeledStream, noisy_dataset
from robust_l0.errors import RobustL0Error
from robust_l0.f0 import F0IwEstimator, F0SwEstimator
from robust_l0.harness import ExperimentConfig, report_dict, run_experiment, sig6
from robust_l0.io import read_stream, with_index_timestamps, write_stream

GEN_MODES = {"rand": "uniform", "powerlaw": "powerlaw"}
WMODES = {"seq": "sequence", "time": "time"}


def _add_stream_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="FILE", help="CSV stream, one point per line")
    src.add_argument("--gen", choices=sorted(GEN_MODES), help="generate a noisy stream instead")
    p.add_argument("--dim", type=int, help="point dimension (required with --input)")
    p.add_argument("--alpha", type=float, help="group diameter threshold (default for --gen: 1/d^1.5)")
    p.add_argument("--header", action="store_true", help="the CSV input has a header line")
    p.add_argument("--with-groups", action="store_true", help="the CSV input has a group_id column")
    p.add_argument("--with-timestamps", action="store_true", help="the CSV input has a timestamp column")
    p.add_argument("--gen-n", type=int, default=100, help="number of base points to generate")
    p.add_argument("--gen-dim", type=int, default=5, help="dimension of generated points")
    p.add_argument("--gen-max-dups", type=int, default=100, help="uniform mode: at most this many duplicates")
    p.add_argument("--data-seed", type=int, default=0, help="seed of the generated stream")


def _add_sampler_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("iw", "sw"), default="iw", help="infinite or sliding window")
    p.add_argument("--window", type=int, default=1000, help="window width (sw)")
    p.add_argument("--wmode", choices=sorted(WMODES), default="seq", help="window in items or time units")
    p.add_argument("--m-bound", type=int, help="stream length bound (default: stream length)")
    p.add_argument("--kappa0", type=float, default=3.2)
    p.add_argument("--grid-mode", choices=("planar", "highdim"))
    p.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed + i")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-l0", description="Robust distinct sampling on noisy streams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample groups from a stream and report the hit counts")
    _add_stream_args(p)
    _add_sampler_args(p)
    p.add_argument("--k", type=int, default=1, help="groups per query (iw)")
    p.add_argument("--runs", type=int, default=1, help="independent replays")

    p = sub.add_parser("bench", help="repeat full scans and report time, space and uniformity")
    _add_stream_args(p)
    _add_sampler_args(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--runs", type=int, default=100, help="number of full-stream scans")

    p = sub.add_parser("f0", help="estimate the number of groups")
    _add_stream_args(p)
    _add_sampler_args(p)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--copies", type=int, default=9, help="iw: copies; sw: groups of copies")

    p = sub.add_parser("gen", help="write a generated noisy stream as CSV")
    p.add_argument("--gen", choices=sorted(GEN_MODES), default="rand")
    p.add_argument("--gen-n", type=int, default=100)
    p.add_argument("--gen-dim", type=int, default=5)
    p.add_argument("--gen-max-dups", type=int, default=100)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--header", action="store_true")
    p.add_argument("--no-groups", action="store_true", help="omit the group_id column")
    p.add_argument("--with-timestamps", action="store_true", help="append the arrival index as timestamp")
    p.add_argument("--output", metavar="FILE", help="default: standard output")
    return parser


def _load(args) -> LabeledStream:
    if args.gen:
        return noisy_dataset(args.gen_n, args.gen_dim, args.data_seed, GEN_MODES[args.gen], args.gen_max_dups)
    if args.dim is None or args.alpha is None:
        raise SystemExit("--dim and --alpha are required with --input")
    return read_stream(args.input, args.dim, groups=args.with_groups, timestamps=args.with_timestamps,
                       header=args.header, alpha=args.alpha)


def _config(args, stream) -> ExperimentConfig:
    wmode = WMODES[args.wmode]
    if wmode == "time":
        stream = with_index_timestamps(stream)
    return ExperimentConfig(stream, mode=args.mode, alpha=args.alpha, m_bound=args.m_bound, window=args.window,
                            window_mode=wmode, kappa0=args.kappa0, k=getattr(args, "k", 1),
                            runs=getattr(args, "runs", 1), seed=args.seed, grid_mode=args.grid_mode)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_run(args) -> None:
    cfg = _config(args, _load(args))
    report, dist = run_experiment(cfg)
    _emit(report_dict(report, dist))


def cmd_f0(args) -> None:
    cfg = _config(args, _load(args))
    st = cfg.stream
    if cfg.mode == "iw":
        est = F0IwEstimator(cfg.alpha, st.dim, cfg.m_bound, eps=args.eps, copies=args.copies, seed=args.seed,
                            grid_mode=cfg.grid_mode)
        truth = len(set(st.labels))
    else:
        est = F0SwEstimator(cfg.alpha, st.dim, cfg.window, cfg.m_bound, eps=args.eps, groups=args.copies,
                            kappa0=cfg.kappa0, seed=args.seed, grid_mode=cfg.grid_mode,
                            window_mode=cfg.window_mode)
        truth = len(st.window_groups(cfg.window)) if cfg.window_mode == "sequence" else None
    est.extend(st.points)
    value = est.estimate()
    _emit({"config": {**cfg.echo(), "eps": args.eps, "copies": args.copies},
           "estimate": None if value is None else sig6(value), "groups": truth})


def cmd_gen(args) -> None:
    stream = noisy_dataset(args.gen_n, args.gen_dim, args.data_seed, GEN_MODES[args.gen], args.gen_max_dups)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_stream(fh, stream, groups=not args.no_groups, timestamps=args.with_timestamps, header=args.header)
    else:
        write_stream(sys.stdout, stream, groups=not args.no_groups, timestamps=args.with_timestamps,
                     header=args.header)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"sample": cmd_run, "bench": cmd_run, "f0": cmd_f0, "gen": cmd_gen}[args.command]
    try:
        handler(args)
    except RobustL0Error as exc:
        print(f"robust-l0: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
