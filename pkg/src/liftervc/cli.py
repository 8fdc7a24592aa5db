"""Command-line entry points.

Subcommands cover the full workflow: `prep` aligns WAV pairs into frame
datasets, `pretrain` fits the acoustic model conventionally, `train-lifter`
fine-tunes model and lifter through the truncation chain, `convert` runs
voice conversion on a WAV file, `eval` reports cepstral RMSE, `cumpow` emits
the cumulative-power diagnostic, and `bench` times the filtering stage.

Every command exits 0 on success and 1 with a one-line stderr diagnostic on
failure, writing only under its declared output paths.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from .cepstral import minimum_phase_lifter
from .config import AnalysisConfig, RunConfig
from .dataset import TrainingSet, build_dataset
from .filters import SubbandGate
from .model import AcousticModel, load_model, save_model
from .runtime import (bench_filtering, bench_to_csv, convert, cumulative_power,
                      eval_rmse, power_threshold_tap)
from .training import pretrain_conventional, train_lifter
from .wavio import wav_read, wav_write


def _dataset_paths(run: RunConfig) -> dict:
    out = Path(run.output_dir)
    return {split: out / f"{split}.npz" for split in ("train", "val", "test")}


def _load_split(run: RunConfig, split: str) -> TrainingSet:
    path = _dataset_paths(run)[split]
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `liftervc prep` first")
    data, _ = TrainingSet.load(path, run.analysis)
    return data


def _gate_from_args(args) -> SubbandGate | None:
    if not getattr(args, "subband", False):
        return None
    return SubbandGate(crossover_hz=args.crossover_hz,
                       steepness_hz=args.steepness_hz)


def _read_pairs_csv(path) -> list:
    pairs = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: expected `source,target` rows")
            pairs.append((row[0].strip(), row[1].strip()))
    if not pairs:
        raise ValueError(f"{path}: no pairs listed")
    return pairs


def _load_eval_data(path, model: AcousticModel) -> TrainingSet:
    """Evaluation material: either a prepared .npz dataset or a CSV of
    source,target WAV paths (aligned on the fly, no silence trimming)."""
    path = Path(path)
    if path.suffix == ".npz":
        data, _ = TrainingSet.load(path, model.cfg)
        return data
    pairs = [(wav_read(s), wav_read(t)) for s, t in _read_pairs_csv(path)]
    return build_dataset(pairs, model.cfg, trim_db=None)


def cmd_prep(args) -> int:
    run = RunConfig.from_json(args.config)
    out = Path(run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = _dataset_paths(run)
    for split, pairs, trim in (("train", run.train_pairs, run.silence_threshold_db),
                               ("val", run.val_pairs, run.silence_threshold_db),
                               ("test", run.test_pairs, None)):
        if not pairs:
            continue
        waves = [(wav_read(s), wav_read(t)) for s, t in pairs]
        data = build_dataset(waves, run.analysis, trim_db=trim)
        data.save(paths[split], run.analysis)
        print(f"{split}: {data.n_utterances} utterances, {len(data)} frames "
              f"-> {paths[split]}")
    return 0


def cmd_pretrain(args) -> int:
    run = RunConfig.from_json(args.config, check_paths=False)
    train_data = _load_split(run, "train")
    val_data = _load_split(run, "val") if _dataset_paths(run)["val"].exists() else None
    model = AcousticModel(run.analysis, seed=run.train.seed)
    log = pretrain_conventional(model, train_data, run.train, val_data)
    save_model(model, run.model_file)
    log_path = Path(run.output_dir) / "pretrain_log.csv"
    log.to_csv(log_path)
    last = log.rows[-1]
    print(f"pretrained {run.train.epochs} epochs: train loss {last.train_loss:.6f}, "
          f"val loss {last.val_loss:.6f} -> {run.model_file} (log: {log_path})")
    return 0


def cmd_train_lifter(args) -> int:
    run = RunConfig.from_json(args.config, check_paths=False)
    taps = args.taps if args.taps is not None else run.train.taps
    if not 0 < taps <= run.analysis.fft_len:
        raise ValueError(f"taps must be in 1..{run.analysis.fft_len}")
    train_cfg = dataclasses.replace(run.train, taps=taps)
    model = load_model(run.model_file, run.analysis)
    train_data = _load_split(run, "train")
    val_data = _load_split(run, "val") if _dataset_paths(run)["val"].exists() else None
    gate = None
    if run.subband_enabled and run.train.gate_in_training:
        gate = SubbandGate(run.subband_crossover_hz, run.subband_steepness_hz)
    log = train_lifter(model, train_data, train_cfg, val_data, gate=gate)

    out = Path(run.output_dir)
    model_path = Path(run.model_file).with_suffix(f".l{taps}.lvc")
    save_model(model, model_path)
    log_path = out / f"train_lifter_log_l{taps}.csv"
    log.to_csv(log_path)
    lifter_path = out / f"lifter_l{taps}.csv"
    reference = minimum_phase_lifter(run.analysis.fft_len)[:run.analysis.cep_dim]
    with open(lifter_path, "w", newline="") as fh:
        fh.write("quefrency,trained,minimum_phase\n")
        for q, (u, m) in enumerate(zip(model.lifter.coeffs, reference)):
            fh.write(f"{q},{float(u)!r},{float(m)!r}\n")
    last = log.rows[-1]
    print(f"fine-tuned at {taps} taps: val rmse {last.rmse:.6f} -> {model_path} "
          f"(log: {log_path}, lifter: {lifter_path})")
    return 0


def cmd_convert(args) -> int:
    model = load_model(args.model)
    wave = wav_read(args.infile)
    out = convert(wave, model, taps=args.taps, gate=_gate_from_args(args),
                  mode=args.mode)
    wav_write(args.outfile, out)
    taps = args.taps if args.taps is not None else model.cfg.fft_len
    print(f"converted {args.infile} -> {args.outfile} "
          f"({taps} taps, {out.duration:.2f} s)")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    data = _load_eval_data(args.pairs, model)
    taps = args.taps if args.taps is not None else model.cfg.fft_len
    report = eval_rmse(model, data, taps, gate=_gate_from_args(args))
    if args.out:
        report.to_csv(args.out)
    print(f"rmse {report.rmse!r} over {report.n_frames} frames "
          f"({len(report.per_utterance)} utterances, {taps} taps)")
    return 0


def cmd_cumpow(args) -> int:
    model = load_model(args.model)
    data = _load_eval_data(args.pairs, model)
    curve = cumulative_power(model, data)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("tap,cumulative_power\n")
            for tap, value in enumerate(curve):
                fh.write(f"{tap},{float(value)!r}\n")
    tap95 = power_threshold_tap(curve, 0.95)
    print(f"cumulative power reaches 0.95 at tap {tap95} "
          f"(0.99 at tap {power_threshold_tap(curve, 0.99)})"
          + (f"; curve -> {args.out}" if args.out else ""))
    return 0


def cmd_bench(args) -> int:
    taps_list = [int(v) for v in args.taps.split(",") if v]
    cfg = AnalysisConfig.for_rate(args.rate)
    rows = bench_filtering(taps_list, duration_s=args.duration, cfg=cfg,
                           mode=args.mode, repeats=args.repeats)
    for r in rows:
        print(f"taps {r.taps:5d}: {r.median_s * 1e3:9.2f} ms "
              f"({r.ns_per_sample:8.1f} ns/sample, speedup {r.speedup:5.2f}x)")
    if args.out:
        bench_to_csv(rows, args.out)
        print(f"csv -> {args.out}")
    return 0


def _add_gate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subband", action="store_true",
                   help="pass frequencies above the crossover through unchanged")
    p.add_argument("--crossover-hz", type=float, default=8000.0)
    p.add_argument("--steepness-hz", type=float, default=200.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftervc",
        description="Voice conversion by differential filtering with a "
                    "truncation-aware trainable lifter.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="align WAV pairs into frame datasets")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("pretrain", help="train the acoustic model conventionally")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train-lifter",
                       help="fine-tune model and lifter through the truncation chain")
    p.add_argument("--config", required=True)
    p.add_argument("--taps", type=int, default=None,
                   help="truncation length (default: config value)")
    p.set_defaults(func=cmd_train_lifter)

    p = sub.add_parser("convert", help="convert a WAV file")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--taps", type=int, default=None)
    p.add_argument("--mode", choices=("auto", "direct", "fft"), default="auto")
    _add_gate_flags(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval", help="cepstral RMSE over an evaluation set")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True,
                   help=".npz dataset from prep, or CSV of source,target WAVs")
    p.add_argument("--taps", type=int, default=None)
    p.add_argument("--out", default=None, help="per-utterance CSV")
    _add_gate_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cumpow", help="cumulative power of designed filters")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", default=None, help="curve CSV")
    p.set_defaults(func=cmd_cumpow)

    p = sub.add_parser("bench", help="time the filtering stage per tap count")
    p.add_argument("--taps", default="32,64,128,256,512",
                   help="comma-separated tap counts")
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--rate", type=int, default=16000)
    p.add_argument("--mode", choices=("auto", "direct", "fft"), default="direct")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
