"""Command-line front end: mask generation, completion, evaluation, benchmarks.

Every command echoes a JSON run manifest on stdout so runs are auditable;
human-facing progress goes to stderr. Exit codes: 0 success, 2 configuration
or usage error, 3 solver abort, 4 file I/O or format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import figures
from .dataio import (
    CLOUD_PRESETS,
    FileFormatError,
    NormalizationRecord,
    ObservationMask,
    cloud_mask,
    cloud_preset,
    random_mask,
    read_t3b,
    write_report_csv,
    write_t3b,
)
from .diffops import SmoothWeights
from .metrics import quality_report
from .mtt import MttRank, estimate_ranks
from .solver import SolverAbortError, SolverConfig, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

DEFAULT_ENERGY = 0.99


class CliConfigError(ValueError):
    """Bad flag combination or malformed argument value."""


@dataclass
class RunManifest:
    """Echo of one command's inputs, settings and outputs."""

    command: str
    inputs: list = field(default_factory=list)
    mask_source: dict = field(default_factory=dict)
    config: dict | None = None
    outputs: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    def emit(self):
        print(json.dumps(asdict(self), indent=2, sort_keys=True))


def _parse_dims(text):
    parts = text.lower().split("x")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        dims = ()
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise CliConfigError(f"bad dims {text!r}, expected I1xI2xI3")
    return dims


def _parse_triple(text, flag):
    try:
        vals = tuple(float(p) for p in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 3:
        raise CliConfigError(f"bad {flag} {text!r}, expected three comma-separated numbers")
    return vals


def _parse_ranks(text):
    pairs = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        try:
            pair = tuple(int(p) for p in parts)
        except ValueError:
            pair = ()
        if len(pair) != 2:
            raise CliConfigError(f"bad rank pair {chunk!r} in --ranks")
        pairs.append(pair)
    if len(pairs) != 3:
        raise CliConfigError("--ranks needs three semicolon-separated pairs")
    try:
        return MttRank(tuple(pairs))
    except ValueError as exc:
        raise CliConfigError(str(exc)) from exc


def _load_tensor(path):
    obj = read_t3b(path)
    if isinstance(obj, ObservationMask):
        raise CliConfigError(f"{path} holds a mask, expected a tensor")
    return obj


def _load_mask(path):
    obj = read_t3b(path)
    if not isinstance(obj, ObservationMask):
        raise CliConfigError(f"{path} holds a tensor, expected a mask")
    return obj


def _add_solver_flags(sub):
    sub.add_argument("--alpha", default="0,0,1",
                     help="mode fit weights a1,a2,a3 (default matches color images)")
    sub.add_argument("--w", default="1,1,0",
                     help="smoothness direction weights w1,w2,w3")
    sub.add_argument("--mu", type=float, default=0.05, help="smoothness strength")
    sub.add_argument("--rho", type=float, default=5e-6, help="proximal coefficient")
    sub.add_argument("--ranks", default=None,
                     help="explicit rank pairs r11,r21;r12,r22;r13,r23")
    sub.add_argument("--energy", type=float, default=None,
                     help="singular-value energy fraction for automatic ranks")
    sub.add_argument("--tol", type=float, default=1e-6, help="relative-change stop tolerance")
    sub.add_argument("--max-iter", type=int, default=500, help="iteration cap")
    sub.add_argument("--init-fill", choices=("zero", "mean"), default="zero",
                     help="fill for unobserved entries at initialization")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ttcomplete",
        description="Complete partially observed third-order tensors by "
                    "multi-mode tensor-train factorization with smoothing.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_mask = subs.add_parser("mask", help="generate an observation mask file")
    p_mask.add_argument("--dims", required=True, help="tensor dims I1xI2xI3")
    p_mask.add_argument("--rate", type=float, default=None,
                        help="independent per-entry sampling rate")
    p_mask.add_argument("--seed", type=int, default=0, help="sampling seed")
    p_mask.add_argument("--cloud", choices=CLOUD_PRESETS, default=None,
                        help="opaque-region preset instead of random sampling")
    p_mask.add_argument("--out", required=True, help="output mask path (T3B)")

    p_complete = subs.add_parser("complete", help="run the completion solver")
    p_complete.add_argument("--in", dest="input", required=True,
                            help="observed tensor (T3B)")
    p_complete.add_argument("--mask", required=True, help="observation mask (T3B)")
    _add_solver_flags(p_complete)
    p_complete.add_argument("--out", required=True, help="recovered tensor path (T3B)")
    p_complete.add_argument("--history", default=None,
                            help="write per-iteration history CSV here")
    p_complete.add_argument("--figures", default=None,
                            help="directory for rendered convergence figures")

    p_eval = subs.add_parser("eval", help="score a recovery against the truth")
    p_eval.add_argument("--recovered", required=True, help="recovered tensor (T3B)")
    p_eval.add_argument("--truth", required=True, help="reference tensor (T3B)")
    p_eval.add_argument("--label", default="recovered", help="row label in the CSV")
    p_eval.add_argument("--out", required=True, help="metrics CSV path")
    p_eval.add_argument("--figures", default=None,
                        help="directory for per-band metric figures")

    p_bench = subs.add_parser("bench", help="mask+complete+eval over a rate/seed grid")
    p_bench.add_argument("--dataset", action="append", default=[],
                         metavar="LABEL=PATH", help="dataset to benchmark (repeatable)")
    p_bench.add_argument("--rates", default="0.05,0.10,0.15",
                         help="comma-separated sampling rates")
    p_bench.add_argument("--seeds", default="0", help="comma-separated mask seeds")
    _add_solver_flags(p_bench)
    p_bench.add_argument("--out", required=True, help="benchmark CSV path")
    p_bench.add_argument("--figures", default=None,
                         help="directory for rate-curve figures")
    return parser


def _resolve_ranks(args, observed_zero_filled):
    if args.ranks is not None and args.energy is not None:
        raise CliConfigError("give either --ranks or --energy, not both")
    if args.ranks is not None:
        return _parse_ranks(args.ranks), {"kind": "explicit", "value": args.ranks}
    energy = args.energy if args.energy is not None else DEFAULT_ENERGY
    if not 0.0 < energy <= 1.0:
        raise CliConfigError("--energy must lie in (0, 1]")
    ranks = estimate_ranks(observed_zero_filled, energy)
    return ranks, {"kind": "energy", "value": energy}


def _build_config(args, ranks):
    alphas = _parse_triple(args.alpha, "--alpha")
    w = _parse_triple(args.w, "--w")
    try:
        smooth = SmoothWeights(w[0], w[1], w[2], args.mu)
        return SolverConfig(
            alphas=alphas,
            smooth=smooth,
            ranks=ranks,
            rho=args.rho,
            tol=args.tol,
            max_iter=args.max_iter,
            init_fill=args.init_fill,
        )
    except ValueError as exc:
        raise CliConfigError(str(exc)) from exc


def _config_dict(cfg):
    d = asdict(cfg)
    d["alphas"] = list(cfg.alphas)
    return d


def _progress(iteration, total, stop):
    if iteration == 1 or iteration % 50 == 0:
        obj = "n/a" if total is None else f"{total:.6g}"
        print(f"  iter {iteration}: objective {obj}, change {stop:.3e}", file=sys.stderr)


def cmd_mask(args):
    dims = _parse_dims(args.dims)
    if (args.rate is None) == (args.cloud is None):
        raise CliConfigError("give exactly one of --rate and --cloud")
    if args.rate is not None:
        try:
            mask = random_mask(dims, args.rate, args.seed)
        except ValueError as exc:
            raise CliConfigError(str(exc)) from exc
        source = {"kind": "random", "rate": args.rate, "seed": args.seed}
    else:
        mask = cloud_mask(dims, cloud_preset(args.cloud, dims))
        source = {"kind": "cloud", "preset": args.cloud}
    write_t3b(args.out, mask)
    print(f"observed fraction {mask.fraction:.4f}", file=sys.stderr)
    RunManifest(command="mask", mask_source=source, outputs=[args.out]).emit()
    return EXIT_OK


def _write_history_csv(report, path):
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["iteration", "objective", "stop_stat", "step_sq"])
        if report.objective_history:
            writer.writerow([0, f"{report.objective_history[0]:.12g}", "", ""])
        for k in range(report.iterations):
            obj = ""
            if report.objective_history:
                obj = f"{report.objective_history[k + 1]:.12g}"
            writer.writerow([
                k + 1,
                obj,
                f"{report.stop_stat_history[k]:.12g}",
                f"{report.step_sq_history[k]:.12g}",
            ])


def cmd_complete(args):
    m_raw = _load_tensor(args.input)
    mask = _load_mask(args.mask)
    if m_raw.shape != mask.dims:
        raise CliConfigError(f"tensor dims {m_raw.shape} != mask dims {mask.dims}")

    record = None
    seen = m_raw[mask.observed]
    if seen.size and (seen.min() < 0.0 or seen.max() > 1.0):
        lo, hi = float(seen.min()), float(seen.max())
        record = NormalizationRecord(lo=lo, hi=hi if hi > lo else lo + 1.0)
        m = record.normalize(m_raw)
    else:
        m = m_raw

    ranks, rank_source = _resolve_ranks(args, np.where(mask.observed, m, 0.0))
    cfg = _build_config(args, ranks)
    try:
        report = solve(m, mask, cfg, callback=_progress)
    except ValueError as exc:
        raise CliConfigError(str(exc)) from exc

    out_tensor = record.denormalize(report.recovered) if record else report.recovered
    write_t3b(args.out, out_tensor)
    outputs = [args.out]
    if args.history:
        _write_history_csv(report, args.history)
        outputs.append(args.history)
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        outputs.append(str(figures.save_history_figure(report, fig_dir / "history.png")))

    print(
        f"finished after {report.iterations} iterations "
        f"(converged={report.converged}, {report.wall_time:.2f}s)",
        file=sys.stderr,
    )
    RunManifest(
        command="complete",
        inputs=[args.input],
        mask_source={"kind": "file", "path": args.mask},
        config={
            **_config_dict(cfg),
            "rank_source": rank_source,
            "normalized": record is not None,
        },
        outputs=outputs,
        metrics={"history": args.history is not None, "figures": args.figures is not None},
    ).emit()
    return EXIT_OK


def cmd_eval(args):
    recovered = _load_tensor(args.recovered)
    truth = _load_tensor(args.truth)
    if recovered.shape != truth.shape:
        raise CliConfigError(f"dims {recovered.shape} != {truth.shape}")
    qr = quality_report(recovered, truth)
    write_report_csv([(args.label, qr, None)], args.out)
    outputs = [args.out]
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        outputs.append(str(figures.save_band_metrics_figure(qr, fig_dir / "band_metrics.png")))
    RunManifest(
        command="eval",
        inputs=[args.recovered, args.truth],
        outputs=outputs,
        metrics={"mpsnr": qr.mpsnr, "mssim": qr.mssim},
    ).emit()
    return EXIT_OK


def _parse_grid(args):
    datasets = []
    for item in args.dataset:
        label, sep, path = item.partition("=")
        if not sep or not label or not path:
            raise CliConfigError(f"bad --dataset {item!r}, expected LABEL=PATH")
        datasets.append((label, path))
    try:
        rates = [float(r) for r in args.rates.split(",") if r]
        seeds = [int(s) for s in args.seeds.split(",") if s]
    except ValueError as exc:
        raise CliConfigError(f"bad --rates/--seeds: {exc}") from exc
    return datasets, rates, seeds


def cmd_bench(args):
    datasets, rates, seeds = _parse_grid(args)
    rows = []
    points = []
    for label, path in datasets:
        truth = _load_tensor(path)
        if truth.min() < 0.0 or truth.max() > 1.0:
            truth = NormalizationRecord.from_tensor(truth).normalize(truth)
        for rate in rates:
            for seed in seeds:
                cell = f"{label}_p{rate:g}_s{seed}"
                try:
                    mask = random_mask(truth.shape, rate, seed)
                    ranks, _ = _resolve_ranks(args, np.where(mask.observed, truth, 0.0))
                    cfg = _build_config(args, ranks)
                    report = solve(truth, mask, cfg)
                    qr = quality_report(report.recovered, truth)
                except (ValueError, SolverAbortError) as exc:
                    print(f"  {cell}: failed ({exc})", file=sys.stderr)
                    rows.append((cell, None, None))
                    continue
                rows.append((cell, qr, report.wall_time))
                points.append((label, rate, qr.mpsnr))
                print(f"  {cell}: mpsnr {qr.mpsnr:.2f} dB in {report.wall_time:.2f}s",
                      file=sys.stderr)
    write_report_csv(rows, args.out)
    outputs = [args.out]
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        outputs.append(str(figures.save_bench_figure(points, fig_dir / "bench_psnr.png")))
    RunManifest(
        command="bench",
        inputs=[path for _, path in datasets],
        mask_source={"kind": "random-grid", "rates": rates, "seeds": seeds},
        outputs=outputs,
        metrics={"cells": len(rows), "failed": sum(1 for r in rows if r[1] is None)},
    ).emit()
    return EXIT_OK


_COMMANDS = {
    "mask": cmd_mask,
    "complete": cmd_complete,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SolverAbortError as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FileFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
