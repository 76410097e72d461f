"""Command-line front end: generate datasets, compute metric reports, export
scatter/autocorrelation data, and run attack sweeps.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .attack import AttackConfig, susceptibility_sweep
from .datafile import DataError, check_compatible, default_manifest, read_dataset, write_dataset
from .encoding import (
    TOTAL_BITS,
    ConfigError,
    CrpDataset,
    GridConfig,
    build_interpretation,
)
from .kernel import generate_dataset
from .metrics import (
    DegenerateInputError,
    autocorrelation,
    bit_aliasing,
    crp_scatter,
    reliability,
    uniformity,
    uniqueness,
)
from .model import build_puf

# spacing between consecutive per-PUF seeds; odd 64-bit constant so that the
# XOR-based per-cell streams of different PUFs never collide
PUF_SEED_STRIDE = 0x9E3779B97F4A7C15

METRIC_NAMES = ("uniqueness", "uniformity", "bit-aliasing", "reliability")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def puf_seed_for(master_seed: int, index: int) -> int:
    return (master_seed + index * PUF_SEED_STRIDE) & 0xFFFFFFFFFFFFFFFF


def _add_grid_flags(p):
    p.add_argument("--ex2-step", type=float, default=0.0003)
    p.add_argument("--ex2-count", type=int, default=2999)
    p.add_argument("--dphi-step", type=float, default=0.087)
    p.add_argument("--dphi-count", type=int, default=71)
    p.add_argument("--ex2-start-index", type=int, default=1)
    p.add_argument("--dphi-start-index", type=int, default=1)


def _grid_from_args(args) -> GridConfig:
    return GridConfig(
        ex2_step=args.ex2_step,
        ex2_count=args.ex2_count,
        dphi_step=args.dphi_step,
        dphi_count=args.dphi_count,
        ex2_start_index=args.ex2_start_index,
        dphi_start_index=args.dphi_start_index,
    )


def parse_interpretation(text: str) -> tuple[int, int]:
    try:
        out_s, bit_s = text.split(":")
        out, bit = int(out_s), int(bit_s)
    except ValueError:
        raise ConfigError(f"interpretation must look like '1:9', got {text!r}")
    if out not in (1, 2) or not 0 <= bit < TOTAL_BITS:
        raise ConfigError(f"interpretation out of range: {text!r}")
    return out, bit


def _selected_interpretations(args) -> list[tuple[int, int]]:
    if not args.interpretation or "all" in args.interpretation:
        return [(o, b) for o in (1, 2) for b in range(TOTAL_BITS)]
    return [parse_interpretation(t) for t in args.interpretation]


def _open_output(path):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def cmd_generate(args) -> int:
    grid = _grid_from_args(args)
    if args.pufs < 1:
        raise ConfigError("--pufs must be at least 1")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = default_manifest(args.seed, args.pufs, args.cells, grid)
    suffix = "bin" if args.binary else "txt"
    t0 = time.time()
    paths = []
    for index in range(args.pufs):
        puf = build_puf(puf_seed_for(args.seed, index), n_cells=args.cells)
        ds = generate_dataset(puf, grid)
        path = out_dir / f"puf{index:02d}.{suffix}"
        write_dataset(path, ds, manifest, binary=args.binary)
        paths.append(str(path))
        print(f"wrote {path} ({ds.n_challenges} records)")
    run_info = {
        "version": __version__,
        "manifest_hash": manifest.hash(),
        "master_seed": args.seed,
        "puf_count": args.pufs,
        "n_cells": args.cells,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "elapsed_seconds": round(time.time() - t0, 3),
        "outputs": paths,
    }
    (out_dir / "run.json").write_text(json.dumps(run_info, indent=2) + "\n")
    return 0


def _load_datasets(paths) -> tuple[list[CrpDataset], list[dict]]:
    datasets, headers = [], []
    for p in paths:
        ds, header = read_dataset(p)
        datasets.append(ds)
        headers.append(header)
    check_compatible(headers)
    return datasets, headers


def _response_matrix(datasets, out, bit) -> np.ndarray:
    """(k, m) response integers for one interpretation across k datasets."""
    return np.stack([build_interpretation(ds, out, bit).responses for ds in datasets])


def _summary(fh, metric: str, values: list[float]) -> None:
    if not values:
        return
    fh.write(f"summary metric={metric} stat=mean value={statistics.mean(values):.6f}\n")
    fh.write(f"summary metric={metric} stat=median value={statistics.median(values):.6f}\n")
    std = statistics.pstdev(values) if len(values) > 1 else 0.0
    fh.write(f"summary metric={metric} stat=std value={std:.6f}\n")


def cmd_metrics(args) -> int:
    metrics = args.metric or list(METRIC_NAMES)
    for m in metrics:
        if m not in METRIC_NAMES:
            raise ConfigError(f"unknown metric {m!r}")
    datasets, _ = _load_datasets(args.files)
    if ("uniqueness" in metrics or "bit-aliasing" in metrics or "reliability" in metrics) and len(
        datasets
    ) < 2:
        raise ConfigError("uniqueness, bit-aliasing, and reliability need at least 2 dataset files")
    interps = _selected_interpretations(args)
    n_cells = datasets[0].n_cells
    fh = _open_output(args.output)
    try:
        if "uniqueness" in metrics:
            values = []
            for out, bit in interps:
                r = _response_matrix(datasets, out, bit)
                v = uniqueness(r, n_cells)
                values.append(v)
                fh.write(
                    f"metric=uniqueness scope=cross-puf interpretation={out}:{bit:02d} "
                    f"k={r.shape[0]} m={r.shape[1]} n={n_cells} value={v:.6f}\n"
                )
            _summary(fh, "uniqueness", values)
        if "uniformity" in metrics:
            values = []
            for p_idx, ds in enumerate(datasets):
                for out, bit in interps:
                    resp = build_interpretation(ds, out, bit).responses
                    v = uniformity(resp, n_cells)
                    values.append(v)
                    fh.write(
                        f"metric=uniformity scope=per-puf puf={p_idx} "
                        f"interpretation={out}:{bit:02d} m={resp.shape[0]} n={n_cells} "
                        f"value={v:.6f}\n"
                    )
            _summary(fh, "uniformity", values)
        if "bit-aliasing" in metrics:
            values = []
            for out, bit in interps:
                r = _response_matrix(datasets, out, bit)
                for pos in range(n_cells):
                    v = bit_aliasing(r, pos, n_cells)
                    values.append(v)
                    fh.write(
                        f"metric=bit-aliasing scope=cross-puf interpretation={out}:{bit:02d} "
                        f"position={pos} k={r.shape[0]} m={r.shape[1]} value={v:.6f}\n"
                    )
            _summary(fh, "bit-aliasing", values)
        if "reliability" in metrics:
            values = []
            for out, bit in interps:
                r = _response_matrix(datasets, out, bit)
                v = reliability(r[0], r[1:], n_cells)
                values.append(v)
                fh.write(
                    f"metric=reliability scope=per-puf interpretation={out}:{bit:02d} "
                    f"k={r.shape[0] - 1} m={r.shape[1]} n={n_cells} value={v:.6f}\n"
                )
            _summary(fh, "reliability", values)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_analyze(args) -> int:
    ds, _ = read_dataset(args.file)
    out, bit = parse_interpretation(args.interpretation)
    interp = build_interpretation(ds, out, bit)
    fh = _open_output(args.output)
    try:
        if args.analysis == "scatter":
            for c, r in crp_scatter(interp):
                fh.write(f"{c} {r}\n")
        else:
            acf = autocorrelation(interp.responses.astype(np.float64), args.max_lag)
            for lag, value in enumerate(acf):
                fh.write(f"{lag} {value:.8f}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_attack(args) -> int:
    ds, _ = read_dataset(args.file)
    out, bit = parse_interpretation(args.interpretation)
    interp = build_interpretation(ds, out, bit)
    try:
        cfg = AttackConfig(
            train_sizes=tuple(int(s) for s in args.train_sizes.split(",")),
            holdout_size=args.holdout,
            epochs=args.epochs,
            seed=args.seed,
            features=args.features,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        result = susceptibility_sweep(interp, cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fh = _open_output(args.output)
    try:
        for e in result.entries:
            fh.write(
                f"train_size={e.train_size} accuracy={e.accuracy:.6f} "
                f"lower_bound={e.lower_bound:.6f} beats_chance={int(e.beats_chance)}\n"
            )
        fh.write(f"n_chance={result.n_chance if result.n_chance is not None else 'none'}\n")
        fh.write(f"n_65={result.n_65 if result.n_65 is not None else 'none'}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="photonic-puf", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate CRP dataset files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pufs", type=int, default=10)
    p.add_argument("--cells", type=int, default=24)
    _add_grid_flags(p)
    p.add_argument("--output", required=True)
    p.add_argument("--binary", action="store_true", help="packed 3-byte-per-bitstring format")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("metrics", help="compute PUF quality metric reports")
    p.add_argument("files", nargs="+")
    p.add_argument("--metric", action="append", choices=METRIC_NAMES)
    p.add_argument("--interpretation", action="append")
    p.add_argument("--output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("analyze", help="export scatter or autocorrelation data")
    p.add_argument("file")
    p.add_argument("--interpretation", required=True)
    p.add_argument("--analysis", choices=("scatter", "autocorr"), required=True)
    p.add_argument("--max-lag", type=int, default=1000)
    p.add_argument("--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("attack", help="run an ML susceptibility sweep")
    p.add_argument("file")
    p.add_argument("--interpretation", required=True)
    p.add_argument("--train-sizes", default="100,1000,3000,10000,30000,100000")
    p.add_argument("--holdout", type=int, default=20000)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", choices=("bits", "observables"), default="bits")
    p.add_argument("--output")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, DegenerateInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
