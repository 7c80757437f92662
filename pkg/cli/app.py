"""
Command-line entry point.

    python3 -m cli.app run --input ratings.tsv --format triplet --method ccot --out results/ml
    python3 -m cli.app run --preset d1 --method ccot-gw --seed 3
    python3 -m cli.app simulate --preset d3 --out data/d3
    python3 -m cli.app bench --preset d1 --preset d3 --repeats 10
    python3 -m cli.app plot --out results/ml
"""

import argparse
import logging
import os
import sys
import time
from typing import List, Optional

from dotenv import load_dotenv

load_dotenv()  # CCOT_* settings from .env before any config module is read

import pandas as pd  # noqa: E402

from ccot.errors import CoclusterError  # noqa: E402
from ccot.simulate import generate_lbm, load_preset  # noqa: E402
from ccot.strategies import STRATEGIES  # noqa: E402

from . import config  # noqa: E402
from .ingest import FORMATS, ingest  # noqa: E402
from .manifest import RunManifest  # noqa: E402
from .outputs import FLOAT_FORMAT, TRACES_FILE, build_summary, write_run  # noqa: E402
from .router import Router  # noqa: E402

logger = logging.getLogger("ccot")


def run(manifest: RunManifest) -> int:
    manifest.validate()
    truth = None
    if manifest.preset is not None:
        data, truth = generate_lbm(load_preset(manifest.preset, seed=manifest.seed))
        logger.info("generated preset %s (%dx%d)", manifest.preset, data.n, data.d)
    else:
        data = ingest(manifest.input, manifest.format)

    strategy = Router(manifest).get_strategy()
    logger.info("running %s on a %dx%d matrix (seed=%d)", strategy.name, data.n, data.d, manifest.seed)
    start = time.time()
    result = strategy.fit(data)
    elapsed = time.time() - start
    logger.info("%s finished in %.2fs: g=%d, m=%d", strategy.name, elapsed, result.g, result.m)

    summary = build_summary(
        data,
        result,
        manifest.to_dict(),
        manifest.zero_exclusion,
        truth,
        elapsed if manifest.record_timing else None,
    )
    write_run(manifest.out, data, result, summary)
    return 0


def _manifest_from_args(args) -> RunManifest:
    base = RunManifest.from_yaml(args.manifest) if args.manifest else RunManifest()
    return base.updated(
        input=args.input,
        format=args.format,
        preset=args.preset,
        method=args.method,
        lam=args.lam,
        samples=args.samples,
        max_extra_samples=args.max_extra_samples,
        eps=tuple(args.eps) if args.eps else None,
        sigma=args.sigma,
        loss=args.loss,
        barycenter_size=args.barycenter_size,
        outer_iter=args.outer_iter,
        seed=args.seed,
        n_jobs=args.n_jobs,
        out=args.out,
        exclude_zeros=args.exclude_zeros,
        record_timing=args.timing,
    )


def cmd_run(args) -> int:
    return run(_manifest_from_args(args))


def cmd_simulate(args) -> int:
    cfg = load_preset(args.preset, seed=args.seed)
    data, truth = generate_lbm(cfg)
    os.makedirs(args.out, exist_ok=True)
    frame = pd.DataFrame(data.values, index=data.row_ids, columns=data.col_ids)
    frame.to_csv(os.path.join(args.out, "data.csv"), index_label="id", float_format=FLOAT_FORMAT)
    labels = pd.concat(
        [
            pd.DataFrame({"axis": "row", "id": data.row_ids, "label": truth.row_labels}),
            pd.DataFrame({"axis": "col", "id": data.col_ids, "label": truth.col_labels}),
        ],
        ignore_index=True,
    )
    labels.to_csv(os.path.join(args.out, "truth.csv"), index=False)
    logger.info("wrote %dx%d %s matrix and its labels to %s", data.n, data.d, args.preset, args.out)
    return 0


def cmd_bench(args) -> int:
    from benchmarking.run_bench import bench

    base = RunManifest(preset=args.preset[0]).updated(
        lam=args.lam,
        samples=args.samples,
        eps=tuple(args.eps) if args.eps else None,
        sigma=args.sigma,
        outer_iter=args.outer_iter,
        n_jobs=args.n_jobs,
    )
    report = bench(args.preset, args.repeats, args.seed, args.method or tuple(STRATEGIES), base)
    out = args.out or os.path.join(config.OUTPUT_DIR, "bench.csv")
    if os.path.dirname(out):
        os.makedirs(os.path.dirname(out), exist_ok=True)
    report.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    logger.info("bench report with %d lines written to %s", len(report), out)
    return 0


def cmd_plot(args) -> int:
    from .plots import plot_traces

    traces = args.traces or os.path.join(args.out, TRACES_FILE)
    png = args.png or os.path.splitext(traces)[0] + ".png"
    plot_traces(traces, png)
    return 0


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, help="regularization (default: grid search for ccot)")
    p.add_argument("--samples", type=int, help="number of CCOT samples")
    p.add_argument("--eps", type=float, nargs=2, metavar=("EPS_R", "EPS_C"), help="barycenter weights")
    p.add_argument("--sigma", type=float, help="Gaussian kernel bandwidth (default: mean distance)")
    p.add_argument("--outer-iter", type=int, help="barycenter sweeps")
    p.add_argument("--n-jobs", type=int, help="worker threads for CCOT samples")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccot", description="Co-clustering through entropic optimal transport.")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="co-cluster a matrix and write partitions, summary and traces")
    p.add_argument("--input", help="input file")
    p.add_argument("--format", choices=FORMATS, help="input layout (default dense-csv)")
    p.add_argument("--preset", help="simulate an LBM preset instead of reading a file")
    p.add_argument("--manifest", help="YAML run manifest; flags override its values")
    p.add_argument("--method", choices=sorted(STRATEGIES))
    p.add_argument("--max-extra-samples", type=int, help="cap on samples drawn to cover every row")
    p.add_argument("--loss", choices=("squared", "kullback_leibler"))
    p.add_argument("--barycenter-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--exclude-zeros", action=argparse.BooleanOptionalAction, default=None,
                   help="drop zero entries from block means (default: on for triplet input)")
    p.add_argument("--timing", action="store_true", default=None, help="record wall time in the summary")
    _add_method_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="write a generated LBM data set and its labels as CSV")
    p.add_argument("--preset", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=config.OUTPUT_DIR)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="CCE and count detection over regenerated presets")
    p.add_argument("--preset", action="append", required=True)
    p.add_argument("--method", action="append", choices=sorted(STRATEGIES))
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV report path")
    _add_method_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="render traces.csv as a PNG")
    p.add_argument("--traces", help="traces file (default: <out>/traces.csv)")
    p.add_argument("--out", default=config.OUTPUT_DIR)
    p.add_argument("--png")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CoclusterError as e:
        if config.DEBUG:
            logger.exception("%s failed", args.command)
        else:
            logger.error("%s failed: %s", args.command, e)
        return 1
    except OSError as e:
        logger.error("%s failed: %s", args.command, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
