"""Command-line interface: ``hetseg segment | scale | simulate``.

Exit status is 0 on success, 1 on a pipeline error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .errors import HetsegError
from .ingest import IngestConfig, parse_series
from .pipeline import FIXED_HETERO, MODELS, fit_model
from .robust_scale import sigma_per_interval
from .selection import CRITERIA
from .simulation import KSTAR, SimDesign, run_grid, summarize, write_table

log = logging.getLogger("hetseg")


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _write_tsv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _criteria(text: str) -> tuple[str, ...]:
    names = tuple(c.strip().lower() for c in text.split(",") if c.strip())
    bad = [c for c in names if c not in CRITERIA]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"criteria must be a comma list from {','.join(CRITERIA)}")
    return names


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _ingest_config(args) -> IngestConfig:
    return IngestConfig(
        input_path=args.input,
        date_column=args.date_col,
        value_column=args.value_col,
        missing_policy=args.missing,
        interval_scheme="explicitLabels" if args.labels_col else "calendarMonth",
        labels_column=args.labels_col,
        kmax=args.kmax,
        criteria=args.criteria,
        zero_scale_floor=args.zero_scale_floor,
        seed=args.seed,
    )


def _scale_rows(vmap, scales):
    return [[vmap.name(j), j, _fmt(scales.sigma[j - 1])] for j in range(1, vmap.J + 1)]


def cmd_scale(args) -> int:
    cfg = _ingest_config(args)
    series, vmap, _ = parse_series(cfg)
    scales = sigma_per_interval(series, vmap, zero_scale_floor=cfg.zero_scale_floor)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_tsv(out / "scales.tsv", ["month", "label", "sigma"], _scale_rows(vmap, scales))
    return 0


def cmd_segment(args) -> int:
    cfg = _ingest_config(args)
    series, vmap, dropped = parse_series(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fit = fit_model(args.model, series, vmap if args.model == FIXED_HETERO else None, cfg.kmax,
                    criteria=cfg.criteria, **({"zero_scale_floor": cfg.zero_scale_floor}
                                              if args.model == FIXED_HETERO else {}))
    if fit.scales is not None:
        _write_tsv(out / "scales.tsv", ["month", "label", "sigma"], _scale_rows(vmap, fit.scales))
    _write_tsv(out / "contrast.tsv", ["K", "sswg"],
               [[k + 1, _fmt(c)] for k, c in enumerate(fit.dp.costs)])
    sel_rows = []
    for crit in cfg.criteria:
        if crit not in fit.report.chosen:
            log.warning("criterion %s failed: %s", crit, fit.report.warnings.get(crit))
            continue
        seg = fit.segmentation(crit)
        rows = []
        for k, (a, b) in enumerate(seg.segments(), start=1):
            rows.append([k, str(series.dates[b - 1]), b, _fmt(seg.means[k - 1])])
        _write_tsv(out / f"breaks_{crit}.tsv", ["k", "lastDate", "lastIndex", "mean"], rows)
        sel_rows.append([crit, seg.K, seg.K - 1])
        if crit in fit.report.warnings:
            log.warning("%s: %s", crit, fit.report.warnings[crit])
    _write_tsv(out / "selection.tsv", ["criterion", "K", "breakpoints"], sel_rows)
    for crit, K, nb in sel_rows:
        print(f"{crit}\tK={K}\t{nb} breakpoint(s)")
    if dropped:
        print(f"dropped {dropped} row(s)", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    try:
        design = SimDesign(
            n=args.n, sigma1=args.sigma1,
            sigma2_grid=args.sigma2 or SimDesign.sigma2_grid,
            replications=args.replications, base_seed=args.seed, kmax=args.kmax,
        )
    except ValueError as exc:
        print(f"hetseg simulate: error: {exc}", file=sys.stderr)
        return 2
    criteria = tuple(args.criteria) + ((KSTAR,) if args.with_kstar else ())
    results = run_grid(design, models=args.models, criteria=criteria,
                       oracle_variances=args.oracle, workers=args.workers,
                       record_timing=not args.no_timing)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "simgrid.tsv").open("w", newline="") as fh:
        write_table(results, fh)
    print("model\tcriterion\tsigma2\tmedian_dK\tmedian_d1\tmedian_d2")
    for row in summarize(results):
        print(f"{row['model']}\t{row['criterion']}\t{row['sigma2']:g}\t"
              f"{row['dK_median']:g}\t{row['d1_median']:g}\t{row['d2_median']:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="delimited text file with a header row")
    common.add_argument("--date-col", default="date", help="ISO date column (default: date)")
    common.add_argument("--value-col", default="value", help="value column (default: value)")
    common.add_argument("--labels-col", default=None,
                        help="use this column as variance-interval labels instead of calendar months")
    common.add_argument("--missing", choices=("drop", "error"), default="drop",
                        help="rows with a missing or non-numeric value")
    common.add_argument("--kmax", type=_positive_int, default=None,
                        help="largest number of segments (default: min(n//5, 100))")
    common.add_argument("--criteria", type=_criteria, default=CRITERIA,
                        help="comma list from lav,bm1,bm2,mbic (default: all)")
    common.add_argument("--seed", type=int, default=0, help="base seed of the simulation streams")
    common.add_argument("--zero-scale-floor", action="store_true",
                        help="replace a zero interval scale by a tiny floor instead of failing")
    common.add_argument("--out-dir", default=".", help="directory for the output tables")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hetseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common], help="segment a series and select K")
    p.add_argument("--model", choices=MODELS, default=FIXED_HETERO)
    p.set_defaults(func=cmd_segment, needs_input=True)

    p = sub.add_parser("scale", parents=[common], help="robust standard deviation per month")
    p.set_defaults(func=cmd_scale, needs_input=True)

    p = sub.add_parser("simulate", parents=[common], help="run the Monte-Carlo grid")
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--sigma1", type=float, default=0.5)
    p.add_argument("--sigma2", type=_floats, default=None, help="comma list of sigma2 values")
    p.add_argument("--replications", type=_positive_int, default=100)
    p.add_argument("--models", type=lambda s: tuple(s.split(",")), default=MODELS)
    p.add_argument("--oracle", action="store_true", help="also run with the true variances")
    p.add_argument("--with-kstar", action="store_true", help="also score the true-K segmentation")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--no-timing", action="store_true", help="write wallMs as 0 for reproducible tables")
    p.set_defaults(func=cmd_simulate, needs_input=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.needs_input and not args.input:
        parser.error(f"{args.command} requires --input")
    if args.command == "simulate":
        bad = [m for m in args.models if m not in MODELS]
        if bad:
            parser.error(f"unknown model(s) {bad}; choose from {','.join(MODELS)}")
    try:
        return args.func(args)
    except (HetsegError, OSError) as exc:
        print(f"hetseg {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
