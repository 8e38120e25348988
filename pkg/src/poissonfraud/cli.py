"""Command-line entry point: simulate, fit, predict, evaluate, report, region."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .estimation import estimate
from .evaluation import GROUPS, read_detail_csv, summarize, write_detail_csv
from .experiment import run_experiment, score_client
from .intensity import Family, IntensityModel, feasible_region_grid
from .prediction import MODEL_NAMES, WindowPolicy, parse_model_name, write_scores_csv
from .simulation import SimSpec, group_specs, simulate_dataset, write_dataset
from .timeline import IngestError, SplitSpec, ingest_csv, split

log = logging.getLogger("poissonfraud")

DEFAULT_REGION_T = (0.02, 0.2, 20.0)


class UsageError(Exception):
    """Invalid flags or inputs; reported with exit code 2."""


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _models(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    for name in names:
        try:
            parse_model_name(name)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return names


def _window(text: str) -> WindowPolicy:
    try:
        return WindowPolicy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _output_dir(args) -> Path:
    out = Path(args.output_dir)
    if not out.is_dir():
        raise UsageError(f"output directory {out} does not exist")
    return out


def _input(args) -> Path:
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file {path} does not exist")
    return path


def _attach_log(out: Path) -> logging.Handler:
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logging.getLogger("poissonfraud").addHandler(handler)
    logging.getLogger("poissonfraud").setLevel(logging.INFO)
    return handler


def cmd_simulate(args) -> int:
    out = _output_dir(args)
    if args.profile == "groups":
        specs = group_specs(args.clients, args.seed, frauds_per_client=args.frauds_per_client,
                            horizon_days=args.horizon_days, fraud_family=args.family,
                            labeling=args.labeling or "attach")
    else:
        params = args.fraud_params if args.fraud_params is not None else [0.05, 0.0, 0.0][: Family.parse(args.family).n_params]
        try:
            model = IntensityModel(Family.parse(args.family), params, args.horizon_days)
            specs = [SimSpec(args.clients, args.genuine_rate, model, args.horizon_days, args.seed,
                             labeling=args.labeling or "merge")]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    timelines = [t for spec in specs for t in simulate_dataset(spec)]
    csv_path, manifest = write_dataset(timelines, specs, out, args.name)
    print(f"wrote {csv_path} and {manifest} ({len(timelines)} clients)")
    return 0


def _load(args):
    try:
        return ingest_csv(_input(args))
    except IngestError as exc:
        raise UsageError(f"{args.input}: {exc}") from None


def cmd_fit(args) -> int:
    out = _output_dir(args)
    spec = SplitSpec(args.train_fraction)
    fits = []
    for timeline in _load(args):
        if len(timeline) < 2:
            log.warning("%s: fewer than 2 transactions, skipped", timeline.client_id)
            continue
        train, _ = split(timeline, spec)
        fits.append(estimate(args.family, train).to_dict())
    path = out / f"fits_{Family.parse(args.family).value}.json"
    path.write_text(json.dumps(fits, indent=2))
    print(f"wrote {path} ({len(fits)} fits)")
    return 0


def cmd_predict(args) -> int:
    out = _output_dir(args)
    spec = SplitSpec(args.train_fraction)
    series = []
    for timeline in _load(args):
        if len(timeline) < 2:
            continue
        series.extend(score_client(timeline, args.models, spec, args.window))
    path = out / "scores.csv"
    write_scores_csv(series, path)
    print(f"wrote {path} ({len(series)} series)")
    return 0


def cmd_evaluate(args) -> int:
    out = _output_dir(args)
    handler = _attach_log(out)
    try:
        timelines = _load(args)
        result = run_experiment(
            timelines,
            args.models,
            split_spec=SplitSpec(args.train_fraction),
            window=args.window,
            group_sample=args.group_sample if args.group_sample > 0 else None,
            seed=args.seed,
            parallelism=args.parallelism,
        )
        if not any(result.groups.values()):
            log.error("no eligible clients (need 0 < fraud proportion <= 20%% and >= 2 transactions)")
            print("error: dataset has no eligible clients", file=sys.stderr)
            return 1
        report = result.report
        write_detail_csv(result.metrics, out / "detail.csv")
        report.write_summary_csv(out / "summary.csv")
        (out / "report.json").write_text(report.to_json())
        report.write_relative_map_csv(out / "relative_map.csv")
        if args.plot_data:
            report.write_plot_data(out / "relative_map_plot.csv")
        if args.scores:
            write_scores_csv(result.series, out / "scores.csv")
        (out / "groups.json").write_text(json.dumps(result.groups, indent=2))
        print(_format_report(report))
    finally:
        logging.getLogger("poissonfraud").removeHandler(handler)
        handler.close()
    return 0


def _format_report(report) -> str:
    lines = []
    for metric in ("AUC", "AP"):
        for group in GROUPS:
            rows = [s for s in report.summaries if s.metric == metric and s.group == group]
            if not rows:
                continue
            lines.append(f"{metric}: {group}")
            lines.append(f"  {'model':<18}{'max':>10}{'mean':>10}{'min':>10}{'std':>10}{'n':>6}")
            for s in rows:
                lines.append(f"  {s.model_name:<18}{s.max:>10.6f}{s.mean:>10.6f}{s.min:>10.6f}{s.std:>10.6f}{s.count:>6}")
    if report.relative_map:
        lines.append("relative MAP vs NaiveStatic")
        lines.append("  " + f"{'model':<18}" + "".join(f"{g:>12}" for g in GROUPS))
        for model, row in report.relative_map.items():
            lines.append("  " + f"{model:<18}" + "".join(f"{row[g]:>12.6f}" if g in row else f"{'':>12}" for g in GROUPS))
    return "\n".join(lines)


def cmd_report(args) -> int:
    path = _input(args)
    report = summarize(read_detail_csv(path))
    print(_format_report(report))
    if args.output_dir:
        out = _output_dir(args)
        report.write_summary_csv(out / "summary.csv")
        report.write_relative_map_csv(out / "relative_map.csv")
        (out / "report.json").write_text(report.to_json())
        if args.plot_data:
            report.write_plot_data(out / "relative_map_plot.csv")
    return 0


def cmd_region(args) -> int:
    out = _output_dir(args)
    if args.a_max <= 0 or args.b_max <= 0:
        raise UsageError("--a-max and --b-max must be positive")
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    written = []
    for T in args.T:
        if T <= 0:
            raise UsageError("T values must be positive")
        grid = feasible_region_grid(args.family, args.a_max, args.b_max, T, args.resolution, args.c_values)
        path = out / f"region_{grid.family.value}_T{T:g}.csv"
        grid.to_csv(path)
        written.append(path)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poissonfraud", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="transaction CSV (client_id,timestamp,label)")
        p.add_argument("--output-dir", required=True)
        p.add_argument("--config", help="key=value file; flags given on the command line win")
        p.add_argument("--seed", type=int, default=0)

    def pipeline(p):
        p.add_argument("--train-fraction", type=float, default=0.8)
        p.add_argument("--window", type=_window, default=WindowPolicy(), help="expanding | fixed:N")
        p.add_argument("--models", type=_models, default=list(MODEL_NAMES), help="comma-separated model names")

    p = sub.add_parser("simulate", help="generate a synthetic dataset and manifest")
    common(p, needs_input=False)
    p.add_argument("--clients", type=int, default=100, help="clients (per group with --profile groups)")
    p.add_argument("--profile", choices=("single", "groups"), default="single")
    p.add_argument("--family", type=Family.parse, default=Family.CONSTANT, help="fraud intensity family")
    p.add_argument("--fraud-params", type=_floats, default=None, help="intensity parameters, e.g. '0.01,0.001'")
    p.add_argument("--genuine-rate", type=float, default=1.0, help="genuine transactions per day")
    p.add_argument("--horizon-days", type=float, default=365.0)
    p.add_argument("--frauds-per-client", type=float, default=12.0, help="groups profile: expected frauds per client")
    p.add_argument("--labeling", choices=("merge", "attach"), default=None,
                   help="default: merge for --profile single, attach for --profile groups")
    p.add_argument("--name", default="dataset")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one intensity family per client on the training split")
    common(p)
    p.add_argument("--family", type=Family.parse, default=Family.LINEAR)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="score test transactions for every client")
    common(p)
    pipeline(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run all models over grouped clients and summarize")
    common(p)
    pipeline(p)
    p.add_argument("--group-sample", type=int, default=500, help="clients sampled per group (0 = all)")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--plot-data", action="store_true", help="also write (x, y, series) plot data")
    p.add_argument("--scores", action="store_true", help="also write per-transaction scores")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="rebuild summaries from a detail.csv")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--config")
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("region", help="feasible-region grids for the intensity constraints")
    common(p, needs_input=False)
    p.add_argument("--family", type=Family.parse, default=Family.LINEAR)
    p.add_argument("--a-max", type=float, default=10.0)
    p.add_argument("--b-max", type=float, default=100.0)
    p.add_argument("--T", type=_floats, default=list(DEFAULT_REGION_T), help="horizons, e.g. '0.02,0.2,20'")
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--c-values", type=_floats, default=None, help="quadratic c slices")
    p.set_defaults(func=cmd_region)
    return parser


def _config_path(argv: Sequence[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def expand_config(argv: Sequence[str]) -> list[str]:
    """Insert ``--config`` entries right after the subcommand so explicit flags win."""
    argv = list(argv)
    path = _config_path(argv)
    if path is None or not argv:
        return argv
    try:
        values = read_config(path)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    prefix: list[str] = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            prefix.append(flag)
        elif value.lower() not in ("false", "no", "off"):
            prefix += [flag, value]
    return [argv[0], *prefix, *argv[1:]]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(expand_config(argv))
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
