"""Command-line entry point.

    jitlgpr synth      synthetic truth/observed pair
    jitlgpr correct    summer-corrected series + correction report
    jitlgpr tune       window tuning report (full RMSE surfaces)
    jitlgpr forecast   JITL-GP forecast CSV
    jitlgpr benchmark  benchmark forecast CSVs + AFTER combination
    jitlgpr evaluate   accuracy table against actuals
    jitlgpr report     long-format plot data

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure, 1 anything else.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import jitl, pipeline, synth
from .benchmarks import run_benchmarks, stl_decompose
from .config import RunConfig
from .errors import ConfigError, DataError, JitlGprError, NumericalError
from .io import format_date, ingest_csv, write_json, write_series_csv, write_table_csv, atomic_write_text
from .jitl import MonthGrouping, WindowPair
from .timegrid import MonthlySeries

log = logging.getLogger("jitlgpr")

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4


# ------------------------------------------------------------- arg parsing

def _int_list(text: str) -> list[int]:
    """``"2-8"`` or ``"2,3,5"``."""
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(v) for v in text.split("-"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like 2-8 or a list like 2,3,5, got {text!r}")


def _order(text: str) -> list[int]:
    vals = _int_list(text.replace("-", ","))
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}")
    return vals


def _windows(text: str) -> list[list[int]]:
    """``"4x3,3x2,5x4"``: one window per group."""
    try:
        return [[int(a), int(b)] for a, b in (w.lower().split("x") for w in text.split(","))]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected windows like 4x3,3x2,5x4, got {text!r}")


def _named_path(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=PATH, got {text!r}")
    return name, path


def _correction_init(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", help="CSV with header date,demand")

    corr = argparse.ArgumentParser(add_help=False)
    corr.add_argument("--correct", dest="correct", action="store_true", default=None,
                      help="apply summer correction before modelling (default)")
    corr.add_argument("--no-correct", dest="correct", action="store_false")
    corr.add_argument("--m0", type=int)
    corr.add_argument("--n-corrupt-years", dest="n_corrupt_years", type=int)
    corr.add_argument("--correction-init", dest="correction_init", type=_correction_init,
                      help="'constant' (10 per cell), 'clean_mean' or a number")

    tune = argparse.ArgumentParser(add_help=False)
    tune.add_argument("--wy", dest="wy_values", type=_int_list, help="W_y grid, e.g. 2-8")
    tune.add_argument("--wm", dest="wm_values", type=_int_list, help="W_m grid, e.g. 2-6")
    tune.add_argument("--buffer", type=int)
    tune.add_argument("--grouping", choices=pipeline.GROUPING_MODES)
    tune.add_argument("--group-threshold", dest="group_threshold", type=float)

    horizon = argparse.ArgumentParser(add_help=False)
    horizon.add_argument("--horizon", type=int)

    bench = argparse.ArgumentParser(add_help=False)
    bench.add_argument("--models", type=lambda s: [m for m in s.split(",") if m])
    bench.add_argument("--sarima-order", dest="sarima_order", type=_order)
    bench.add_argument("--sarima-seasonal-order", dest="sarima_seasonal_order", type=_order)
    bench.add_argument("--sarima-drift", dest="sarima_drift", action="store_true", default=None)
    bench.add_argument("--no-sarima-drift", dest="sarima_drift", action="store_false")
    bench.add_argument("--log-transform", dest="log_transform", action="store_true", default=None)
    bench.add_argument("--no-log-transform", dest="log_transform", action="store_false")
    bench.add_argument("--smooth-outliers", dest="smooth_outliers", action="store_true", default=None)
    bench.add_argument("--after-warmup", dest="after_warmup", type=int)

    forecasts = argparse.ArgumentParser(add_help=False)
    forecasts.add_argument("--actuals", help="CSV with header date,demand")
    forecasts.add_argument("--forecast", dest="forecast_files", action="append", type=_named_path,
                           metavar="NAME=PATH", help="forecast CSV (date,forecast); repeatable")

    p = argparse.ArgumentParser(prog="jitlgpr", description="Monthly gas demand forecasting "
                                "with just-in-time local Gaussian process regression.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic truth/observed pair")
    s.add_argument("--seed", type=int)
    s.add_argument("--n-years", dest="n_years", type=int)
    s.add_argument("--extra-months", dest="extra_months", type=int)
    s.add_argument("--anchor-year", dest="anchor_year", type=int)
    s.add_argument("--m0", type=int)
    s.add_argument("--n-corrupt-years", dest="n_corrupt_years", type=int)

    sub.add_parser("correct", parents=[common, data, corr], help="correct summer readings")
    sub.add_parser("tune", parents=[common, data, corr, tune], help="tune JITL window sizes")
    f = sub.add_parser("forecast", parents=[common, data, corr, tune, horizon],
                       help="JITL-GP forecast")
    f.add_argument("--windows", type=_windows, help="skip tuning: one WyxWm per group, e.g. 4x3,3x2,5x4")
    sub.add_parser("benchmark", parents=[common, data, corr, horizon, bench],
                   help="benchmark forecasts and their AFTER combination")
    sub.add_parser("evaluate", parents=[common, forecasts], help="score forecasts against actuals")
    sub.add_parser("report", parents=[common, data, corr, forecasts], help="long-format plot data")
    return p


# ---------------------------------------------------------------- commands

def _require_input(cfg: RunConfig) -> MonthlySeries:
    if cfg.input is None:
        raise ConfigError("--input (or config key 'input') is required")
    return ingest_csv(cfg.input)


def _modelling_series(cfg: RunConfig, series: MonthlySeries):
    if not cfg.correct:
        return series, None
    return pipeline.correct_series(series, cfg.m0, cfg.n_corrupt_years, cfg.correction_init)


def _grouping_for(cfg: RunConfig) -> Optional[MonthGrouping]:
    if cfg.windows is None:
        return None
    if cfg.grouping == "standard":
        return MonthGrouping.standard(cfg.windows)
    if cfg.grouping == "single":
        return MonthGrouping.single(WindowPair(*cfg.windows[0]))
    raise ConfigError("fixed windows need grouping 'standard' or 'single'")


def _print_table(header: Sequence[str], rows: Sequence[Sequence], out=sys.stdout) -> str:
    cells = [list(header)] + [[f"{c:.4f}" if isinstance(c, float) else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in cells]
    text = "\n".join(lines) + "\n"
    out.write(text)
    return text


def cmd_synth(cfg: RunConfig, out: Path) -> None:
    sc = synth.SynthConfig(n_years=cfg.n_years, extra_months=cfg.extra_months,
                           start_year=cfg.anchor_year, m0=cfg.m0,
                           n_corrupt_years=cfg.n_corrupt_years,
                           delay_fractions=(0.45,) * (9 - cfg.m0), seed=cfg.seed)
    truth, observed = synth.generate(sc)
    n_train = 12 * cfg.n_years
    write_series_csv(out / "truth.csv", truth)
    write_series_csv(out / "observed.csv", observed)
    write_series_csv(out / "train.csv", observed.head(n_train))
    if cfg.extra_months:
        write_series_csv(out / "test.csv", truth.tail_from(n_train))
    print(f"wrote {len(truth)} months ({format_date(truth.start)}..{format_date(truth.end)}) to {out}")


def cmd_correct(cfg: RunConfig, out: Path) -> None:
    series = _require_input(cfg)
    corrected, res = pipeline.correct_series(series, cfg.m0, cfg.n_corrupt_years, cfg.correction_init)
    write_series_csv(out / "corrected.csv", corrected)
    write_json(out / "correction.json", {
        "m0": cfg.m0,
        "n_corrupt_years": cfg.n_corrupt_years,
        "objective": res.objective_value,
        "objective_trace": res.objective_trace,
        "iterations": res.iterations,
        "converged": res.converged,
        "max_equality_violation": res.max_equality_violation,
        "min_value": res.min_value,
    })
    rows = []
    for k, (d, a, b) in enumerate(zip(series.dates(), series.values, corrected.values)):
        if a != b:
            rows.append((format_date(d), float(a), float(b)))
    _print_table(["date", "observed", "corrected"], rows)
    print(f"objective {res.objective_value:.6f} after {res.iterations} iterations"
          f"{'' if res.converged else ' (not converged)'}")


def _tune(cfg: RunConfig, series: MonthlySeries) -> jitl.TuneReport:
    return pipeline.tune_windows(series, cfg.pipeline_config())


def cmd_tune(cfg: RunConfig, out: Path) -> None:
    series, _ = _modelling_series(cfg, _require_input(cfg))
    report = _tune(cfg, series)
    write_json(out / "tune.json", report.to_dict())
    rows = [("-".join(map(str, g)), w.W_y, w.W_m, float(np.nanmin(s)))
            for g, w, s in zip(report.grouping.groups, report.optima, report.rmse_surface)]
    _print_table(["months", "W_y", "W_m", "rmse"], rows)
    w, r = report.best_single()
    print(f"best single window ({w.W_y}, {w.W_m}) rmse {r:.4f}; grouped rmse {report.grouped_rmse():.4f}")


def cmd_forecast(cfg: RunConfig, out: Path) -> None:
    series, _ = _modelling_series(cfg, _require_input(cfg))
    grouping = _grouping_for(cfg)
    if grouping is None:
        grouping = _tune(cfg, series).grouping
    fc = jitl.forecast_horizon(series, cfg.horizon, grouping)
    write_series_csv(out / "forecast.csv", fc, value_column="forecast")
    write_json(out / "forecast.json", {
        "groups": [list(g) for g in grouping.groups],
        "windows": [[w.W_y, w.W_m] for w in grouping.windows],
        "horizon": cfg.horizon,
        "corrected": cfg.correct,
    })
    _print_table(["date", "forecast"], [(format_date(d), float(v)) for d, v in zip(fc.dates(), fc.values)])


def cmd_benchmark(cfg: RunConfig, out: Path) -> None:
    series, _ = _modelling_series(cfg, _require_input(cfg))
    results = run_benchmarks(series.values, cfg.horizon, cfg.benchmark_config())
    start = series.next_date()
    info = {}
    for name, res in results.items():
        write_series_csv(out / f"benchmark_{name}.csv",
                         MonthlySeries(start, np.maximum(res.forecast, 0.0)), value_column="forecast")
        info[name] = _benchmark_info(res.info)
    write_json(out / "benchmarks.json", {"config": cfg.benchmark_config().__dict__ | {"ets_params": None},
                                         "models": info})
    names = list(results)
    rows = [[format_date(MonthlySeries(start, [0.0]).date_at(h))] +
            [float(max(results[n].forecast[h], 0.0)) for n in names] for h in range(cfg.horizon)]
    _print_table(["date"] + names, rows)


def _benchmark_info(info: dict) -> dict:
    out = {}
    for k, v in info.items():
        if hasattr(v, "__dataclass_fields__"):
            out[k] = {f: getattr(v, f) for f in v.__dataclass_fields__}
        else:
            out[k] = v
    return out


def _forecast_files(cfg: RunConfig, out: Path, given) -> list[tuple[str, str]]:
    if given:
        return list(given)
    found = []
    if (out / "forecast.csv").exists():
        found.append(("jitl", str(out / "forecast.csv")))
    for p in sorted(out.glob("benchmark_*.csv")):
        found.append((p.stem[len("benchmark_"):], str(p)))
    if not found:
        raise ConfigError("no forecasts given (--forecast NAME=PATH) and none found in the output dir")
    return found


def cmd_evaluate(cfg: RunConfig, out: Path, forecast_files) -> None:
    if cfg.actuals is None:
        raise ConfigError("--actuals is required")
    actual = ingest_csv(cfg.actuals)
    forecasts = {}
    for name, path in _forecast_files(cfg, out, forecast_files):
        fc = ingest_csv(path, value_column="forecast")
        offset = (fc.start.year - actual.start.year) * 12 + fc.start.month - actual.start.month
        if offset < 0 or offset >= len(actual):
            raise DataError(f"forecast {name!r} does not overlap the actuals")
        forecasts[name] = fc
    reports = {}
    for name, fc in forecasts.items():
        offset = (fc.start.year - actual.start.year) * 12 + fc.start.month - actual.start.month
        window = actual.tail_from(offset).head(len(fc))
        reports.update(pipeline.evaluate_forecasts(window, {name: fc.head(len(window))}))
    header = ["model", "rmse", "mae", "mape", "yearly_pe", "n"]
    rows = [[n, r.rmse, r.mae, r.mape, r.yearly_pe if r.yearly_pe is not None else float("nan"), r.n]
            for n, r in reports.items()]
    write_table_csv(out / "evaluation.csv", header, rows)
    write_json(out / "evaluation.json", {n: r.to_dict() for n, r in reports.items()})
    text = _print_table(header, rows)
    atomic_write_text(out / "evaluation.txt", text)


def cmd_report(cfg: RunConfig, out: Path, forecast_files) -> None:
    series = _require_input(cfg)
    rows = [("observed", format_date(d), float(v)) for d, v in zip(series.dates(), series.values)]
    modelling, _ = _modelling_series(cfg, series)
    if cfg.correct:
        rows += [("corrected", format_date(d), float(v)) for d, v in zip(modelling.dates(), modelling.values)]
    dec = stl_decompose(modelling.values)
    for comp in ("trend", "seasonal", "remainder"):
        rows += [(f"stl_{comp}", format_date(d), float(v))
                 for d, v in zip(modelling.dates(), getattr(dec, comp))]
    actual = ingest_csv(cfg.actuals) if cfg.actuals else None
    if actual is not None:
        rows += [("actual", format_date(d), float(v)) for d, v in zip(actual.dates(), actual.values)]
    lookup = dict(zip(actual.dates(), actual.values)) if actual is not None else {}
    files = list(forecast_files or [])
    if not files and ((out / "forecast.csv").exists() or list(out.glob("benchmark_*.csv"))):
        files = _forecast_files(cfg, out, None)
    for name, path in files:
        fc = ingest_csv(path, value_column="forecast")
        rows += [(f"forecast_{name}", format_date(d), float(v)) for d, v in zip(fc.dates(), fc.values)]
        rows += [(f"residual_{name}", format_date(d), float(lookup[d] - v))
                 for d, v in zip(fc.dates(), fc.values) if d in lookup]
    write_table_csv(out / "plot_data.csv", ["series", "date", "value"], rows)
    counts = {}
    for s, _, _ in rows:
        counts[s] = counts.get(s, 0) + 1
    _print_table(["series", "points"], list(counts.items()))


# -------------------------------------------------------------------- main

_CONFIG_KEYS = {f for f in RunConfig.__dataclass_fields__}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS}
    try:
        cfg = RunConfig.load(args.config, overrides)
        out = Path(cfg.output_dir)
        handlers = {
            "synth": lambda: cmd_synth(cfg, out),
            "correct": lambda: cmd_correct(cfg, out),
            "tune": lambda: cmd_tune(cfg, out),
            "forecast": lambda: cmd_forecast(cfg, out),
            "benchmark": lambda: cmd_benchmark(cfg, out),
            "evaluate": lambda: cmd_evaluate(cfg, out, args.forecast_files),
            "report": lambda: cmd_report(cfg, out, args.forecast_files),
        }
        handlers[args.command]()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (JitlGprError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
