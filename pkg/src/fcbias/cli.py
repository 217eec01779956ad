"""Command-line entry point.

::

    fcbias ingest    --config run.yaml [--out DIR]
    fcbias test-bias --config run.yaml [--out DIR]
    fcbias backtest  --config run.yaml [--out DIR]
    fcbias all       --config run.yaml [--out DIR]
    fcbias synth     --seed 7 --out DIR

Every table is written as CSV with a header row plus a JSON mirror.
Exit codes: 0 success, 1 config or schema error, 2 numerical failure in
at least one requested slice.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from .backtest import KINDS, STATE_KINDS, StrategyConfig, run_backtest, subperiod_summary
from .bias_tests import (STATE_TESTS, TEST_NAMES, TestOutcome, make_state_dummy,
                         origin_quarter, run_bias_tests)
from .calendar_panel import (MAX_HORIZON, MIN_HORIZON, ErrorPanel, ForecastPanel, HalfYear,
                             RealizedSeries, compute_errors)
from .exceptions import ConfigError, DataError, InsufficientData, NumericalError
from .ingest import (QuarterlySeries, TargetSchedule, bok_target_schedule, parse_forecast_csv,
                     parse_monthly_csv, parse_quarterly_csv, parse_target_schedule,
                     quarterly_yoy_inflation, semiannual_cpi_inflation,
                     semiannual_gdp_growth, semiannual_unemployment)

VARIABLES = ("CPI", "GDP", "UNRATE")

DEFAULTS: dict[str, Any] = {
    "forecasts": None,
    "monthly": None,
    "quarterly": None,
    "targets": None,
    "cpi_series": "CPI",
    "unemployment_series": "UNEMP",
    "labor_series": "LABOR",
    "gdp_series": "GDP",
    "variables": list(VARIABLES),
    "horizons": [-1, 0, 1, 2, 3, 4],
    "tests": list(TEST_NAMES),
    "strategies": ["AR1", "ME", "SD_AR1", "SD_ME"],
    "backtest_variable": "CPI",
    "backtest_horizons": [0, 1, 2, 3],
    "window_candidates": "1..50",
    "training_start": "1999H2",
    "test_start": "2012H1",
    "report_start": "2015H1",
    "evaluation_end": None,
    "subperiods": ["2016H1..2019H2", "2020H1..2024H1"],
    "hac_bandwidth": "auto",
    "out": "out",
}


@dataclass
class RunConfig:
    forecasts: Path
    monthly: Path | None
    quarterly: Path | None
    targets: Path | str | None
    cpi_series: str
    unemployment_series: str
    labor_series: str
    gdp_series: str
    variables: list[str]
    horizons: list[int]
    tests: list[str]
    strategies: list[str]
    backtest_variable: str
    backtest_horizons: list[int]
    window_candidates: tuple[int, ...]
    training_start: HalfYear
    test_start: HalfYear
    report_start: HalfYear
    evaluation_end: HalfYear | None
    subperiods: list[tuple[HalfYear, HalfYear]]
    hac_bandwidth: int | str
    out: Path
    extra: dict = field(default_factory=dict)


def _int_list(value, key: str, lo: int | None = None, hi: int | None = None) -> list[int]:
    if isinstance(value, str):
        value = _range_spec(value, key)
    if isinstance(value, int):
        value = [value]
    try:
        out = [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a list of integers, got {value!r}") from None
    for v in out:
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ConfigError(f"{key}: {v} outside {lo}..{hi}")
    return out


def _range_spec(text: str, key: str) -> list[int]:
    parts = text.split("..")
    try:
        if len(parts) == 2:
            return list(range(int(parts[0]), int(parts[1]) + 1))
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: cannot read integer range {text!r}") from None


def _half(value, key: str) -> HalfYear:
    try:
        return HalfYear.parse(str(value))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def load_config(path: str | Path, out: str | Path | None = None) -> RunConfig:
    """Read a flat YAML key/value file; relative paths resolve against its folder."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected key/value pairs at top level")
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    cfg = {**DEFAULTS, **raw}
    base = path.parent

    def p(key) -> Path | None:
        v = cfg[key]
        return None if v in (None, "") else (base / str(v))

    variables = [str(v).upper() for v in cfg["variables"]]
    bad = [v for v in variables if v not in VARIABLES]
    if bad:
        raise ConfigError(f"variables: unknown {bad}; expected a subset of {list(VARIABLES)}")
    strategies = [str(s).upper() for s in cfg["strategies"]]
    if any(s not in KINDS for s in strategies):
        raise ConfigError(f"strategies: expected a subset of {list(KINDS)}, got {strategies}")
    tests = [str(t).upper() for t in cfg["tests"]]
    if any(t not in TEST_NAMES for t in tests):
        raise ConfigError(f"tests: expected a subset of {list(TEST_NAMES)}, got {tests}")
    bw = cfg["hac_bandwidth"]
    if not (bw == "auto" or (isinstance(bw, int) and bw >= 0)):
        raise ConfigError(f"hac_bandwidth: expected 'auto' or a non-negative integer, got {bw!r}")
    subperiods = []
    for item in cfg["subperiods"] or []:
        if isinstance(item, str):
            bits = item.split("..")
        else:
            bits = list(item)
        if len(bits) != 2:
            raise ConfigError(f"subperiods: expected 'START..END', got {item!r}")
        subperiods.append((_half(bits[0], "subperiods"), _half(bits[1], "subperiods")))
    targets = cfg["targets"]
    if targets not in (None, "", "bundled"):
        targets = base / str(targets)
    windows = tuple(_int_list(cfg["window_candidates"], "window_candidates", lo=1))
    if not windows:
        raise ConfigError("window_candidates: empty")
    if cfg["forecasts"] in (None, ""):
        raise ConfigError("forecasts: path required")

    rc = RunConfig(
        forecasts=p("forecasts"), monthly=p("monthly"), quarterly=p("quarterly"),
        targets=targets or None,
        cpi_series=str(cfg["cpi_series"]), unemployment_series=str(cfg["unemployment_series"]),
        labor_series=str(cfg["labor_series"]), gdp_series=str(cfg["gdp_series"]),
        variables=variables,
        horizons=_int_list(cfg["horizons"], "horizons", MIN_HORIZON, MAX_HORIZON),
        tests=tests, strategies=strategies,
        backtest_variable=str(cfg["backtest_variable"]).upper(),
        backtest_horizons=_int_list(cfg["backtest_horizons"], "backtest_horizons",
                                    MIN_HORIZON, MAX_HORIZON),
        window_candidates=windows,
        training_start=_half(cfg["training_start"], "training_start"),
        test_start=_half(cfg["test_start"], "test_start"),
        report_start=_half(cfg["report_start"], "report_start"),
        evaluation_end=(None if cfg["evaluation_end"] in (None, "")
                        else _half(cfg["evaluation_end"], "evaluation_end")),
        subperiods=subperiods, hac_bandwidth=bw,
        out=Path(out) if out is not None else base / str(cfg["out"]),
    )
    if not rc.training_start < rc.test_start:
        raise ConfigError("training_start must precede test_start")
    _check_files(rc)
    return rc


def _check_files(rc: RunConfig) -> None:
    need = {"forecasts": rc.forecasts}
    if "CPI" in rc.variables or "UNRATE" in rc.variables:
        need["monthly"] = rc.monthly
    if "GDP" in rc.variables:
        need["quarterly"] = rc.quarterly
    if "CPI" in rc.variables and rc.targets != "bundled":
        need["targets"] = rc.targets
    for key, path in need.items():
        if path is None:
            raise ConfigError(f"{key}: path required for variables {rc.variables}")
        if not Path(path).is_file():
            raise ConfigError(f"{key}: file not found: {path}")


# ------------------------------------------------------------------ building

@dataclass
class Dataset:
    panels: dict[str, ForecastPanel]
    realized: dict[str, RealizedSeries]
    errors: dict[str, ErrorPanel]
    quarterly_inflation: QuarterlySeries | None
    targets: TargetSchedule | None


def _read(path: Path) -> bytes:
    return Path(path).read_bytes()


def build_dataset(rc: RunConfig) -> Dataset:
    panels = parse_forecast_csv(_read(rc.forecasts), source=rc.forecasts.name)
    monthly = (parse_monthly_csv(_read(rc.monthly), source=rc.monthly.name)
               if rc.monthly is not None and Path(rc.monthly).is_file() else {})
    quarterly = (parse_quarterly_csv(_read(rc.quarterly), source=rc.quarterly.name)
                 if rc.quarterly is not None and Path(rc.quarterly).is_file() else {})

    def series(table, name, kind):
        if name not in table:
            raise ConfigError(f"{kind} series {name!r} not found (have {sorted(table)})")
        return table[name]

    realized: dict[str, RealizedSeries] = {}
    qinfl = None
    targets = None
    for var in rc.variables:
        if var == "CPI":
            cpi = series(monthly, rc.cpi_series, "monthly")
            realized[var] = semiannual_cpi_inflation(cpi, variable=var)
            qinfl = quarterly_yoy_inflation(cpi)
            if rc.targets == "bundled":
                targets = bok_target_schedule()
            else:
                targets = parse_target_schedule(_read(rc.targets), source=Path(rc.targets).name)
        elif var == "UNRATE":
            realized[var] = semiannual_unemployment(
                series(monthly, rc.unemployment_series, "monthly"),
                series(monthly, rc.labor_series, "monthly"), variable=var)
        elif var == "GDP":
            realized[var] = semiannual_gdp_growth(series(quarterly, rc.gdp_series, "quarterly"),
                                                  variable=var)
    errors: dict[str, ErrorPanel] = {}
    for var in rc.variables:
        panel = panels.get(var, ForecastPanel(var, {}))
        ep = compute_errors(panel, realized[var])
        if var == "CPI" and qinfl is not None and targets is not None:
            sd = make_state_dummy(qinfl, targets, ep.cells.keys(), strict=False)
            ep = ep.with_states(sd.d)
        errors[var] = ep
    return Dataset({v: panels.get(v, ForecastPanel(v, {})) for v in rc.variables},
                   realized, errors, qinfl, targets)


# ------------------------------------------------------------------- writing

def fmt(x) -> str:
    """Six significant digits; blank for missing or non-finite values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return ""
        s = format(x, ".6g")
        return "0" if s == "-0" else s
    return str(x)


def _json_value(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(out_dir: Path, name: str, header: Sequence[str], rows: list[list]) -> Path:
    """Write ``name.csv`` and its ``name.json`` mirror."""
    cells = [[fmt(v) for v in row] for row in rows]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(cells)
    path = out_dir / f"{name}.csv"
    _atomic_write(path, buf.getvalue())
    records = [{h: _json_value(c) for h, c in zip(header, row)} for row in cells]
    _atomic_write(out_dir / f"{name}.json",
                  json.dumps({"columns": list(header), "rows": records}, indent=1) + "\n")
    return path


# ------------------------------------------------------------------ commands

def cmd_ingest(rc: RunConfig, log=print) -> int:
    ds = build_dataset(rc)
    out = rc.out
    rows = []
    for var in sorted(ds.panels):
        for (t, h) in sorted(ds.panels[var].cells):
            c = ds.panels[var].cells[(t, h)]
            rows.append([var, t.year, t.half, h, c.published.year, c.published.month, c.value])
    write_table(out, "forecasts_normalized",
                ["variable", "target_year", "target_half", "horizon", "publication_year",
                 "publication_month", "value"], rows)
    log(f"forecasts_normalized: {len(rows)} rows")

    rrows = [[var, t.year, t.half, ds.realized[var].values[t]]
             for var in sorted(ds.realized) for t in ds.realized[var].periods()]
    write_table(out, "realized", ["variable", "year", "half", "value"], rrows)
    log(f"realized: {len(rrows)} rows")

    erows, srows = [], []
    for var in sorted(ds.errors):
        ep = ds.errors[var]
        for (t, h) in sorted(ep.cells):
            c = ep.cells[(t, h)]
            st = None if ep.states is None else ep.states.get((t, h))
            erows.append([var, t.year, t.half, h, c.forecast, c.realized, c.error, st])
    write_table(out, "errors",
                ["variable", "target_year", "target_half", "horizon", "forecast", "realized",
                 "error", "state"], erows)
    log(f"errors: {len(erows)} rows")

    if ds.quarterly_inflation is not None:
        qi = ds.quarterly_inflation.values
        write_table(out, "quarterly_inflation", ["year", "quarter", "value"],
                    [[q.year, q.quarter, qi[q]] for q in sorted(qi)])
        log(f"quarterly_inflation: {len(qi)} rows")
        ep = ds.errors["CPI"]
        for (t, h) in sorted(ep.cells):
            q = origin_quarter(t, h)
            st = ep.states.get((t, h)) if ep.states is not None else None
            tgt = ds.targets.target_at(q.mid_month) if ds.targets is not None else None
            srows.append(["CPI", t.year, t.half, h, q.year, q.quarter, qi.get(q), tgt, st])
        write_table(out, "states",
                    ["variable", "target_year", "target_half", "horizon", "origin_year",
                     "origin_quarter", "origin_inflation", "target", "state"], srows)
        log(f"states: {len(srows)} rows")
    return 0


TEST_COLUMNS = ["variable", "horizon", "test", "n", "n_d1", "n_d0",
                "alpha", "alpha_se", "beta", "beta_se", "gamma", "gamma_se",
                "delta", "delta_se", "statistic", "df", "p_value", "significant",
                "t_alpha", "p_alpha_less", "t_delta", "p_delta_greater",
                "p_less", "p_greater", "bandwidth", "flags", "diagnostic"]


def _test_row(o: TestOutcome) -> list:
    row: dict[str, Any] = {c: None for c in TEST_COLUMNS}
    row.update(variable=o.variable, horizon=o.horizon, test=o.test_name,
               diagnostic=o.diagnostic)
    r = o.report
    if r is not None:
        row["n"] = r.n
        if r.n_by_state is not None:
            row["n_d1"], row["n_d0"] = r.n_by_state
        for k, v in r.coefficients.items():
            row[k] = v
            row[f"{k}_se"] = r.std_errors.get(k)
        if r.joint is not None:
            row["statistic"] = r.joint.statistic
            row["df"] = r.joint.df
            row["p_value"] = r.joint.p_value
            row["significant"] = r.joint.p_value < 0.05
        row["bandwidth"] = r.bandwidth
        row["flags"] = ";".join(r.flags)
        if r.one_sided is not None:
            a, b = r.one_sided
            if o.test_name == "HP":
                row["p_less"], row["p_greater"] = a.p_value, b.p_value
            else:
                row["t_alpha"], row["p_alpha_less"] = a.statistic, a.p_value
                row["t_delta"], row["p_delta_greater"] = b.statistic, b.p_value
    return [row[c] for c in TEST_COLUMNS]


def cmd_test_bias(rc: RunConfig, log=print) -> int:
    ds = build_dataset(rc)
    outcomes: list[TestOutcome] = []
    for var in rc.variables:
        tests = [t for t in rc.tests if var == "CPI" or t not in STATE_TESTS]
        horizons = rc.horizons if var == "GDP" else [h for h in rc.horizons if h >= 0]
        outcomes += run_bias_tests(ds.errors[var], horizons, tests, rc.hac_bandwidth)
    write_table(rc.out, "bias_tests", TEST_COLUMNS, [_test_row(o) for o in outcomes])
    failed = 0
    for o in outcomes:
        failed += o.numerical_failure
        if o.report is None or o.report.joint is None:
            log(f"{o.variable:6s} h={o.horizon:>2} {o.test_name:6s} -- {o.diagnostic}")
        else:
            j = o.report.joint
            log(f"{o.variable:6s} h={o.horizon:>2} {o.test_name:6s} N={o.report.n:3d} "
                f"stat={j.statistic:8.3f} p={j.p_value:.3f}")
    return 2 if failed else 0


def cmd_backtest(rc: RunConfig, log=print) -> int:
    ds = build_dataset(rc)
    var = rc.backtest_variable
    if var not in ds.errors:
        raise ConfigError(f"backtest_variable {var!r} is not among variables {rc.variables}")
    ep = ds.errors[var]
    series_rows, window_rows, sub_rows = [], [], {}
    numerical = 0
    for kind in rc.strategies:
        if kind in STATE_KINDS and ep.states is None:
            log(f"{kind}: skipped, {var} has no state dummies")
            continue
        cfg = StrategyConfig(kind, rc.window_candidates, rc.training_start, rc.test_start)
        for h in rc.backtest_horizons:
            try:
                rep = run_backtest(ep, cfg, h, rc.evaluation_end)
            except InsufficientData as exc:
                log(f"{kind} h={h}: skipped ({exc})")
                continue
            except NumericalError as exc:
                log(f"{kind} h={h}: numerical failure ({exc})")
                numerical += 1
                continue
            for o, rm, bm, rr in zip(rep.outputs, rep.rmsfe, rep.base_rmsfe, rep.rrmsfe):
                if o.origin < rc.report_start:
                    continue
                series_rows.append([kind, h, str(o.origin), o.raw, o.realized, o.correction,
                                    o.corrected, rm, bm, rr, o.chosen_window,
                                    o.pass_through, ";".join(o.flags)])
                if kind == "ME":
                    window_rows.append([h, str(o.origin), o.chosen_window])
            for sp in rc.subperiods:
                try:
                    (row,) = subperiod_summary(rep, [sp])
                except InsufficientData:
                    continue
                sub_rows[(h, sp, kind)] = row
            if rep.final_rrmsfe is not None:
                log(f"{kind:6s} h={h}: final RRMSFE {rep.final_rrmsfe:.3f} "
                    f"over {len(rep.outputs)} origins")
    write_table(rc.out, "backtest_series",
                ["strategy", "horizon", "origin", "raw", "realized", "correction",
                 "corrected", "rmsfe", "base_rmsfe", "rrmsfe", "chosen_window",
                 "pass_through", "flags"], series_rows)
    write_table(rc.out, "me_windows", ["horizon", "origin", "chosen_window"], window_rows)

    # one row per horizon; a column block of strategies per subperiod
    header = ["horizon"]
    for a, b in rc.subperiods:
        header += [f"{a}-{b}:{k}" for k in rc.strategies]
    rows = []
    for h in rc.backtest_horizons:
        row: list = [h]
        for sp in rc.subperiods:
            for k in rc.strategies:
                r = sub_rows.get((h, sp, k))
                row.append(None if r is None else r.ratio)
        rows.append(row)
    write_table(rc.out, "subperiods", header, rows)
    long_rows = [[k, h, str(sp[0]), str(sp[1]), r.n, r.rmsfe, r.base_rmsfe, r.ratio]
                 for (h, sp, k), r in sorted(sub_rows.items(),
                                             key=lambda kv: (kv[0][0], kv[0][1],
                                                             rc.strategies.index(kv[0][2])))]
    write_table(rc.out, "subperiods_long",
                ["strategy", "horizon", "start", "end", "n", "rmsfe", "base_rmsfe", "ratio"],
                long_rows)
    return 2 if numerical else 0


def cmd_synth(seed: int, out: Path, log=print) -> int:
    from .synthetic import generate_dataset

    ds = generate_dataset(seed)
    for name, text in ds.files().items():
        _atomic_write(out / name, text)
    _atomic_write(out / "config.yaml", SYNTH_CONFIG)
    log(f"wrote synthetic dataset (seed {seed}) to {out}")
    return 0


SYNTH_CONFIG = """\
forecasts: forecasts.csv
monthly: monthly.csv
quarterly: quarterly.csv
targets: targets.csv
variables: [CPI, GDP, UNRATE]
horizons: [-1, 0, 1, 2, 3, 4]
strategies: [AR1, ME, SD_AR1, SD_ME]
backtest_horizons: [0, 1, 2, 3]
window_candidates: "1..50"
training_start: 1999H2
test_start: 2012H1
report_start: 2015H1
subperiods: ["2016H1..2019H2", "2020H1..2024H1"]
hac_bandwidth: auto
out: out
"""


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fcbias", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("ingest", "normalize inputs and write panel files"),
                        ("test-bias", "run unbiasedness tests"),
                        ("backtest", "run bias-correction backtests"),
                        ("all", "ingest, test-bias and backtest")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML key/value run configuration")
        p.add_argument("--out", help="output directory (overrides the config)")
    p = sub.add_parser("synth", help="write a synthetic dataset and config")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (non-negative)")
    p.add_argument("--out", required=True)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            return cmd_synth(args.seed, Path(args.out))
        rc = load_config(args.config, args.out)
        if args.command == "ingest":
            return cmd_ingest(rc)
        if args.command == "test-bias":
            return cmd_test_bias(rc)
        if args.command == "backtest":
            return cmd_backtest(rc)
        codes = [cmd_ingest(rc), cmd_test_bias(rc), cmd_backtest(rc)]
        return max(codes)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
