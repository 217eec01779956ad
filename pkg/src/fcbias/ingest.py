"""CSV parsing, realized-value construction and the inflation-target schedule.

Realized half-year values are built from monthly or quarterly source data
and rounded to one decimal, the precision at which forecasts are published.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .calendar_panel import (ForecastCell, ForecastPanel, HalfYear, Quarter,
                             RealizedSeries, YearMonth, classify_horizon, round1)
from .exceptions import (DuplicateCell, MissingMonths, MissingQuarters,
                         NonPositiveLabor, OutOfRange, SchemaError)

FORECAST_COLUMNS = ("variable", "publication_year", "publication_month",
                    "target_year", "target_half", "value")
MONTHLY_COLUMNS = ("series", "year", "month", "value")
QUARTERLY_COLUMNS = ("series", "year", "quarter", "value")
TARGET_COLUMNS = ("from_year", "from_month", "to_year", "to_month",
                  "lower", "upper", "midpoint", "basis")


@dataclass(frozen=True)
class MonthlySeries:
    values: Mapping[YearMonth, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def scaled(self, c: float) -> "MonthlySeries":
        return MonthlySeries({k: v * c for k, v in self.values.items()})

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class QuarterlySeries:
    values: Mapping[Quarter, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class TargetEpisode:
    start: YearMonth
    end: YearMonth
    midpoint: float
    lower: float
    upper: float
    basis: str = "headline"

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"episode ends ({self.end}) before it starts ({self.start})")
        if not self.lower <= self.midpoint <= self.upper:
            raise ValueError(
                f"target bounds out of order: {self.lower} <= {self.midpoint} <= {self.upper}")
        if self.basis not in ("headline", "core"):
            raise ValueError(f"basis must be 'headline' or 'core', got {self.basis!r}")

    def contains(self, month: YearMonth) -> bool:
        return self.start <= month <= self.end


@dataclass(frozen=True)
class TargetSchedule:
    """Time-varying inflation target; the midpoint is used as the threshold."""

    episodes: tuple[TargetEpisode, ...]

    def __post_init__(self):
        eps = tuple(sorted(self.episodes, key=lambda e: e.start))
        for a, b in zip(eps, eps[1:]):
            if b.start <= a.end:
                raise ValueError(f"overlapping target episodes at {b.start}")
        object.__setattr__(self, "episodes", eps)

    def episode_at(self, month: YearMonth) -> TargetEpisode | None:
        for ep in self.episodes:
            if ep.contains(month):
                return ep
        return None

    def target_at(self, month: YearMonth) -> float | None:
        ep = self.episode_at(month)
        return None if ep is None else ep.midpoint


# ---------------------------------------------------------------- aggregation

def _windows_complete(values, keys) -> bool:
    return all(k in values for k in keys)


def _periods_or_default(periods, candidates, needed):
    # explicit periods must be computable; by default keep only computable ones
    if periods is not None:
        return list(periods), True
    return [t for t in candidates if needed(t)], False


def _candidate_half_years(months: Iterable[YearMonth]) -> list[HalfYear]:
    return sorted({m.half_year for m in months})


def semiannual_cpi_inflation(cpi: MonthlySeries, periods: Iterable[HalfYear] | None = None,
                             variable: str = "CPI") -> RealizedSeries:
    """Half-year YoY inflation as the ratio of summed monthly indices.

    ``pi_t = (sum_{M_t} CPI / sum_{M_{t-2}} CPI - 1) * 100``, rounded to one
    decimal. Without ``periods`` every computable half-year is returned;
    with ``periods`` a missing month raises :class:`MissingMonths`.
    """
    vals = cpi.values

    def needed(t: HalfYear):
        return _windows_complete(vals, t.months + (t - 2).months)

    todo, _ = _periods_or_default(periods, _candidate_half_years(vals), needed)
    out = {}
    for t in todo:
        months = t.months + (t - 2).months
        missing = [m for m in months if m not in vals]
        if missing:
            raise MissingMonths(missing)
        cur = sum(vals[m] for m in t.months)
        prev = sum(vals[m] for m in (t - 2).months)
        out[t] = round1((cur / prev - 1.0) * 100.0)
    return RealizedSeries(variable, out)


def semiannual_unemployment(unemp: MonthlySeries, labor: MonthlySeries,
                            periods: Iterable[HalfYear] | None = None,
                            variable: str = "UNRATE") -> RealizedSeries:
    """Half-year unemployment rate ``sum unemp / sum labor * 100``, rounded."""
    u, lab = unemp.values, labor.values

    def needed(t: HalfYear):
        return _windows_complete(u, t.months) and _windows_complete(lab, t.months)

    todo, _ = _periods_or_default(periods, _candidate_half_years(u), needed)
    out = {}
    for t in todo:
        missing = sorted({m for m in t.months if m not in u or m not in lab})
        if missing:
            raise MissingMonths(missing)
        denom = sum(lab[m] for m in t.months)
        if denom <= 0:
            raise NonPositiveLabor(f"labor force sums to {denom} in {t}")
        out[t] = round1(sum(u[m] for m in t.months) / denom * 100.0)
    return RealizedSeries(variable, out)


def semiannual_gdp_growth(gdp: QuarterlySeries, periods: Iterable[HalfYear] | None = None,
                          variable: str = "GDP") -> RealizedSeries:
    """YoY growth of half-year real GDP (sum of the two quarters), rounded."""
    vals = gdp.values

    def needed(t: HalfYear):
        return _windows_complete(vals, t.quarters + (t - 2).quarters)

    candidates = sorted({HalfYear(q.year, 1 if q.quarter <= 2 else 2) for q in vals})
    todo, _ = _periods_or_default(periods, candidates, needed)
    out = {}
    for t in todo:
        missing = [q for q in t.quarters + (t - 2).quarters if q not in vals]
        if missing:
            raise MissingQuarters(missing)
        cur = sum(vals[q] for q in t.quarters)
        prev = sum(vals[q] for q in (t - 2).quarters)
        out[t] = round1((cur / prev - 1.0) * 100.0)
    return RealizedSeries(variable, out)


def quarterly_yoy_inflation(cpi: MonthlySeries,
                            quarters: Iterable[Quarter] | None = None) -> QuarterlySeries:
    """Quarterly YoY inflation from 3-month index sums, unrounded."""
    vals = cpi.values

    def needed(q: Quarter):
        return _windows_complete(vals, q.months + (q - 4).months)

    candidates = sorted({m.quarter for m in vals})
    todo, _ = _periods_or_default(quarters, candidates, needed)
    out = {}
    for q in todo:
        missing = [m for m in q.months + (q - 4).months if m not in vals]
        if missing:
            raise MissingMonths(missing)
        cur = sum(vals[m] for m in q.months)
        prev = sum(vals[m] for m in (q - 4).months)
        out[q] = (cur / prev - 1.0) * 100.0
    return QuarterlySeries(out)


# -------------------------------------------------------------------- parsing

def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return data.decode("utf-8-sig")
    if isinstance(data, Path):
        return data.read_text(encoding="utf-8-sig")
    return data


def _rows(data, columns: tuple[str, ...], source: str | None):
    reader = csv.DictReader(io.StringIO(_text(data)))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(f"missing columns {missing}", row=1, source=source)
    reader.fieldnames = header
    # row numbers count the header as row 1
    for i, row in enumerate(reader, start=2):
        yield i, {k: (v or "").strip() for k, v in row.items() if k is not None}


def _int(row, col, i, source, lo=None, hi=None) -> int:
    raw = row[col]
    try:
        v = int(raw)
    except ValueError:
        raise SchemaError(f"expected an integer, got {raw!r}", row=i, column=col,
                          source=source) from None
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise SchemaError(f"{v} outside {lo}..{hi}", row=i, column=col, source=source)
    return v


def _decimal(row, col, i, source) -> Decimal | None:
    raw = row[col]
    if raw == "":
        return None
    try:
        d = Decimal(raw)
    except InvalidOperation:
        raise SchemaError(f"expected a number, got {raw!r}", row=i, column=col,
                          source=source) from None
    if not d.is_finite():
        raise SchemaError(f"non-finite number {raw!r}", row=i, column=col, source=source)
    return d


def parse_forecast_csv(data, source: str | None = None) -> dict[str, ForecastPanel]:
    """Parse ``forecasts.csv`` into one panel per variable.

    Horizons are derived from the publication month; blank values are
    skipped. Values must carry at most one decimal place.
    """
    cells: dict[str, dict] = {}
    for i, row in _rows(data, FORECAST_COLUMNS, source):
        var = row["variable"]
        if not var:
            raise SchemaError("empty variable", row=i, column="variable", source=source)
        pub = YearMonth(_int(row, "publication_year", i, source),
                        _int(row, "publication_month", i, source, 1, 12))
        half_raw = row["target_half"].upper().lstrip("H")
        if half_raw not in ("1", "2"):
            raise SchemaError(f"target_half must be 1 or 2, got {row['target_half']!r}",
                              row=i, column="target_half", source=source)
        target = HalfYear(_int(row, "target_year", i, source), int(half_raw))
        value = _decimal(row, "value", i, source)
        if value is None:
            continue
        if value != value.quantize(Decimal("0.1")):
            raise SchemaError(f"forecast {row['value']!r} has more than one decimal place",
                              row=i, column="value", source=source)
        try:
            h = classify_horizon(pub, target)
        except OutOfRange as exc:
            raise OutOfRange(f"{source + ', ' if source else ''}row {i}: {exc}") from None
        panel = cells.setdefault(var, {})
        if (target, h) in panel:
            raise DuplicateCell(f"duplicate forecast for {var} {target} h={h}",
                                row=i, source=source)
        panel[(target, h)] = ForecastCell(float(value), pub)
    return {v: ForecastPanel(v, c) for v, c in sorted(cells.items())}


def parse_monthly_csv(data, source: str | None = None) -> dict[str, MonthlySeries]:
    out: dict[str, dict] = {}
    for i, row in _rows(data, MONTHLY_COLUMNS, source):
        ym = YearMonth(_int(row, "year", i, source), _int(row, "month", i, source, 1, 12))
        value = _decimal(row, "value", i, source)
        series = out.setdefault(row["series"], {})
        if ym in series:
            raise DuplicateCell(f"duplicate {row['series']} {ym}", row=i, source=source)
        if value is not None:
            series[ym] = float(value)
    return {k: MonthlySeries(v) for k, v in sorted(out.items())}


def parse_quarterly_csv(data, source: str | None = None) -> dict[str, QuarterlySeries]:
    out: dict[str, dict] = {}
    for i, row in _rows(data, QUARTERLY_COLUMNS, source):
        q = Quarter(_int(row, "year", i, source), _int(row, "quarter", i, source, 1, 4))
        value = _decimal(row, "value", i, source)
        series = out.setdefault(row["series"], {})
        if q in series:
            raise DuplicateCell(f"duplicate {row['series']} {q}", row=i, source=source)
        if value is not None:
            series[q] = float(value)
    return {k: QuarterlySeries(v) for k, v in sorted(out.items())}


def parse_target_schedule(data, source: str | None = None) -> TargetSchedule:
    episodes = []
    for i, row in _rows(data, TARGET_COLUMNS, source):
        start = YearMonth(_int(row, "from_year", i, source),
                          _int(row, "from_month", i, source, 1, 12))
        end = YearMonth(_int(row, "to_year", i, source),
                        _int(row, "to_month", i, source, 1, 12))
        nums = {}
        for col in ("lower", "upper", "midpoint"):
            d = _decimal(row, col, i, source)
            if d is None:
                raise SchemaError("value required", row=i, column=col, source=source)
            nums[col] = float(d)
        try:
            episodes.append(TargetEpisode(start, end, nums["midpoint"], nums["lower"],
                                          nums["upper"], row["basis"].lower() or "headline"))
        except ValueError as exc:
            raise SchemaError(str(exc), row=i, source=source) from None
    try:
        return TargetSchedule(tuple(episodes))
    except ValueError as exc:
        raise SchemaError(str(exc), source=source) from None


def bok_target_schedule() -> TargetSchedule:
    """Bundled Bank of Korea inflation-target history, 1998 onward."""
    text = resources.files("fcbias").joinpath("data/bok_targets.csv").read_text("utf-8")
    return parse_target_schedule(text, source="bok_targets.csv")


# -------------------------------------------------------------- serialization

def _fmt(x: float) -> str:
    return repr(float(x))


def format_forecast_csv(panels: Mapping[str, ForecastPanel] | Iterable[ForecastPanel]) -> str:
    """Inverse of :func:`parse_forecast_csv`; rows ordered by variable, target, horizon."""
    if isinstance(panels, Mapping):
        panels = panels.values()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FORECAST_COLUMNS)
    for p in sorted(panels, key=lambda p: p.variable):
        for (t, h) in sorted(p.cells):
            c = p.cells[(t, h)]
            w.writerow([p.variable, c.published.year, c.published.month, t.year, t.half,
                        _fmt(c.value)])
    return buf.getvalue()


def format_monthly_csv(series: Mapping[str, MonthlySeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MONTHLY_COLUMNS)
    for name in sorted(series):
        for ym in sorted(series[name].values):
            w.writerow([name, ym.year, ym.month, _fmt(series[name].values[ym])])
    return buf.getvalue()


def format_quarterly_csv(series: Mapping[str, QuarterlySeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(QUARTERLY_COLUMNS)
    for name in sorted(series):
        for q in sorted(series[name].values):
            w.writerow([name, q.year, q.quarter, _fmt(series[name].values[q])])
    return buf.getvalue()


def format_target_schedule(schedule: TargetSchedule) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TARGET_COLUMNS)
    for ep in schedule.episodes:
        w.writerow([ep.start.year, ep.start.month, ep.end.year, ep.end.month,
                    _fmt(ep.lower), _fmt(ep.upper), _fmt(ep.midpoint), ep.basis])
    return buf.getvalue()
