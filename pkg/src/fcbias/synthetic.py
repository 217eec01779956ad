"""Synthetic datasets in the CSV input schemas.

The generated forecasts mimic the structure of a central bank's semiannual
outlook: issues at fixed months, horizons 0..5 (and -1 for GDP), sparse
issues before 2012, persistent forecast errors, and for CPI a bias toward
the inflation target that flips sign with the state of the economy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calendar_panel import HalfYear, Quarter, YearMonth, classify_horizon, round1
from .bias_tests import origin_quarter
from .ingest import (MonthlySeries, QuarterlySeries, bok_target_schedule,
                     format_monthly_csv, format_quarterly_csv, format_target_schedule,
                     quarterly_yoy_inflation, semiannual_cpi_inflation,
                     semiannual_gdp_growth, semiannual_unemployment)


@dataclass(frozen=True)
class SyntheticDataset:
    forecasts_csv: str
    monthly_csv: str
    quarterly_csv: str
    targets_csv: str

    def files(self) -> dict[str, str]:
        return {"forecasts.csv": self.forecasts_csv, "monthly.csv": self.monthly_csv,
                "quarterly.csv": self.quarterly_csv, "targets.csv": self.targets_csv}


def issue_months(year: int) -> tuple[int, ...]:
    if year < 2012:
        return (7, 12)
    if year < 2020:
        return (1, 4, 7, 10)
    return (2, 5, 8, 11)


def ar1_errors(n: int, rho: float, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Stationary AR(1) path ``e_s = rho e_{s-1} + eta_s`` with unit-variance shocks."""
    eta = rng.standard_normal(n) * scale
    e = np.empty(n)
    e[0] = eta[0] / np.sqrt(max(1.0 - rho**2, 1e-12))
    for s in range(1, n):
        e[s] = rho * e[s - 1] + eta[s]
    return e


def _monthly_cpi(rng, first: YearMonth, last: YearMonth) -> dict[YearMonth, float]:
    n = last - first + 1
    mu = 0.025 / 12
    g = np.empty(n)
    g[0] = mu
    for i in range(1, n):
        g[i] = mu + 0.85 * (g[i - 1] - mu) + rng.normal(0, 0.0012)
    level = 60.0 * np.exp(np.cumsum(g))
    return {first + i: round(float(level[i]), 3) for i in range(n)}


def generate_dataset(seed: int, last: YearMonth = YearMonth(2024, 6),
                     sd_bias: float = 0.3, rho: float = 0.5) -> SyntheticDataset:
    rng = np.random.default_rng(seed)
    first = YearMonth(1997, 1)
    cpi = _monthly_cpi(rng, first, last)

    labor, unemp = {}, {}
    m = YearMonth(2004, 1)
    while m <= last:
        lab = 23000.0 + 20.0 * (m - YearMonth(2004, 1)) + rng.normal(0, 40)
        rate = 0.035 + (0.006 if m.month <= 3 else 0.0) + rng.normal(0, 0.002)
        labor[m] = round(lab, 1)
        unemp[m] = round(lab * rate, 1)
        m = m + 1

    gdp = {}
    q = Quarter(1997, 1)
    lvl = 100.0
    while q <= last.quarter:
        lvl *= np.exp(0.0075 + rng.normal(0, 0.006))
        gdp[q] = round(lvl * (1.0 + 0.03 * (q.quarter - 2.5)), 2)
        q = q + 1

    cpi_s = MonthlySeries(cpi)
    realized = {
        "CPI": semiannual_cpi_inflation(cpi_s),
        "UNRATE": semiannual_unemployment(MonthlySeries(unemp), MonthlySeries(labor)),
        "GDP": semiannual_gdp_growth(QuarterlySeries(gdp)),
    }
    qinfl = quarterly_yoy_inflation(cpi_s).values
    targets = bok_target_schedule()

    rows = []
    periods = [HalfYear.from_ordinal(k) for k in range(HalfYear(1999, 1).ordinal,
                                                      HalfYear(2026, 2).ordinal + 1)]
    for var, scale in (("CPI", 0.25), ("GDP", 0.5), ("UNRATE", 0.1)):
        series = realized[var]
        paths = {h: ar1_errors(len(periods), rho, rng, scale * (1 + 0.4 * max(h, 0)))
                 for h in range(-1, 7)}
        for year in range(1999, last.year + 1):
            for month in issue_months(year):
                pub = YearMonth(year, month)
                if pub > last or (year == 1999 and month < 7):
                    continue
                if var == "UNRATE" and pub < YearMonth(2004, 12):
                    continue
                for k, t in enumerate(periods):
                    if t.end_month < pub - 3:
                        continue
                    try:
                        h = classify_horizon(pub, t)
                    except ValueError:
                        continue
                    if h > 5 or (h < 0 and var != "GDP"):
                        continue
                    y = series.values.get(t)
                    err = paths[h][k]
                    if var == "CPI":
                        oq = origin_quarter(t, h)
                        pi, tgt = qinfl.get(oq), targets.target_at(oq.mid_month)
                        if pi is not None and tgt is not None:
                            err += -sd_bias if pi <= tgt else sd_bias
                    base = y if y is not None else 2.5
                    rows.append((var, pub.year, pub.month, t.year, t.half,
                                 round1(base - err)))
    lines = ["variable,publication_year,publication_month,target_year,target_half,value"]
    lines += [f"{v},{py},{pm},{ty},{th},{val!r}" for v, py, pm, ty, th, val in sorted(rows)]
    monthly = {"CPI": cpi_s, "UNEMP": MonthlySeries(unemp), "LABOR": MonthlySeries(labor)}
    return SyntheticDataset("\n".join(lines) + "\n", format_monthly_csv(monthly),
                            format_quarterly_csv({"GDP": QuarterlySeries(gdp)}),
                            format_target_schedule(targets))
