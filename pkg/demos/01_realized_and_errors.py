"""From monthly indices to a horizon-indexed forecast-error panel.

Builds a synthetic dataset in memory, aggregates monthly CPI into
half-year inflation, and lines forecasts up against outcomes by horizon.
"""

import numpy as np

from fcbias import (HalfYear, YearMonth, classify_horizon, compute_errors, horizon_slice,
                    parse_forecast_csv, parse_monthly_csv, semiannual_cpi_inflation)
from fcbias.synthetic import generate_dataset

ds = generate_dataset(seed=0)
cpi = parse_monthly_csv(ds.monthly_csv.encode())["CPI"]
forecasts = parse_forecast_csv(ds.forecasts_csv.encode())["CPI"]

# horizons count whole quarters to the last month of the target half-year
print("h(2021-11 -> 2021H2) =", classify_horizon(YearMonth(2021, 11), HalfYear(2021, 2)))
print("h(2021-08 -> 2021H2) =", classify_horizon(YearMonth(2021, 8), HalfYear(2021, 2)))
print("h(2021-08 -> 2022H1) =", classify_horizon(YearMonth(2021, 8), HalfYear(2022, 1)))

# realized half-year inflation: ratio of summed indices, rounded to one decimal
realized = semiannual_cpi_inflation(cpi)
for p in (HalfYear(2019, 1), HalfYear(2019, 2), HalfYear(2020, 1)):
    print(p, realized.values[p])

errors = compute_errors(forecasts, realized)
for h in range(0, 4):
    sl = [x for x in horizon_slice(errors, h) if x.period >= HalfYear(2012, 1)]
    e = np.array([x.error for x in sl], dtype=float)
    print(f"h={h}: n={e.size:2d}  mean error={e.mean():+.3f}  rmse={np.sqrt(np.mean(e**2)):.3f}")
