"""Evaluation of institutional point forecasts against realized data.

Forecast-error panels indexed by half-year and quarterly horizon,
Holden-Peel and Mincer-Zarnowitz unbiasedness tests (plain and
state-dependent) with Newey-West HAC inference, and recursive
out-of-sample backtests of bias-correction strategies.
"""

from .backtest import (BacktestReport, CorrectionOutput, StrategyConfig, StrategyFit,
                       ar1_correct, me_correct, me_validation_scores, run_backtest,
                       sd_ar1_correct, sd_me_correct, select_me_window, subperiod_summary)
from .bias_tests import (StateDummy, TestReport, holden_peel, make_state_dummy,
                         mincer_zarnowitz, run_bias_tests, sd_holden_peel,
                         sd_mincer_zarnowitz, subsample_mz)
from .calendar_panel import (ErrorPanel, ForecastPanel, HalfYear, Quarter, RealizedSeries,
                             YearMonth, classify_horizon, compute_errors, horizon_slice)
from .distributions import chi2_sf, norm_cdf
from .econometrics import (HypothesisReport, RegressionResult, nw_auto_bandwidth,
                           nw_hac_cov, ols, t_test, wald_test)
from .ingest import (MonthlySeries, QuarterlySeries, TargetSchedule, bok_target_schedule,
                     parse_forecast_csv, parse_monthly_csv, parse_quarterly_csv,
                     parse_target_schedule, quarterly_yoy_inflation,
                     semiannual_cpi_inflation, semiannual_gdp_growth,
                     semiannual_unemployment)

__version__ = "0.1.0"
