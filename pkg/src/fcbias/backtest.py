"""Bias-correction strategies and their recursive out-of-sample evaluation.

At every forecast origin ``t`` a strategy sees forecast errors dated up to
``t - 1`` only, predicts the error ``e_t`` and adds the prediction to the
published forecast. Four strategies are available:

``ME``
    mean of the last ``w`` errors, with ``w`` re-selected at every origin by
    pseudo-out-of-sample validation (rolling window);
``AR1``
    ``e_s = a e_{s-1} + u_s`` without constant (expanding window);
``SD_ME``
    state-wise mean error (expanding window);
``SD_AR1``
    ``e_s = a0 e_{s-1} + a1 d_s e_{s-1} + eps_s`` (expanding window).

``NONE`` always passes the published forecast through and serves as a
sanity baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .calendar_panel import ErrorPanel, HalfYear, half_year_range
from .exceptions import EmptySubperiod, EmptyTestSet

KINDS = ("ME", "AR1", "SD_ME", "SD_AR1", "NONE")
STATE_KINDS = ("SD_ME", "SD_AR1")
DEFAULT_WINDOWS = tuple(range(1, 51))
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    window_candidates: tuple[int, ...] = DEFAULT_WINDOWS
    training_start: HalfYear = HalfYear(1999, 2)
    test_start: HalfYear = HalfYear(2012, 1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {KINDS}")
        w = tuple(sorted(set(int(x) for x in self.window_candidates)))
        if not w or w[0] < 1:
            raise ValueError("window candidates must be a non-empty set of integers >= 1")
        object.__setattr__(self, "window_candidates", w)
        if not self.training_start < self.test_start:
            raise ValueError("training_start must precede test_start")


@dataclass(frozen=True)
class StrategyFit:
    kind: str
    coefficients: dict[str, float | None] | None = None
    chosen_window: int | None = None
    identifiable: bool = True
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class CorrectionOutput:
    origin: HalfYear
    horizon: int
    raw: float
    realized: float
    correction: float
    corrected: float
    pass_through: bool
    chosen_window: int | None = None
    flags: tuple[str, ...] = ()

    @property
    def squared_error(self) -> float:
        return (self.realized - self.corrected) ** 2

    @property
    def base_squared_error(self) -> float:
        return (self.realized - self.raw) ** 2


# ----------------------------------------------------------------- strategies

def _arr(history) -> np.ndarray:
    return np.asarray(list(history), dtype=float)


def me_correct(history: Sequence[float], w: int) -> float | None:
    """Mean of the last ``w`` errors, or ``None`` if any of them is missing."""
    e = _arr(history)
    if w < 1 or e.shape[0] < w:
        return None
    window = e[-w:]
    if np.isnan(window).any():
        return None
    return float(window.mean())


def me_validation_scores(history: Sequence[float], candidates: Iterable[int]) -> dict[int, float]:
    """Validation RMSE of the ME correction for each feasible window.

    Every observed ``e_s`` whose preceding ``w`` errors are all observed is
    corrected by their mean; windows with no such period are omitted.
    """
    e = _arr(history)
    n = e.shape[0]
    scores = {}
    for w in sorted(set(candidates)):
        if w >= n:
            continue
        sq = []
        for s in range(w, n):
            if math.isnan(e[s]):
                continue
            window = e[s - w:s]
            if np.isnan(window).any():
                continue
            sq.append((e[s] - window.mean()) ** 2)
        if sq:
            scores[w] = math.sqrt(sum(sq) / len(sq))
    return scores


def select_me_window(history: Sequence[float], candidates: Iterable[int]) -> int:
    """Window with the smallest validation RMSE; ties go to the smallest ``w``.

    Scores within 1e-12 of the minimum, relative to the larger of that
    minimum and the error scale, count as tied, so that ties which are
    exact in rational arithmetic survive float rounding. Falls back to
    ``w = 1`` when no candidate has a validation period.
    """
    scores = me_validation_scores(history, candidates)
    if not scores:
        return 1
    best = min(scores.values())
    e = _arr(history)
    scale = float(np.nanmax(np.abs(e))) if e.size and not np.isnan(e).all() else 0.0
    tol = TIE_RTOL * max(best, scale, 1e-300)
    return min(w for w, v in scores.items() if v - best <= tol)


def _pairs(e: np.ndarray):
    cur, lag = e[1:], e[:-1]
    ok = ~(np.isnan(cur) | np.isnan(lag))
    return cur, lag, ok


def ar1_correct(history: Sequence[float]) -> tuple[StrategyFit, float | None]:
    """No-constant AR(1) on consecutive error pairs; predicts ``a * e_{t-1}``."""
    e = _arr(history)
    if e.shape[0] < 3:
        return StrategyFit("AR1", None, identifiable=False, flags=("no_consecutive_pairs",)), None
    cur, lag, ok = _pairs(e)
    if ok.sum() < 2:
        return StrategyFit("AR1", None, identifiable=False, flags=("no_consecutive_pairs",)), None
    denom = float(lag[ok] @ lag[ok])
    if denom == 0.0:
        return StrategyFit("AR1", None, identifiable=False, flags=("zero_denominator",)), None
    alpha = float(cur[ok] @ lag[ok]) / denom
    fit = StrategyFit("AR1", {"alpha": alpha})
    if math.isnan(e[-1]):
        return StrategyFit("AR1", {"alpha": alpha}, flags=("last_error_missing",)), None
    return fit, alpha * float(e[-1])


def sd_me_correct(history: Sequence[float], states: Sequence[int | None], current_state: int,
                  w: int | None = None) -> tuple[StrategyFit, float | None]:
    """State-wise mean error over the last ``w`` periods (all of them if ``None``).

    The dummy regression ``e = alpha d + delta (1 - d)`` is solved by the
    two group means. If the current state has no observation the forecast
    is passed through.
    """
    e = _arr(history)
    d = np.array([np.nan if s is None else float(s) for s in states], dtype=float)
    if d.shape[0] != e.shape[0]:
        raise ValueError("history and states differ in length")
    if w is not None:
        e, d = e[-w:], d[-w:]
    ok = ~(np.isnan(e) | np.isnan(d))
    coefs: dict[str, float | None] = {}
    for name, s in (("alpha", 1.0), ("delta", 0.0)):
        sel = ok & (d == s)
        coefs[name] = float(e[sel].mean()) if sel.any() else None
    key = "alpha" if current_state == 1 else "delta"
    if coefs[key] is None:
        return StrategyFit("SD_ME", coefs, w, identifiable=False,
                           flags=("current_state_unseen",)), None
    return StrategyFit("SD_ME", coefs, w), coefs[key]


def sd_ar1_correct(history: Sequence[float], states: Sequence[int | None],
                   current_state: int) -> tuple[StrategyFit, float | None]:
    """State-dependent AR(1): ``e_s = a0 e_{s-1} + a1 d_s e_{s-1}``.

    Needs at least two consecutive pairs in each state; otherwise the pooled
    AR(1) correction is used and the fit is flagged ``fallback_ar1``.
    """
    e = _arr(history)
    d = np.array([np.nan if s is None else float(s) for s in states], dtype=float)
    if d.shape[0] != e.shape[0]:
        raise ValueError("history and states differ in length")

    def fallback(reason: str):
        fit, corr = ar1_correct(e)
        coefs = None if fit.coefficients is None else {"alpha0": fit.coefficients["alpha"],
                                                       "alpha1": None}
        return (StrategyFit("SD_AR1", coefs, identifiable=False,
                            flags=(reason, "fallback_ar1") + fit.flags), corr)

    if e.shape[0] < 2:
        return fallback("unidentifiable")
    cur, lag, ok = _pairs(e)
    ds = d[1:]
    ok = ok & ~np.isnan(ds)
    if (ok & (ds == 1)).sum() < 2 or (ok & (ds == 0)).sum() < 2:
        return fallback("unidentifiable")
    X = np.column_stack([lag[ok], ds[ok] * lag[ok]])
    xtx = X.T @ X
    if np.linalg.matrix_rank(xtx) < 2:
        return fallback("singular")
    a0, a1 = np.linalg.solve(xtx, X.T @ cur[ok])
    fit = StrategyFit("SD_AR1", {"alpha0": float(a0), "alpha1": float(a1)})
    if math.isnan(e[-1]):
        return StrategyFit("SD_AR1", fit.coefficients, flags=("last_error_missing",)), None
    return fit, float(a0 * e[-1] + a1 * current_state * e[-1])


# ------------------------------------------------------------------- harness

@dataclass(frozen=True)
class BacktestReport:
    """Per-origin corrections with accumulated RMSFE.

    ``rmsfe[i]`` is computed over ``outputs[: i + 1]``, the test set
    running from ``test_start`` to the ``i``-th origin; ``base_rmsfe`` is
    the same quantity for the uncorrected forecasts.
    """

    strategy: str
    horizon: int
    training_start: HalfYear
    test_start: HalfYear
    outputs: tuple[CorrectionOutput, ...]
    rmsfe: tuple[float, ...]
    base_rmsfe: tuple[float, ...]
    rrmsfe: tuple[float | None, ...]
    fits: tuple[StrategyFit, ...] = field(default=(), repr=False, compare=False)

    @property
    def origins(self) -> list[HalfYear]:
        return [o.origin for o in self.outputs]

    @property
    def final_rrmsfe(self) -> float | None:
        return self.rrmsfe[-1] if self.rrmsfe else None

    def validation_periods(self, i: int) -> tuple[HalfYear, HalfYear]:
        """Training/validation span ``R_t`` for the ``i``-th origin (inclusive)."""
        return self.training_start, self.outputs[i].origin - 1


def _dense_slice(errors: ErrorPanel, h: int, start: HalfYear, end: HalfYear):
    periods = half_year_range(start, end)
    n = len(periods)
    e = np.full(n, np.nan)
    f = np.full(n, np.nan)
    y = np.full(n, np.nan)
    d: list[int | None] = [None] * n
    for i, t in enumerate(periods):
        cell = errors.cells.get((t, h))
        if cell is not None:
            e[i], f[i], y[i] = cell.error, cell.forecast, cell.realized
        if errors.states is not None:
            d[i] = errors.states.get((t, h))
    return periods, e, f, y, d


def correct_at(kind: str, history: np.ndarray, states: Sequence[int | None],
               current_state: int | None,
               candidates: Sequence[int] = DEFAULT_WINDOWS) -> tuple[StrategyFit, float | None]:
    """Dispatch one strategy on data dated strictly before the origin."""
    if kind == "NONE":
        return StrategyFit("NONE", identifiable=False, flags=("pass_through",)), None
    if kind == "ME":
        scores = me_validation_scores(history, candidates)
        if scores:
            w = select_me_window(history, candidates)
            flags: tuple[str, ...] = ()
        else:
            w, flags = 1, ("empty_validation",)
        corr = me_correct(history, w)
        if corr is None:
            flags += ("insufficient_history",)
        return StrategyFit("ME", {"mean_error": corr}, w, corr is not None, flags), corr
    if kind == "AR1":
        return ar1_correct(history)
    if current_state is None:
        return StrategyFit(kind, identifiable=False, flags=("state_unknown",)), None
    if kind == "SD_ME":
        return sd_me_correct(history, states, current_state)
    if kind == "SD_AR1":
        return sd_ar1_correct(history, states, current_state)
    raise ValueError(f"unknown strategy {kind!r}")


def run_backtest(errors: ErrorPanel, config: StrategyConfig, horizon: int,
                 end: HalfYear | None = None) -> BacktestReport:
    """Recursive out-of-sample evaluation of one strategy at one horizon.

    Origins are the periods from ``config.test_start`` (through ``end`` if
    given) with both a forecast and a realized value. Periods where the
    strategy cannot correct contribute the uncorrected error, so every
    strategy is scored on the same test set as the baseline.
    """
    present = sorted(t for (t, h) in errors.cells if h == horizon)
    if end is None:
        end = present[-1] if present else config.test_start
    if end < config.test_start:
        raise EmptyTestSet(f"no periods between {config.test_start} and {end}")
    periods, e, f, y, d = _dense_slice(errors, horizon, config.training_start, end)
    first = config.test_start - config.training_start

    outputs, fits = [], []
    for i in range(first, len(periods)):
        if math.isnan(e[i]):
            continue
        fit, corr = correct_at(config.kind, e[:i], d[:i], d[i], config.window_candidates)
        passed = corr is None
        c = 0.0 if passed else corr
        outputs.append(CorrectionOutput(periods[i], horizon, float(f[i]), float(y[i]), c,
                                        float(f[i]) + c, passed, fit.chosen_window, fit.flags))
        fits.append(fit)
    if not outputs:
        raise EmptyTestSet(f"no test observations for h={horizon} from {config.test_start}")

    sq = np.array([o.squared_error for o in outputs])
    base = np.array([o.base_squared_error for o in outputs])
    k = np.arange(1, len(outputs) + 1)
    rmsfe = np.sqrt(np.cumsum(sq) / k)
    base_rmsfe = np.sqrt(np.cumsum(base) / k)
    rr = tuple(float(a / b) if b > 0 else None for a, b in zip(rmsfe, base_rmsfe))
    return BacktestReport(config.kind, horizon, config.training_start, config.test_start,
                          tuple(outputs), tuple(map(float, rmsfe)),
                          tuple(map(float, base_rmsfe)), rr, tuple(fits))


@dataclass(frozen=True)
class SubperiodRow:
    start: HalfYear
    end: HalfYear
    n: int
    rmsfe: float
    base_rmsfe: float
    ratio: float | None


def subperiod_summary(report: BacktestReport,
                      breakpoints: Sequence[tuple[HalfYear, HalfYear]]) -> list[SubperiodRow]:
    """RMSFE ratio over origins falling in each inclusive ``(start, end)`` span."""
    rows = []
    for start, stop in breakpoints:
        sel = [o for o in report.outputs if start <= o.origin <= stop]
        if not sel:
            raise EmptySubperiod(f"no test observations in {start}..{stop}")
        rm = math.sqrt(sum(o.squared_error for o in sel) / len(sel))
        bm = math.sqrt(sum(o.base_squared_error for o in sel) / len(sel))
        rows.append(SubperiodRow(start, stop, len(sel), rm, bm, rm / bm if bm > 0 else None))
    return rows
