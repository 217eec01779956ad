"""Unbiasedness tests on forecast errors, plain and state-dependent.

The state dummy ``d = 1`` marks forecasts made while realized inflation at
the forecast-origin quarter was at or below the inflation target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .calendar_panel import ErrorPanel, HalfYear, Quarter, SliceEntry, horizon_slice
from .econometrics import (Bandwidth, HypothesisReport, RegressionResult, ols, t_test,
                           wald_test)
from .exceptions import (ConstantRegressor, InsufficientData, MissingOriginInflation,
                         NoTargetEpisode, NumericalError, RegimeTooSmall,
                         TooFewObservations)
from .ingest import QuarterlySeries, TargetSchedule


@dataclass(frozen=True)
class StateDummy:
    d: Mapping[tuple[HalfYear, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if any(v not in (0, 1) for v in self.d.values()):
            raise ValueError("state dummy values must be 0 or 1")
        object.__setattr__(self, "d", MappingProxyType(dict(self.d)))

    def __getitem__(self, key):
        return self.d[key]

    def get(self, key, default=None):
        return self.d.get(key, default)

    def __len__(self):
        return len(self.d)


@dataclass(frozen=True)
class TestReport:
    """One row of a test table.

    ``coefficients`` and ``std_errors`` map parameter names to estimates;
    a parameter that could not be identified maps to ``None``. ``joint`` is
    ``None`` when the estimates exist but the test statistic does not (for
    instance an exact fit that violates the null); ``note`` says why.
    """

    test_name: str
    horizon: int | None
    n: int
    coefficients: dict[str, float | None]
    std_errors: dict[str, float | None]
    joint: HypothesisReport | None
    one_sided: tuple[HypothesisReport, HypothesisReport] | None = None
    bandwidth: int = 0
    flags: tuple[str, ...] = ()
    n_by_state: tuple[int, int] | None = None
    regression: RegressionResult | None = field(default=None, repr=False, compare=False)
    note: str = ""

    __test__ = False  # keep pytest from collecting this class


def _inference(fn, *args):
    """Run one test, returning ``(report, "")`` or ``(None, reason)``."""
    try:
        return fn(*args), ""
    except NumericalError as exc:
        return None, f"{type(exc).__name__}: {exc}"


_FAILED = ("inference_failed",)


def origin_quarter(target: HalfYear, h: int) -> Quarter:
    """Quarter in which an ``h``-quarter-ahead forecast of ``target`` was made."""
    return target.end_quarter - h


def make_state_dummy(qinfl: QuarterlySeries, targets: TargetSchedule,
                     coords: Iterable[tuple[HalfYear, int]], strict: bool = True) -> StateDummy:
    """State dummy for each ``(target, h)`` coordinate.

    ``d = 1`` iff realized YoY inflation in the origin quarter is ``<=`` the
    target midpoint in effect at that quarter's middle month. With
    ``strict=False`` coordinates lacking inflation or a target are skipped
    instead of raising.
    """
    out = {}
    for target, h in coords:
        q = origin_quarter(target, h)
        pi = qinfl.values.get(q)
        if pi is None:
            if strict:
                raise MissingOriginInflation(f"no inflation for origin quarter {q} "
                                             f"({target}, h={h})")
            continue
        tgt = targets.target_at(q.mid_month)
        if tgt is None:
            if strict:
                raise NoTargetEpisode(f"no target episode covers {q.mid_month} "
                                      f"({target}, h={h})")
            continue
        out[(target, h)] = 1 if pi <= tgt else 0
    return StateDummy(out)


def _as_float_array(x) -> np.ndarray:
    return np.asarray(list(x), dtype=float).ravel()


def _as_states(d, n) -> np.ndarray:
    arr = np.asarray(list(d), dtype=int).ravel()
    if arr.shape[0] != n:
        raise ValueError(f"{arr.shape[0]} states for {n} observations")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("states must be 0 or 1")
    return arr


def holden_peel(errors, horizon: int | None = None,
                bandwidth: Bandwidth = "auto") -> TestReport:
    """Mean-zero test ``e = delta + v``, ``H0: delta = 0``.

    ``joint`` holds the two-sided HAC t test and ``one_sided`` the
    ``(less, greater)`` pair.
    """
    e = _as_float_array(errors)
    n = e.shape[0]
    if n < 3:
        raise TooFewObservations(f"Holden-Peel needs >= 3 observations, got {n}")
    res = ols(np.ones((n, 1)), e, bandwidth=bandwidth, names=("delta",))
    two, note = _inference(t_test, res, 0, 0.0, "two-sided")
    one_sided = None
    if two is not None:
        one_sided = (t_test(res, 0, 0.0, "less"), t_test(res, 0, 0.0, "greater"))
    return TestReport("HP", horizon, n, {"delta": res.coef("delta")},
                      {"delta": res.se("delta")}, two, one_sided, res.bandwidth,
                      () if two is not None else _FAILED, regression=res, note=note)


def _check_forecasts(f: np.ndarray, y: np.ndarray) -> None:
    if f.shape != y.shape:
        raise ValueError("forecast and realized series differ in length")


def mincer_zarnowitz(forecasts, realized, horizon: int | None = None,
                     bandwidth: Bandwidth = "auto") -> TestReport:
    """Regress realized on a constant and the forecast; ``H0: alpha = 0, beta = 1``."""
    f, y = _as_float_array(forecasts), _as_float_array(realized)
    _check_forecasts(f, y)
    n = f.shape[0]
    if n < 4:
        raise TooFewObservations(f"Mincer-Zarnowitz needs >= 4 observations, got {n}")
    if np.ptp(f) == 0.0:
        raise ConstantRegressor("forecast series is constant")
    X = np.column_stack([np.ones(n), f])
    res = ols(X, y, bandwidth=bandwidth, names=("alpha", "beta"))
    joint, note = _inference(wald_test, res, np.eye(2), [0.0, 1.0])
    return TestReport("MZ", horizon, n,
                      {"alpha": res.coef("alpha"), "beta": res.coef("beta")},
                      {"alpha": res.se("alpha"), "beta": res.se("beta")},
                      joint, None, res.bandwidth, () if joint is not None else _FAILED,
                      regression=res, note=note)


def sd_holden_peel(errors, states, horizon: int | None = None,
                   bandwidth: Bandwidth = "auto") -> TestReport:
    """``e = alpha d + delta (1 - d) + v`` with ``H0: alpha = delta = 0``.

    One-sided tests: ``alpha < 0`` (over-prediction while inflation is at or
    below target) and ``delta > 0``. A state with fewer than two
    observations leaves its coefficient unidentified; the joint test then
    runs on the remaining coefficient and the report is flagged.
    """
    e = _as_float_array(errors)
    n = e.shape[0]
    d = _as_states(states, n)
    if n < 4:
        raise TooFewObservations(f"state-dependent Holden-Peel needs >= 4 observations, got {n}")
    n1, n0 = int(d.sum()), int(n - d.sum())
    cols, names = [], []
    if n1 >= 2:
        cols.append(d.astype(float))
        names.append("alpha")
    if n0 >= 2:
        cols.append(1.0 - d)
        names.append("delta")
    flags: tuple[str, ...] = ()
    if len(names) < 2:
        flags = ("one_state_only",)
    if not names:
        raise TooFewObservations("neither state has two observations")
    keep = np.ones(n, dtype=bool)
    if "alpha" not in names:
        keep &= d == 0
    if "delta" not in names:
        keep &= d == 1
    X = np.column_stack(cols)[keep]
    res = ols(X, e[keep], bandwidth=bandwidth, names=names)
    k = len(names)
    joint, note = _inference(wald_test, res, np.eye(k), np.zeros(k))
    if joint is None:
        flags += _FAILED
    coefs = {nm: (res.coef(nm) if nm in names else None) for nm in ("alpha", "delta")}
    ses = {nm: (res.se(nm) if nm in names else None) for nm in ("alpha", "delta")}
    one_sided = None
    if k == 2:
        a, note_a = _inference(t_test, res, "alpha", 0.0, "less")
        d_, note_d = _inference(t_test, res, "delta", 0.0, "greater")
        if a is not None and d_ is not None:
            one_sided = (a, d_)
        elif joint is not None:
            flags += _FAILED
            note = note_a or note_d
    return TestReport("SD_HP", horizon, int(keep.sum()), coefs, ses, joint, one_sided,
                      res.bandwidth, flags, (n1, n0), regression=res, note=note)


def _regime_check(f: np.ndarray, d: np.ndarray, state: int) -> None:
    mask = d == state
    cnt = int(mask.sum())
    if cnt < 3:
        raise RegimeTooSmall(state, cnt)
    if np.ptp(f[mask]) == 0.0:
        raise RegimeTooSmall(state, cnt, "constant forecasts")


def sd_mincer_zarnowitz(forecasts, realized, states, horizon: int | None = None,
                        bandwidth: Bandwidth = "auto") -> TestReport:
    """Interacted regression with ``H0: alpha = gamma = 0, beta = delta = 1``.

    ``y = d (alpha + beta f) + (1 - d) (gamma + delta f) + u``.
    """
    f, y = _as_float_array(forecasts), _as_float_array(realized)
    _check_forecasts(f, y)
    n = f.shape[0]
    d = _as_states(states, n)
    for s in (1, 0):
        _regime_check(f, d, s)
    df = d.astype(float)
    X = np.column_stack([df, df * f, 1.0 - df, (1.0 - df) * f])
    names = ("alpha", "beta", "gamma", "delta")
    res = ols(X, y, bandwidth=bandwidth, names=names)
    joint, note = _inference(wald_test, res, np.eye(4), [0.0, 1.0, 0.0, 1.0])
    return TestReport("SD_MZ", horizon, n, {nm: res.coef(nm) for nm in names},
                      {nm: res.se(nm) for nm in names}, joint, None, res.bandwidth,
                      () if joint is not None else _FAILED,
                      n_by_state=(int(d.sum()), int(n - d.sum())), regression=res, note=note)


def subsample_mz(forecasts, realized, states, which_state: int,
                 horizon: int | None = None, bandwidth: Bandwidth = "auto") -> TestReport:
    """Plain Mincer-Zarnowitz on the observations with ``d == which_state``."""
    if which_state not in (0, 1):
        raise ValueError("which_state must be 0 or 1")
    f, y = _as_float_array(forecasts), _as_float_array(realized)
    _check_forecasts(f, y)
    d = _as_states(states, f.shape[0])
    _regime_check(f, d, which_state)
    mask = d == which_state
    rep = mincer_zarnowitz(f[mask], y[mask], horizon, bandwidth)
    name = f"MZ_D{which_state}"
    return TestReport(name, horizon, rep.n, rep.coefficients, rep.std_errors, rep.joint,
                      None, rep.bandwidth, rep.flags, regression=rep.regression, note=rep.note)


TEST_NAMES = ("MZ", "HP", "SD_HP", "SD_MZ", "MZ_D1", "MZ_D0")
STATE_TESTS = ("SD_HP", "SD_MZ", "MZ_D1", "MZ_D0")


@dataclass(frozen=True)
class TestOutcome:
    """A report or the reason a test could not be run on a slice."""

    variable: str
    horizon: int
    test_name: str
    report: TestReport | None
    diagnostic: str = ""
    numerical_failure: bool = False

    __test__ = False


def _run_one(name: str, entries: Sequence[SliceEntry], h: int, bandwidth: Bandwidth):
    e = [x.error for x in entries]
    f = [x.forecast for x in entries]
    y = [x.realized for x in entries]
    d = [x.state for x in entries]
    if name == "HP":
        return holden_peel(e, h, bandwidth)
    if name == "MZ":
        return mincer_zarnowitz(f, y, h, bandwidth)
    if name == "SD_HP":
        return sd_holden_peel(e, d, h, bandwidth)
    if name == "SD_MZ":
        return sd_mincer_zarnowitz(f, y, d, h, bandwidth)
    if name == "MZ_D1":
        return subsample_mz(f, y, d, 1, h, bandwidth)
    if name == "MZ_D0":
        return subsample_mz(f, y, d, 0, h, bandwidth)
    raise ValueError(f"unknown test {name!r}")


def run_bias_tests(errors: ErrorPanel, horizons: Iterable[int],
                   tests: Sequence[str] = TEST_NAMES,
                   bandwidth: Bandwidth = "auto") -> list[TestOutcome]:
    """Run ``tests`` on each horizon slice, ordered by horizon then test.

    State-dependent tests use only entries with a known state; without
    states they are reported as not run.
    """
    out = []
    for h in sorted(set(horizons)):
        entries = horizon_slice(errors, h)
        for name in tests:
            sub = entries
            if name in STATE_TESTS:
                if errors.states is None:
                    out.append(TestOutcome(errors.variable, h, name, None, "no state dummies"))
                    continue
                sub = [x for x in entries if x.state is not None]
            try:
                rep = _run_one(name, sub, h, bandwidth)
            except InsufficientData as exc:
                out.append(TestOutcome(errors.variable, h, name, None,
                                       f"{type(exc).__name__}: {exc}"))
            except NumericalError as exc:
                out.append(TestOutcome(errors.variable, h, name, None,
                                       f"{type(exc).__name__}: {exc}", True))
            else:
                failed = rep.joint is None or "inference_failed" in rep.flags
                out.append(TestOutcome(errors.variable, h, name, rep, rep.note, failed))
    return out
