import math

import pytest
from hypothesis import given, strategies as st

from fcbias.calendar_panel import (ErrorPanel, ForecastCell, ForecastPanel, HalfYear, Quarter,
                                   RealizedSeries, YearMonth, classify_horizon, compute_errors,
                                   half_year_range, horizon_slice, round1)
from fcbias.exceptions import DuplicateCell, OutOfRange


@pytest.mark.parametrize("pub, target, h", [
    (YearMonth(2021, 5), HalfYear(2021, 1), 0),
    (YearMonth(2018, 1), HalfYear(2017, 2), -1),
    (YearMonth(2021, 2), HalfYear(2021, 2), 3),
    (YearMonth(2021, 2), HalfYear(2021, 1), 1),
    (YearMonth(2021, 4), HalfYear(2021, 1), 0),
    (YearMonth(2021, 3), HalfYear(2021, 1), 1),
])
def test_classify_horizon_examples(pub, target, h):
    assert classify_horizon(pub, target) == h


def test_classify_horizon_out_of_range():
    with pytest.raises(OutOfRange):
        classify_horizon(YearMonth(2018, 4), HalfYear(2017, 2))  # h = -2
    with pytest.raises(OutOfRange):
        classify_horizon(YearMonth(2019, 1), HalfYear(2021, 1))  # 29 months -> h = 9


@given(st.integers(1990, 2040), st.integers(1, 12), st.integers(1990, 2040), st.integers(1, 2),
       st.integers(-40, 40))
def test_classify_horizon_translation_invariant(py, pm, ty, th, k):
    pub, target = YearMonth(py, pm), HalfYear(ty, th)
    gap = target.end_month - pub
    if not -3 <= gap <= 20:
        return
    h = classify_horizon(pub, target)
    assert classify_horizon(pub + 6 * k, target + k) == h


@pytest.mark.parametrize("year", [2005, 2015, 2021, 2023])
def test_first_and_second_issue_horizons(year):
    # first issue of a half-year gives h=1, the second h=0, for each issue calendar
    months = {2005: ((1, 4), (7, 10)), 2015: ((1, 4), (7, 10)),
              2021: ((2, 5), (8, 11)), 2023: ((2, 5), (8, 11))}[year]
    for half, (first, second) in zip((1, 2), months):
        t = HalfYear(year, half)
        assert classify_horizon(YearMonth(year, first), t) == 1
        assert classify_horizon(YearMonth(year, second), t) == 0


def test_half_year_structure():
    t = HalfYear(2021, 1)
    assert [m.month for m in t.months] == [1, 2, 3, 4, 5, 6]
    assert [m.month for m in HalfYear(2021, 2).months] == [7, 8, 9, 10, 11, 12]
    assert t.end_month == YearMonth(2021, 6)
    assert t.end_quarter == Quarter(2021, 2)
    assert t - 2 == HalfYear(2020, 1)
    assert HalfYear(2020, 2) + 1 == t
    assert HalfYear(2021, 2) - HalfYear(2019, 1) == 5
    assert Quarter(2021, 2).mid_month == YearMonth(2021, 5)


@pytest.mark.parametrize("text", ["2021H1", "H1 2021", "2021-1", "2021h1"])
def test_half_year_parse(text):
    assert HalfYear.parse(text) == HalfYear(2021, 1)


@given(st.integers(-5000, 5000), st.integers(-300, 300), st.integers(-300, 300))
def test_ordinal_arithmetic_associative(k, a, b):
    t = HalfYear.from_ordinal(k + 4000)
    assert (t + a) + b == t + (a + b)
    assert (t + a) - t == a
    assert HalfYear.from_ordinal(t.ordinal) == t
    m = YearMonth.from_ordinal(k + 24000)
    assert (m + a) + b == m + (a + b)
    assert (m + a) - m == a


def test_invalid_components():
    with pytest.raises(ValueError):
        HalfYear(2020, 3)
    with pytest.raises(ValueError):
        YearMonth(2020, 13)
    with pytest.raises(ValueError):
        Quarter(2020, 0)


def test_round1_half_away_from_zero():
    assert round1(2.25) == 2.3
    assert round1(-2.25) == -2.3
    assert round1(2.2499999999999996) == 2.3
    assert round1(0.05) == 0.1
    assert round1(-0.04) == 0.0
    assert math.copysign(1.0, round1(-0.04)) == 1.0


def _panel(cells):
    return ForecastPanel("CPI", {k: ForecastCell(v, YearMonth(2000, 1)) for k, v in cells.items()})


def test_compute_errors_examples():
    t, u = HalfYear(2021, 1), HalfYear(2024, 2)
    fp = _panel({(t, 1): 2.0, (HalfYear(2021, 2), 0): 4.5, (u, 1): 1.9})
    real = RealizedSeries("CPI", {t: 2.3, HalfYear(2021, 2): 4.5})
    ep = compute_errors(fp, real)
    assert ep.cells[(t, 1)].error == 0.3
    assert ep.cells[(HalfYear(2021, 2), 0)].error == 0.0
    assert (u, 1) not in ep.cells
    assert len(ep) == 2


@given(st.lists(st.tuples(st.integers(-99, 99), st.integers(-99, 99)), min_size=1, max_size=30))
def test_error_plus_forecast_reproduces_realized(pairs):
    periods = [HalfYear(2000, 1) + i for i in range(len(pairs))]
    fp = _panel({(t, 0): f / 10 for t, (f, _) in zip(periods, pairs)})
    real = RealizedSeries("CPI", {t: y / 10 for t, (_, y) in zip(periods, pairs)})
    ep = compute_errors(fp, real)
    for (t, h), c in ep.cells.items():
        assert round1(c.forecast + c.error) == c.realized
        # the stored error is the exact one-decimal difference
        assert c.error == round1(c.realized - c.forecast)


def test_duplicate_cells_rejected():
    recs = [(YearMonth(2021, 5), HalfYear(2021, 1), 2.0),
            (YearMonth(2021, 4), HalfYear(2021, 1), 2.1)]
    with pytest.raises(DuplicateCell) as exc:
        ForecastPanel.from_records("CPI", recs)
    assert exc.value.row == 2


def test_horizon_slice_with_gap_and_empty():
    fp = _panel({(HalfYear(2000, 1), 2): 1.0, (HalfYear(2001, 1), 2): 1.5,
                 (HalfYear(2000, 1), 0): 1.0})
    real = RealizedSeries("CPI", {HalfYear(2000, 1): 1.2, HalfYear(2001, 1): 1.1})
    sl = horizon_slice(compute_errors(fp, real), 2)
    assert [e.period for e in sl] == [HalfYear(2000, 1), HalfYear(2001, 1)]
    assert horizon_slice(ErrorPanel("CPI"), 0) == []


def test_full_slice_count():
    periods = half_year_range(HalfYear(2012, 1), HalfYear(2024, 1))
    assert len(periods) == 25
    ep = ErrorPanel.from_arrays("CPI", 0, periods, [1.0] * 25, [1.1] * 25)
    assert len(horizon_slice(ep, 0)) == 25


def test_panels_are_immutable():
    ep = ErrorPanel.from_arrays("CPI", 0, [HalfYear(2012, 1)], [1.0], [1.5], states=[1])
    with pytest.raises(TypeError):
        ep.cells[(HalfYear(2013, 1), 0)] = None
    with pytest.raises(ValueError):
        ErrorPanel("CPI", ep.cells, {(HalfYear(2012, 1), 0): 2})
