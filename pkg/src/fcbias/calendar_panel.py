"""Semiannual time index, forecast horizons and the forecast/error panels.

Forecasts target half-year outcomes but are published at monthly dates;
the horizon ``h`` counts quarters between publication and the final month
of the target half-year, so ``h = 0`` is a nowcast and ``h = -1`` a
backcast issued after the half-year closed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

from .exceptions import DuplicateCell, OutOfRange

MIN_HORIZON = -1
MAX_HORIZON = 6


@dataclass(frozen=True, order=True)
class YearMonth:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @property
    def ordinal(self) -> int:
        return self.year * 12 + self.month - 1

    @classmethod
    def from_ordinal(cls, k: int) -> "YearMonth":
        return cls(k // 12, k % 12 + 1)

    def __add__(self, months: int) -> "YearMonth":
        return YearMonth.from_ordinal(self.ordinal + months)

    def __sub__(self, other):
        if isinstance(other, YearMonth):
            return self.ordinal - other.ordinal
        return YearMonth.from_ordinal(self.ordinal - other)

    @property
    def quarter(self) -> "Quarter":
        return Quarter(self.year, (self.month - 1) // 3 + 1)

    @property
    def half_year(self) -> "HalfYear":
        return HalfYear(self.year, 1 if self.month <= 6 else 2)

    @classmethod
    def parse(cls, text: str) -> "YearMonth":
        m = re.fullmatch(r"\s*(\d{4})-(\d{1,2})\s*", text)
        if not m:
            raise ValueError(f"not a YYYY-MM month: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self):
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True, order=True)
class Quarter:
    year: int
    quarter: int

    def __post_init__(self):
        if not 1 <= self.quarter <= 4:
            raise ValueError(f"quarter must be in 1..4, got {self.quarter}")

    @property
    def ordinal(self) -> int:
        return self.year * 4 + self.quarter - 1

    @classmethod
    def from_ordinal(cls, k: int) -> "Quarter":
        return cls(k // 4, k % 4 + 1)

    def __add__(self, quarters: int) -> "Quarter":
        return Quarter.from_ordinal(self.ordinal + quarters)

    def __sub__(self, other):
        if isinstance(other, Quarter):
            return self.ordinal - other.ordinal
        return Quarter.from_ordinal(self.ordinal - other)

    @property
    def months(self) -> tuple[YearMonth, ...]:
        first = 3 * (self.quarter - 1) + 1
        return tuple(YearMonth(self.year, m) for m in range(first, first + 3))

    @property
    def mid_month(self) -> YearMonth:
        return self.months[1]

    def __str__(self):
        return f"{self.year:04d}Q{self.quarter}"


@dataclass(frozen=True, order=True)
class HalfYear:
    """Half-year period ``t``; H1 covers January to June, H2 July to December."""

    year: int
    half: int

    def __post_init__(self):
        if self.half not in (1, 2):
            raise ValueError(f"half must be 1 or 2, got {self.half}")

    @property
    def ordinal(self) -> int:
        return self.year * 2 + self.half - 1

    @classmethod
    def from_ordinal(cls, k: int) -> "HalfYear":
        return cls(k // 2, k % 2 + 1)

    def __add__(self, k: int) -> "HalfYear":
        return HalfYear.from_ordinal(self.ordinal + k)

    def __sub__(self, other):
        if isinstance(other, HalfYear):
            return self.ordinal - other.ordinal
        return HalfYear.from_ordinal(self.ordinal - other)

    @property
    def months(self) -> tuple[YearMonth, ...]:
        first = 1 if self.half == 1 else 7
        return tuple(YearMonth(self.year, m) for m in range(first, first + 6))

    @property
    def end_month(self) -> YearMonth:
        return YearMonth(self.year, 6 * self.half)

    @property
    def quarters(self) -> tuple[Quarter, Quarter]:
        q = 2 * self.half - 1
        return Quarter(self.year, q), Quarter(self.year, q + 1)

    @property
    def end_quarter(self) -> Quarter:
        return self.quarters[1]

    @classmethod
    def parse(cls, text: str) -> "HalfYear":
        """Accept ``2021H1``, ``H1 2021`` or ``2021-1``."""
        s = text.strip().upper()
        m = (re.fullmatch(r"(\d{4})\s*[-_ ]?H([12])", s)
             or re.fullmatch(r"(\d{4})-([12])", s))
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        m = re.fullmatch(r"H([12])\s*(\d{4})", s)
        if m:
            return cls(int(m.group(2)), int(m.group(1)))
        raise ValueError(f"not a half-year: {text!r}")

    def __str__(self):
        return f"{self.year:04d}H{self.half}"


def half_year_range(start: HalfYear, end: HalfYear) -> list[HalfYear]:
    """Inclusive chronological range."""
    return [HalfYear.from_ordinal(k) for k in range(start.ordinal, end.ordinal + 1)]


def classify_horizon(published: YearMonth, target: HalfYear) -> int:
    """Quarters between publication and the last month of ``target``.

    A forecast published less than three months before the end of the
    half-year is a nowcast (``h = 0``); one published after the half-year
    closed, but before the outcome is released, gets ``h = -1``.
    """
    gap = target.end_month.ordinal - published.ordinal
    h = gap // 3
    if not MIN_HORIZON <= h <= MAX_HORIZON:
        raise OutOfRange(
            f"forecast for {target} published {published} has horizon {h}, "
            f"outside {MIN_HORIZON}..{MAX_HORIZON}")
    return h


def round1(x: float) -> float:
    """Round to one decimal, ties away from zero.

    Float noise below 1e-10 is discarded first so that a value computed as
    2.2499999999999996 still rounds like the decimal 2.25.
    """
    d = Decimal(f"{x:.10f}").quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return float(d) + 0.0


class ForecastCell(NamedTuple):
    value: float
    published: YearMonth


@dataclass(frozen=True)
class ForecastPanel:
    """Published forecasts ``y_{h,t}`` of one variable keyed by ``(target, h)``."""

    variable: str
    cells: Mapping[tuple[HalfYear, int], ForecastCell] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "cells", MappingProxyType(dict(self.cells)))

    @classmethod
    def from_records(cls, variable: str,
                     records: Iterable[tuple[YearMonth, HalfYear, float]]) -> "ForecastPanel":
        """Build from ``(published, target, value)`` triples, classifying horizons.

        Raises :class:`~fcbias.exceptions.DuplicateCell` when two records land
        on the same ``(target, h)``.
        """
        cells: dict[tuple[HalfYear, int], ForecastCell] = {}
        for i, (pub, target, value) in enumerate(records):
            key = (target, classify_horizon(pub, target))
            if key in cells:
                raise DuplicateCell(
                    f"duplicate forecast for {variable} {target} h={key[1]}", row=i + 1)
            cells[key] = ForecastCell(float(value), pub)
        return cls(variable, cells)

    def horizons(self) -> list[int]:
        return sorted({h for _, h in self.cells})

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class RealizedSeries:
    variable: str
    values: Mapping[HalfYear, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def periods(self) -> list[HalfYear]:
        return sorted(self.values)

    def __len__(self):
        return len(self.values)


class ErrorCell(NamedTuple):
    error: float
    forecast: float
    realized: float


class SliceEntry(NamedTuple):
    period: HalfYear
    error: float
    state: int | None = None
    forecast: float | None = None
    realized: float | None = None


def _exact_diff(a: float, b: float) -> float:
    # decimal subtraction of the shortest float representations
    return float(Decimal(repr(a)) - Decimal(repr(b))) + 0.0


@dataclass(frozen=True)
class ErrorPanel:
    """Forecast errors ``e_{h,t} = y_t - y_{h,t}`` with optional state dummies."""

    variable: str
    cells: Mapping[tuple[HalfYear, int], ErrorCell] = field(default_factory=dict)
    states: Mapping[tuple[HalfYear, int], int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", MappingProxyType(dict(self.cells)))
        if self.states is not None:
            bad = {v for v in self.states.values() if v not in (0, 1)}
            if bad:
                raise ValueError(f"state dummies must be 0/1, got {sorted(bad)}")
            object.__setattr__(self, "states", MappingProxyType(dict(self.states)))

    def with_states(self, states: Mapping[tuple[HalfYear, int], int]) -> "ErrorPanel":
        return ErrorPanel(self.variable, self.cells, dict(states))

    @classmethod
    def from_arrays(cls, variable: str, horizon: int, periods, forecasts, realized,
                    states=None) -> "ErrorPanel":
        """Single-horizon panel from aligned sequences; NaN entries are dropped."""
        cells, st = {}, {}
        for i, (t, f, y) in enumerate(zip(periods, forecasts, realized)):
            if f is None or y is None or f != f or y != y:
                continue
            cells[(t, horizon)] = ErrorCell(float(y) - float(f), float(f), float(y))
            if states is not None:
                st[(t, horizon)] = int(states[i])
        return cls(variable, cells, st if states is not None else None)

    def horizons(self) -> list[int]:
        return sorted({h for _, h in self.cells})

    def __len__(self):
        return len(self.cells)


def compute_errors(panel: ForecastPanel, realized: RealizedSeries) -> ErrorPanel:
    """Pair every forecast with its realized value; unmatched cells are dropped."""
    if panel.variable != realized.variable:
        raise ValueError(f"variable mismatch: {panel.variable!r} vs {realized.variable!r}")
    cells = {}
    for (t, h), cell in panel.cells.items():
        y = realized.values.get(t)
        if y is None:
            continue
        cells[(t, h)] = ErrorCell(_exact_diff(y, cell.value), cell.value, y)
    return ErrorPanel(panel.variable, cells)


def horizon_slice(errors: ErrorPanel, h: int) -> list[SliceEntry]:
    """Chronological entries for horizon ``h``; missing periods are simply absent."""
    out = []
    for (t, hh), cell in errors.cells.items():
        if hh != h:
            continue
        state = None if errors.states is None else errors.states.get((t, hh))
        out.append(SliceEntry(t, cell.error, state, cell.forecast, cell.realized))
    out.sort(key=lambda e: e.period)
    return out

