"""Price-series container, CSV ingestion and the fractional-year time axis."""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    DuplicateDate,
    EmptySeries,
    InvalidConfig,
    InvalidDate,
    MalformedRow,
    NonPositivePrice,
)


class PricePoint(NamedTuple):
    t: float
    price: float


def _days_in_year(year: int) -> int:
    return 366 if (year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)) else 365


def date_to_fractional_year(year: int, month: int, day: int) -> float:
    """Map a calendar date to ``year + (ordinal_day - 0.5) / days_in_year``.

    Anchoring at mid-day keeps every date strictly inside its own year.
    """
    try:
        date = _dt.date(int(year), int(month), int(day))
    except (TypeError, ValueError) as exc:
        raise InvalidDate(f"{year}-{month}-{day}: {exc}") from None
    ordinal = date.timetuple().tm_yday
    return date.year + (ordinal - 0.5) / _days_in_year(date.year)


def date_to_t(date: _dt.date) -> float:
    return date_to_fractional_year(date.year, date.month, date.day)


def fractional_year_to_date(t: float) -> _dt.date:
    """Inverse of :func:`date_to_fractional_year`, rounding to the nearest day."""
    if not math.isfinite(t):
        raise InvalidDate(f"non-finite time {t!r}")
    year = math.floor(t)
    ordinal = int(round((t - year) * _days_in_year(year) + 0.5))
    if ordinal < 1:
        year -= 1
        ordinal = _days_in_year(year)
    elif ordinal > _days_in_year(year):
        year += 1
        ordinal = 1
    try:
        return _dt.date(year, 1, 1) + _dt.timedelta(days=ordinal - 1)
    except (OverflowError, ValueError) as exc:
        raise InvalidDate(f"time {t!r} out of range: {exc}") from None


def parse_date(text: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except ValueError:
        raise InvalidDate(f"not an ISO date (YYYY-MM-DD): {text!r}") from None


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Immutable series of positive prices on strictly increasing times."""

    t: np.ndarray
    price: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.array(self.t, dtype=float).ravel()
        price = np.array(self.price, dtype=float).ravel()
        if t.size == 0:
            raise EmptySeries("series has no points")
        if t.shape != price.shape:
            raise InvalidConfig("times and prices differ in length")
        if not np.all(np.isfinite(t)):
            raise InvalidConfig("times must be finite")
        if np.any(np.diff(t) <= 0):
            raise InvalidConfig("times must be strictly increasing")
        bad = np.flatnonzero(~(price > 0) | ~np.isfinite(price))
        if bad.size:
            raise NonPositivePrice(int(bad[0]) + 1, f"price {price[bad[0]]!r} is not positive")
        t.flags.writeable = False
        price.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "price", price)

    @classmethod
    def from_points(cls, points: Sequence[PricePoint | tuple], label: str = "") -> "PriceSeries":
        if not points:
            raise EmptySeries("series has no points")
        t, price = zip(*points)
        return cls(np.asarray(t), np.asarray(price), label)

    @property
    def points(self) -> list[PricePoint]:
        return [PricePoint(float(a), float(b)) for a, b in zip(self.t, self.price)]

    def __len__(self) -> int:
        return self.t.size

    def __iter__(self) -> Iterator[PricePoint]:
        return iter(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.price, other.price)
        )

    def __repr__(self) -> str:
        return f"PriceSeries(n={len(self)}, t=[{self.t[0]:.4f}, {self.t[-1]:.4f}], label={self.label!r})"


def parse_csv(data: bytes | str, label: str = "") -> PriceSeries:
    """Parse ``date,price`` CSV (UTF-8, LF or CRLF) into a date-sorted series.

    Line numbers in errors are 1-based and count the header.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise MalformedRow(1, f"not UTF-8: {exc}") from None
    lines = data.splitlines()
    if not lines or [c.strip().lower() for c in lines[0].split(",")] != ["date", "price"]:
        raise MalformedRow(1, "expected header 'date,price'")

    rows: dict[_dt.date, tuple[int, float]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != 2:
            raise MalformedRow(lineno, f"expected 2 fields, got {len(cells)}")
        try:
            date = _dt.date.fromisoformat(cells[0].strip())
            price = float(cells[1].strip())
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        if not math.isfinite(price):
            raise MalformedRow(lineno, f"non-finite price {cells[1].strip()!r}")
        if price <= 0:
            raise NonPositivePrice(lineno, f"price {price!r} is not positive")
        if date in rows:
            raise DuplicateDate(lineno, f"{date.isoformat()} already seen on line {rows[date][0]}")
        rows[date] = (lineno, price)

    if not rows:
        raise EmptySeries("no data rows")
    dates = sorted(rows)
    return PriceSeries(
        np.array([date_to_t(d) for d in dates]),
        np.array([rows[d][1] for d in dates]),
        label,
    )


def read_csv(path, label: str | None = None) -> PriceSeries:
    with open(path, "rb") as fh:
        return parse_csv(fh.read(), label=str(path) if label is None else label)


def to_csv(series: PriceSeries) -> str:
    """Render a series in the ``date,price`` format, one row per calendar day.

    Times are rounded to the nearest day; two points landing on the same day
    raise :class:`DuplicateDate` rather than silently dropping data.
    """
    out = ["date,price"]
    seen = set()
    for i, (t, price) in enumerate(zip(series.t, series.price)):
        date = fractional_year_to_date(float(t))
        if date in seen:
            raise DuplicateDate(i + 2, f"{date.isoformat()} produced twice")
        seen.add(date)
        out.append(f"{date.isoformat()},{float(price)!r}")
    return "\n".join(out) + "\n"


def slice_window(series: PriceSeries, t_start: float, t_end: float) -> PriceSeries:
    """Sub-series with ``t_start <= t <= t_end``."""
    if not t_start < t_end:
        raise InvalidConfig(f"window start {t_start} must precede end {t_end}")
    mask = (series.t >= t_start) & (series.t <= t_end)
    if not mask.any():
        raise EmptySeries(f"no points in window [{t_start}, {t_end}]")
    if mask.all():
        return series
    return PriceSeries(series.t[mask], series.price[mask], series.label)
