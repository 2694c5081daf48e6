"""
Loading price files and turning them into return series.

All lag arithmetic downstream is in row units, so dates are carried as
labels only and never used for alignment.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DATE_COLUMNS = ("date", "datetime", "timestamp", "time")
PRICE_COLUMNS = ("adj close", "adj_close", "adjclose", "close", "price")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Strictly positive prices with optional ISO-8601 date labels."""

    prices: np.ndarray
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 1 or prices.size < 2:
            raise ValueError("a price series needs at least 2 observations")
        if not np.all(np.isfinite(prices)):
            raise ValueError("prices must be finite")
        bad = np.flatnonzero(prices <= 0)
        if bad.size:
            raise ValueError(f"non-positive price at row {int(bad[0])}")
        if self.timestamps is not None:
            if len(self.timestamps) != prices.size:
                raise ValueError("timestamps and prices differ in length")
            if any(a >= b for a, b in zip(self.timestamps, self.timestamps[1:])):
                raise ValueError("timestamps must be strictly increasing")
        prices.flags.writeable = False
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Ordered real-valued observations with their cached arithmetic mean."""

    values: np.ndarray
    mean: float = float("nan")

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("a return series needs at least 1 observation")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mean", float(values.mean()))

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _sniff_dialect(sample: str):
    try:
        return csv.Sniffer().sniff(sample, delimiters=",\t")
    except csv.Error:
        # single-column files have nothing to sniff
        return csv.excel


def _resolve_column(header: list[str], column) -> int:
    if column is None:
        lowered = [h.lower() for h in header]
        for name in PRICE_COLUMNS:
            if name in lowered:
                return lowered.index(name)
        if len(header) == 1:
            return 0
        raise ValueError(f"no price column recognised in {header}; pass one explicitly")
    if isinstance(column, int):
        idx = column
    elif column in header:
        return header.index(column)
    elif isinstance(column, str) and column.lstrip("-").isdigit():
        idx = int(column)
    else:
        raise ValueError(f"column {column!r} not found in header {header}")
    if not 0 <= idx < len(header):
        raise ValueError(f"column index {idx} out of range for {len(header)} columns")
    return idx


def parse_price_csv(path, column=None) -> PriceSeries:
    """Read one price column from a delimited text file with a header row.

    Parameters
    ----------
    path : str or Path
        Comma- or tab-delimited file; the delimiter is sniffed from the
        header. Lines starting with ``#`` are ignored.
    column : str or int, optional
        Column name, or zero-based column index. By default the first of
        ``Adj Close``, ``Close``, ``Price`` (any case) is used, or the only
        column of a single-column file.

    Returns
    -------
    PriceSeries
        Prices in file order. A column named like a date (``Date``,
        ``timestamp``...) is attached as labels when present.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    ValueError
        On a missing column, a blank/non-numeric/non-positive cell, or
        fewer than two rows.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty file")
    dialect = _sniff_dialect(lines[0])
    rows = list(csv.reader(lines, dialect))
    header = [h.strip() for h in rows[0]]
    idx = _resolve_column(header, column)
    lowered = [h.lower() for h in header]
    date_idx = next((lowered.index(d) for d in DATE_COLUMNS if d in lowered), None)
    if date_idx == idx:
        date_idx = None

    prices = []
    stamps = []
    for k, row in enumerate(rows[1:]):
        cell = row[idx].strip() if idx < len(row) else ""
        if not cell:
            raise ValueError(f"blank price at row {k}")
        try:
            value = float(cell)
        except ValueError:
            raise ValueError(f"non-numeric price {cell!r} at row {k}") from None
        if not np.isfinite(value) or value <= 0:
            raise ValueError(f"non-positive price at row {k}")
        prices.append(value)
        if date_idx is not None:
            stamps.append(row[date_idx].strip())
    if len(prices) < 2:
        raise ValueError(f"{path}: need at least 2 price rows, found {len(prices)}")
    return PriceSeries(np.array(prices), tuple(stamps) if date_idx is not None else None)


def log_returns(p: PriceSeries, interval: int = 1) -> ReturnSeries:
    """Overlapping log returns ``log(P[k+interval]) - log(P[k])``."""
    interval = int(interval)
    if interval < 1:
        raise ValueError("interval must be >= 1")
    if interval >= len(p):
        raise ValueError(f"interval {interval} >= series length {len(p)}")
    logp = np.log(p.prices)
    return ReturnSeries(logp[interval:] - logp[:-interval])


def demean(r) -> ReturnSeries:
    """Subtract the arithmetic mean. Accepts a ReturnSeries or any 1-d array."""
    values = np.asarray(r, dtype=float)
    out = ReturnSeries(values - values.mean())
    object.__setattr__(out, "mean", 0.0)
    return out


def read_series(path) -> np.ndarray:
    """Read a one-value-per-line series file, skipping ``#`` comment lines."""
    return np.loadtxt(path, comments="#", ndmin=1, dtype=float)


def write_series(path, values, header: str | None = None):
    """Write one value per line with full float round-trip precision."""
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v in np.asarray(values, dtype=float):
            fh.write(f"{float(v)!r}\n")
