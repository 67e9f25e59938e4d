"""CSV and JSON input/output with byte-stable formatting.

All writers emit "\n" line endings and repr-based float formatting, so a
rerun with identical inputs produces identical bytes on any platform.
Readers are strict about structure (missing columns and malformed cells
raise with the offending name or line) while semantic filtering (crossed
quotes, empty buckets) is left to the calibration layer, which counts
rejections instead of failing.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from .calibration import (
    BarRecord,
    CurveBucket,
    CurveSource,
    QuoteRecord,
    SpreadVolumeCurve,
    TradeRecord,
)
from .coupled_wave import BarSeries
from .errors import InputFormatError
from .optimizer import QuotePolicy

_TRADE_COLUMNS = ("timestamp", "price", "size")
_QUOTE_COLUMNS = ("timestamp", "bid", "ask")
_BAR_COLUMNS = ("timestamp", "open", "high", "low", "close", "volume")
_CURVE_COLUMNS = ("v_lo", "v_hi", "v_mid", "spread_q", "count")
_POLICY_COLUMNS = ("v", "lambda_opt", "spread_opt", "exec_rate",
                   "pnl_opt", "pnl_naive", "halt")


# --------------------------------------------------------------------------
# low-level formatting
# --------------------------------------------------------------------------

def format_float(x: float) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(x))


def parse_timestamp(text: str) -> float:
    """Seconds since epoch from a numeric or ISO-8601 timestamp string.

    Naive ISO timestamps are interpreted as UTC so the result does not
    depend on the machine's timezone.
    """
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise InputFormatError(f"unparseable timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _open_rows(path: str, required: Sequence[str]) -> list[dict[str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise InputFormatError(f"{path}: empty file, no header row")
            for col in required:
                if col not in header:
                    raise InputFormatError(f"{path}: missing column {col!r}")
            return list(reader)
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: not valid UTF-8: {exc}") from exc


def _cell_float(row: dict[str, str], col: str, path: str, line: int) -> float:
    raw = row.get(col)
    if raw is None or raw.strip() == "":
        raise InputFormatError(f"{path}:{line}: empty value in column {col!r}")
    try:
        return float(raw)
    except ValueError as exc:
        raise InputFormatError(
            f"{path}:{line}: bad value {raw!r} in column {col!r}"
        ) from exc


# --------------------------------------------------------------------------
# readers
# --------------------------------------------------------------------------

def read_trades(path: str) -> list[TradeRecord]:
    rows = _open_rows(path, _TRADE_COLUMNS)
    out = []
    for i, row in enumerate(rows, start=2):
        out.append(TradeRecord(
            timestamp=parse_timestamp(row["timestamp"]),
            price=_cell_float(row, "price", path, i),
            size=_cell_float(row, "size", path, i),
        ))
    return out


def read_quotes(path: str) -> list[QuoteRecord]:
    rows = _open_rows(path, _QUOTE_COLUMNS)
    out = []
    for i, row in enumerate(rows, start=2):
        out.append(QuoteRecord(
            timestamp=parse_timestamp(row["timestamp"]),
            bid=_cell_float(row, "bid", path, i),
            ask=_cell_float(row, "ask", path, i),
        ))
    return out


def read_bars(path: str) -> list[BarRecord]:
    rows = _open_rows(path, _BAR_COLUMNS)
    out = []
    for i, row in enumerate(rows, start=2):
        out.append(BarRecord(
            timestamp=parse_timestamp(row["timestamp"]),
            open=_cell_float(row, "open", path, i),
            high=_cell_float(row, "high", path, i),
            low=_cell_float(row, "low", path, i),
            close=_cell_float(row, "close", path, i),
            volume=_cell_float(row, "volume", path, i),
        ))
    return out


def read_curve(
    path: str,
    quantile_level: float,
    source: CurveSource,
    min_count: int = 20,
) -> SpreadVolumeCurve:
    """Rebuild a curve from its CSV; flags are recomputed from the counts."""
    rows = _open_rows(path, _CURVE_COLUMNS)
    if not rows:
        raise InputFormatError(f"{path}: curve has no buckets")
    buckets = []
    accepted = 0
    for i, row in enumerate(rows, start=2):
        raw_count = row.get("count", "")
        try:
            count = int(raw_count)
        except ValueError as exc:
            raise InputFormatError(
                f"{path}:{i}: bad value {raw_count!r} in column 'count'"
            ) from exc
        spread_q = _cell_float(row, "spread_q", path, i)
        accepted += count
        buckets.append(CurveBucket(
            v_lo=_cell_float(row, "v_lo", path, i),
            v_hi=_cell_float(row, "v_hi", path, i),
            v_mid=_cell_float(row, "v_mid", path, i),
            spread_q=spread_q,
            count=count,
            flagged=count < min_count or not math.isfinite(spread_q),
        ))
    return SpreadVolumeCurve(
        buckets=tuple(buckets), quantile_level=quantile_level,
        source=source, n_accepted=accepted, n_rejected=0,
    )


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------

def _write_lines(path: str, header: Sequence[str],
                 rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_bars_csv(path: str, series: BarSeries) -> None:
    """Serialize a bar series to OHLC rows.

    The open is the bar mid (start-of-bar anchor of the walk), the close is
    the last price; high/low are widened to contain both so every row is a
    well-formed OHLC bar even when the placement rule leaves the envelope.
    """
    def rows():
        for i in range(len(series)):
            o = series.s_mid[i]
            c = series.s_last[i]
            hi = max(series.s_high[i], o, c)
            lo = min(series.s_low[i], o, c)
            yield (str(i), format_float(o), format_float(hi),
                   format_float(lo), format_float(c),
                   format_float(series.volume[i]))

    _write_lines(path, _BAR_COLUMNS, rows())


def write_trades_csv(path: str, trades: Sequence[TradeRecord]) -> None:
    _write_lines(path, _TRADE_COLUMNS, (
        (format_float(t.timestamp), format_float(t.price), format_float(t.size))
        for t in trades
    ))


def write_quotes_csv(path: str, quotes: Sequence[QuoteRecord]) -> None:
    _write_lines(path, _QUOTE_COLUMNS, (
        (format_float(q.timestamp), format_float(q.bid), format_float(q.ask))
        for q in quotes
    ))


def write_curve_csv(path: str, curve: SpreadVolumeCurve) -> None:
    _write_lines(path, _CURVE_COLUMNS, (
        (format_float(b.v_lo), format_float(b.v_hi), format_float(b.v_mid),
         format_float(b.spread_q), str(b.count))
        for b in curve.buckets
    ))


def write_histogram_csv(path: str, curve: SpreadVolumeCurve) -> None:
    """Sidecar trade-frequency histogram over the curve's volume buckets."""
    _write_lines(path, ("v_lo", "v_hi", "count"), (
        (format_float(b.v_lo), format_float(b.v_hi), str(b.count))
        for b in curve.buckets
    ))


def write_overlay_csv(path: str, curve: SpreadVolumeCurve,
                      model_values: Sequence[float]) -> None:
    """Data buckets next to the fitted model, for plotting the fit quality."""
    usable = curve.usable()
    if len(usable) != len(model_values):
        raise ValueError(
            f"{len(model_values)} model values for {len(usable)} usable buckets"
        )
    _write_lines(path, ("v_mid", "spread_q", "spread_model"), (
        (format_float(b.v_mid), format_float(b.spread_q), format_float(m))
        for b, m in zip(usable, model_values)
    ))


def write_policy_csv(path: str, policy: QuotePolicy) -> None:
    def rows():
        for i in range(len(policy.v)):
            yield (
                format_float(policy.v[i]),
                format_float(policy.lambda_opt[i]),
                format_float(policy.spread_opt[i]),
                format_float(policy.exec_rate[i]),
                format_float(policy.pnl_opt[i]),
                format_float(policy.pnl_naive[i]),
                str(int(policy.halt[i])),
            )

    _write_lines(path, _POLICY_COLUMNS, rows())


def write_scale_csv(path: str, rows: Sequence[tuple[float, float, float]]) -> None:
    _write_lines(path, ("T", "delta_quantum", "delta_classical"), (
        (format_float(t), format_float(q), format_float(c))
        for t, q, c in rows
    ))


def write_surface_csv(path: str, t_grid: Sequence[float],
                      v_grid: Sequence[float], surface: np.ndarray) -> None:
    """Grid rows `T,v,delta` with horizons in the outer loop."""
    surface = np.asarray(surface)
    if surface.shape != (len(t_grid), len(v_grid)):
        raise ValueError(
            f"surface shape {surface.shape} does not match grids "
            f"({len(t_grid)}, {len(v_grid)})"
        )

    def rows():
        for i, t in enumerate(t_grid):
            for j, v in enumerate(v_grid):
                yield (format_float(t), format_float(v),
                       format_float(surface[i, j]))

    _write_lines(path, ("T", "v", "delta"), rows())


# --------------------------------------------------------------------------
# JSON reports
# --------------------------------------------------------------------------

def _plain(value):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no NaN/Infinity; reports store them as strings.
        return repr(value)
    return value


def write_json_report(path: str, payload: dict) -> None:
    """UTF-8 JSON with sorted keys and a trailing newline; no wall-clock data."""
    text = json.dumps(_plain(payload), sort_keys=True, indent=2,
                      ensure_ascii=False, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_json_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}: invalid JSON: {exc}") from exc
