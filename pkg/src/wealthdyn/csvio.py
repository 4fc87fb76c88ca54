"""CSV schemas for simulation snapshots, rankings, statistics and fits.

All writers emit deterministic byte-identical output for identical inputs
(shortest round-trip float formatting, fixed column order). Paths may be
given as str/Path or as open text files; "-" means standard output.
"""

from __future__ import annotations

import csv
import io
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from wealthdyn.engine import WealthSnapshot
from wealthdyn.errors import DataError
from wealthdyn.rankstats import CorrelationSeries, RankingSnapshot
from wealthdyn.richlist import RichListRecord, RichListReport
from wealthdyn.timeseries import FitResult

SNAPSHOT_HEADER = ["k", "agent_id", "wealth", "normalized"]
RANKING_HEADER = ["time", "identity", "rank", "tied"]
CORRELATION_HEADER = ["k", "x_tau_rho", "x_overlap", "tau", "rho", "gamma", "omega"]
FIT_HEADER = ["param", "value", "stderr"]
GINI_CURVE_HEADER = ["alpha", "G"]
GINI_TRACE_HEADER = ["k", "k_sigma2", "gini"]
OVERLAP_HEADER = ["k", "x_overlap", "omega"]
SERIES_HEADER = ["k", "value"]
RICHLIST_HEADER = ["year", "rank", "name"]
ALIAS_HEADER = ["alias", "canonical"]
RICHLIST_REPORT_HEADER = ["base_year", "target_year", "tau", "rho", "gamma", "overlap"]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@contextmanager
def _open_write(target) -> Iterator:
    if hasattr(target, "write"):
        yield target
    elif str(target) == "-":
        yield sys.stdout
    else:
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            yield handle


@contextmanager
def _open_read(source) -> Iterator:
    if hasattr(source, "read"):
        yield source
    else:
        with open(source, "r", newline="") as handle:
            yield handle


def _write_rows(target, header: list[str], rows: Iterable[Iterable]) -> None:
    with _open_write(target) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def _check_header(actual: list[str] | None, expected: list[str], what: str) -> None:
    if actual is None or [h.strip() for h in actual] != expected:
        raise DataError(f"{what}: expected header {','.join(expected)}, got {actual}")


def write_snapshots_csv(target, snapshots: Iterable[WealthSnapshot]) -> None:
    def rows():
        for snap in snapshots:
            for agent_id in range(snap.wealth.size):
                yield (snap.time_index, agent_id, snap.wealth[agent_id], snap.normalized[agent_id])

    _write_rows(target, SNAPSHOT_HEADER, rows())


def write_ranking_csv(target, snapshots: Iterable[RankingSnapshot]) -> None:
    def rows():
        for snap in snapshots:
            for i in range(snap.size):
                yield (snap.time_label, str(snap.ids[i]), snap.ranks[i], snap.tied[i])

    _write_rows(target, RANKING_HEADER, rows())


def write_correlation_csv(target, series: CorrelationSeries) -> None:
    rows = zip(
        series.lags.astype(int),
        series.x_tau_rho,
        series.x_overlap,
        series.tau,
        series.rho,
        series.gamma,
        series.omega,
    )
    _write_rows(target, CORRELATION_HEADER, rows)


def write_fit_csv(target, rows: Mapping[str, tuple[float, float]]) -> None:
    """Rows of param -> (value, stderr)."""
    _write_rows(target, FIT_HEADER, ((name, v, e) for name, (v, e) in rows.items()))


def fit_result_rows(fit: FitResult) -> dict[str, tuple[float, float]]:
    rows = {name: (fit.params[name], fit.std_errors[name]) for name in fit.params}
    rows["residual_norm"] = (fit.residual_norm, 0.0)
    rows["n_points"] = (float(fit.n_points), 0.0)
    return rows


def write_gini_curve_csv(target, curve) -> None:
    _write_rows(target, GINI_CURVE_HEADER, ((a, g.value) for a, g in curve))


def write_gini_trace_csv(target, ks, sigma: float, ginis) -> None:
    rows = ((int(k), k * sigma * sigma, g) for k, g in zip(ks, ginis))
    _write_rows(target, GINI_TRACE_HEADER, rows)


def write_overlap_csv(target, lags_steps, x_overlap, omega) -> None:
    _write_rows(target, OVERLAP_HEADER, zip((int(k) for k in lags_steps), x_overlap, omega))


def read_series_csv(source) -> tuple[np.ndarray, np.ndarray]:
    """Read a k,value series; returns (k, value) arrays."""
    with _open_read(source) as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        _check_header(header, SERIES_HEADER, "series csv")
        ks, values = [], []
        for row in reader:
            if not row:
                continue
            ks.append(float(row[0]))
            values.append(float(row[1]))
    if not ks:
        raise DataError("series csv has no rows")
    return np.asarray(ks), np.asarray(values)


def read_columns_csv(source, columns: list[str]) -> dict[str, np.ndarray]:
    """Read named numeric columns from a CSV with arbitrary extra columns."""
    with _open_read(source) as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"csv lacks required columns {missing}; has {reader.fieldnames}")
        data: dict[str, list[float]] = {c: [] for c in columns}
        for row in reader:
            for c in columns:
                data[c].append(float(row[c]))
    if not data[columns[0]]:
        raise DataError("csv has no data rows")
    return {c: np.asarray(v) for c, v in data.items()}


def read_richlist_csv(source) -> list[RichListRecord]:
    with _open_read(source) as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        _check_header(header, RICHLIST_HEADER, "rich-list csv")
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"rich-list csv line {line_no}: expected 3 fields, got {len(row)}")
            try:
                year, rank = int(row[0]), int(row[1])
            except ValueError as exc:
                raise DataError(f"rich-list csv line {line_no}: bad year/rank {row[:2]}") from exc
            records.append(RichListRecord(year, rank, row[2]))
    if not records:
        raise DataError("rich-list csv has no rows")
    return records


def read_alias_csv(source) -> dict[str, str]:
    with _open_read(source) as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        _check_header(header, ALIAS_HEADER, "alias csv")
        aliases = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"alias csv: expected 2 fields, got {row}")
            aliases[row[0]] = row[1]
    return aliases


def write_richlist_report_csv(target, report: RichListReport) -> None:
    def rows():
        for year in report.years:
            yield (
                report.base_year,
                year,
                report.tau[year],
                report.rho[year],
                report.gamma[year],
                report.overlap[year],
            )

    _write_rows(target, RICHLIST_REPORT_HEADER, rows())


COLLAPSE_HEADER = ["curve_a", "curve_b", "deviation"]


def write_collapse_csv(target, report) -> None:
    """Pairwise collapse deviations plus a final max row."""
    rows = [(a, b, dev) for (a, b), dev in sorted(report.pair_deviations.items())]
    rows.append(("max", "", report.max_pairwise_deviation))
    _write_rows(target, COLLAPSE_HEADER, rows)


def format_csv(writer_fn, *args) -> str:
    """Render any writer above into a string (testing convenience)."""
    buffer = io.StringIO()
    writer_fn(buffer, *args)
    return buffer.getvalue()
