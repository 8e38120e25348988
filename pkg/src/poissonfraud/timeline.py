"""Per-client transaction timelines: CSV ingestion, time normalization, splitting."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SECONDS_PER_DAY = 86400.0
TIE_EPSILON = 1e-9  # days added to break identical timestamps
DEFAULT_SCHEMA = {"client_id": "client_id", "timestamp": "timestamp", "label": "label"}
CSV_EPOCH = datetime(2015, 9, 1, tzinfo=timezone.utc)


class IngestError(ValueError):
    """A CSV record could not be parsed."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class TransactionRecord:
    client_id: str
    timestamp: datetime
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True, eq=False)
class EventTimeline:
    """One client's transactions in days since the first transaction.

    ``times`` and ``labels`` are read-only arrays. ``horizon`` is the time of
    the last observed transaction in the segment.
    """

    client_id: str
    times: np.ndarray
    labels: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        labels = np.array(self.labels, dtype=np.int8).reshape(-1)
        if times.shape != labels.shape:
            raise ValueError("times and labels must have equal length")
        if times.size and (not np.all(np.isfinite(times)) or times[0] < 0):
            raise ValueError("times must be finite and nonnegative")
        if np.any(np.diff(times) < 0):
            raise ValueError("times must be nondecreasing")
        if np.any((labels != 0) & (labels != 1)):
            raise ValueError("labels must be 0 or 1")
        horizon = float(self.horizon)
        if times.size and horizon < times[-1]:
            raise ValueError("horizon precedes the last event")
        times.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "horizon", horizon)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def n_frauds(self) -> int:
        return int(self.labels.sum())

    @classmethod
    def from_events(cls, client_id: str, times: Sequence[float], labels: Sequence[int]) -> "EventTimeline":
        times = np.asarray(times, dtype=np.float64)
        horizon = float(times[-1]) if times.size else 0.0
        return cls(client_id, times, np.asarray(labels), horizon)

    def segment(self, start: int, stop: int) -> "EventTimeline":
        """Events ``start:stop`` with the horizon set to the last kept event."""
        times = self.times[start:stop]
        horizon = float(times[-1]) if times.size else 0.0
        return EventTimeline(self.client_id, times, self.labels[start:stop], horizon)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def parse_timestamp(value: str) -> datetime:
    """Parse ISO-8601 or epoch seconds; naive values are taken as UTC."""
    text = value.strip()
    try:
        seconds = float(text)
    except ValueError:
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        stamp = datetime.fromisoformat(text)
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        return stamp
    if not math.isfinite(seconds):
        raise ValueError(f"non-finite epoch value {value!r}")
    return datetime.fromtimestamp(0, tz=timezone.utc) + timedelta(seconds=seconds)


def _parse_label(value: str) -> int:
    text = value.strip()
    if text in ("0", "1"):
        return int(text)
    try:
        number = float(text)
    except ValueError:
        raise ValueError(f"label {value!r} is not 0 or 1") from None
    if number not in (0.0, 1.0):
        raise ValueError(f"label {value!r} is not 0 or 1")
    return int(number)


def read_records(path: str | Path, schema: Mapping[str, str] | None = None) -> list[TransactionRecord]:
    columns = {**DEFAULT_SCHEMA, **(schema or {})}
    records: list[TransactionRecord] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return records
        missing = [columns[k] for k in ("client_id", "timestamp", "label") if columns[k] not in reader.fieldnames]
        if missing:
            raise IngestError(1, f"missing column(s) {', '.join(missing)}")
        for row in reader:
            line = reader.line_num
            try:
                stamp = parse_timestamp(row[columns["timestamp"]] or "")
            except (ValueError, OverflowError) as exc:
                raise IngestError(line, f"bad timestamp: {exc}") from None
            try:
                label = _parse_label(row[columns["label"]] or "")
            except ValueError as exc:
                raise IngestError(line, str(exc)) from None
            records.append(TransactionRecord(row[columns["client_id"]], stamp, label))
    return records


def build_timelines(records: Iterable[TransactionRecord]) -> list[EventTimeline]:
    """Group records by client, sort by time (stable) and normalize to days."""
    by_client: "OrderedDict[str, list[TransactionRecord]]" = OrderedDict()
    for record in records:
        by_client.setdefault(record.client_id, []).append(record)
    timelines = []
    for client_id, rows in by_client.items():
        rows = sorted(rows, key=lambda r: r.timestamp)
        origin = rows[0].timestamp
        times = np.array([(r.timestamp - origin).total_seconds() / SECONDS_PER_DAY for r in rows])
        for i in range(1, times.size):
            if times[i] <= times[i - 1]:
                times[i] = times[i - 1] + TIE_EPSILON
        timelines.append(EventTimeline.from_events(client_id, times, [r.label for r in rows]))
    return timelines


def ingest_csv(path: str | Path, schema: Mapping[str, str] | None = None) -> list[EventTimeline]:
    """Read a transaction CSV into one timeline per client (first-seen order).

    Raises :class:`IngestError` carrying the offending line number on the
    first bad record.
    """
    return build_timelines(read_records(path, schema))


def format_timestamp(days: float, origin: datetime = CSV_EPOCH) -> str:
    stamp = origin + timedelta(microseconds=round(days * SECONDS_PER_DAY * 1e6))
    return stamp.isoformat(timespec="microseconds").replace("+00:00", "Z")


def write_csv(timelines: Iterable[EventTimeline], path: str | Path, origin: datetime = CSV_EPOCH) -> None:
    """Write timelines in the ingest schema, with day 0 mapped to ``origin``."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["client_id", "timestamp", "label"])
        for timeline in timelines:
            for t, y in zip(timeline.times, timeline.labels):
                writer.writerow([timeline.client_id, format_timestamp(float(t), origin), int(y)])


def split_index(n_events: int, spec: SplitSpec = SplitSpec()) -> int:
    """Number of training events: ceil(n * fraction), kept within [1, n - 1]."""
    if n_events < 2:
        raise ValueError("a split needs at least 2 events")
    n_train = math.ceil(n_events * spec.train_fraction - 1e-9)
    return min(max(n_train, 1), n_events - 1)


def split(timeline: EventTimeline, spec: SplitSpec = SplitSpec()) -> tuple[EventTimeline, EventTimeline]:
    """Split by transaction count. Test times keep the original clock."""
    k = split_index(len(timeline), spec)
    return timeline.segment(0, k), timeline.segment(k, len(timeline))


def fraud_times(timeline: EventTimeline) -> np.ndarray:
    return timeline.times[timeline.labels == 1]
