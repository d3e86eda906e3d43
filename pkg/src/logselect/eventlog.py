"""Event-log ingestion: CSV parsing, case grouping, and scenario labels.

An event log is an ordered list of records, each carrying a case id, an
activity label and an order key (ISO-8601 timestamp or plain integer).
Records are grouped into cases whose traces are the activity sequences
sorted by (order key, file position); the virtual start/end activities
used by feature extraction live at fixed sentinel indices outside the
alphabet.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    BadOrderKey,
    EmptyField,
    LengthMismatch,
    MissingColumn,
    NonTemporalOrderKey,
    ValidationError,
)

#: Sentinel activity indices, outside any alphabet range.
START = -1
END = -2

OrderKey = Union[datetime, int]


@dataclass(frozen=True)
class CsvSchema:
    """Column-name mapping for CSV event logs."""

    case_col: str
    activity_col: str
    order_col: str
    attr_cols: tuple[str, ...] = ()


@dataclass(frozen=True)
class EventRecord:
    case_id: str
    activity: str
    order_key: OrderKey
    attributes: Mapping[str, str] = field(default_factory=dict)


@dataclass
class Case:
    """All events of one case id, as an index trace into the log alphabet."""

    id: str
    trace: list[int]
    order_keys: list[OrderKey]
    start_time: datetime | None
    end_time: datetime | None
    attributes: dict[str, str]

    def __len__(self) -> int:
        return len(self.trace)


@dataclass
class EventLog:
    alphabet: list[str]
    cases: list[Case]
    temporal: bool
    attr_keys: tuple[str, ...] = ()

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    def activity_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.alphabet)}

    def case_ids(self) -> list[str]:
        return [c.id for c in self.cases]


class LabelVector:
    """One boolean outcome per case, aligned to the log's case order."""

    def __init__(self, values: Iterable[bool]):
        self.values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=bool)

    @property
    def positive_count(self) -> int:
        return int(self.values.sum())

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelVector) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"LabelVector(n={len(self)}, positives={self.positive_count})"


def _parse_timestamp(text: str) -> datetime:
    # fromisoformat on 3.10 rejects a trailing Z; normalise it first.
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def parse_csv(source: Union[str, bytes, IO], schema: CsvSchema) -> list[EventRecord]:
    """Read a UTF-8 CSV with a header row into EventRecords, in file order.

    The order-key mode (integer vs ISO-8601 timestamp) is fixed by the
    first data row; later rows that do not parse in that mode raise
    :class:`BadOrderKey` with their 1-based data-row number.
    """
    if isinstance(source, (str, bytes)):
        text = source.decode("utf-8") if isinstance(source, bytes) else source
        f: IO = io.StringIO(text)
    elif isinstance(source.read(0), bytes):  # binary stream
        f = io.TextIOWrapper(source, encoding="utf-8")
    else:
        f = source

    reader = csv.reader(f)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("CSV source is empty (no header row)")

    col_pos: dict[str, int] = {name: i for i, name in enumerate(header)}
    for name in (schema.case_col, schema.activity_col, schema.order_col, *schema.attr_cols):
        if name not in col_pos:
            raise MissingColumn(name)

    ci = col_pos[schema.case_col]
    ai = col_pos[schema.activity_col]
    oi = col_pos[schema.order_col]

    records: list[EventRecord] = []
    temporal: bool | None = None
    for row_no, row in enumerate(reader, start=1):
        if not row or all(cell == "" for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        case_id, activity, raw_key = row[ci], row[ai], row[oi]
        if case_id == "":
            raise EmptyField(row_no, schema.case_col)
        if activity == "":
            raise EmptyField(row_no, schema.activity_col)
        if raw_key == "":
            raise EmptyField(row_no, schema.order_col)

        if temporal is None:
            try:
                int(raw_key)
                temporal = False
            except ValueError:
                try:
                    _parse_timestamp(raw_key)
                    temporal = True
                except ValueError:
                    raise BadOrderKey(row_no, raw_key)
        try:
            key: OrderKey = _parse_timestamp(raw_key) if temporal else int(raw_key)
        except ValueError:
            raise BadOrderKey(row_no, raw_key)

        attrs = {}
        for name in schema.attr_cols:
            value = row[col_pos[name]]
            if value != "":
                attrs[name] = value
        records.append(EventRecord(case_id, activity, key, attrs))
    return records


def build_log(events: Sequence[EventRecord]) -> EventLog:
    """Group events into cases with deterministic traces.

    Traces are the stable sort of each case's events by (order key,
    input position); case order is first appearance in the input; the
    alphabet is the lexicographically sorted set of activity labels.
    Case attributes merge event attributes, last non-empty value wins.
    """
    if not events:
        return EventLog(alphabet=[], cases=[], temporal=True)

    temporal = isinstance(events[0].order_key, datetime)
    for pos, ev in enumerate(events):
        if isinstance(ev.order_key, datetime) != temporal:
            raise BadOrderKey(pos + 1, str(ev.order_key))

    by_case: dict[str, list[tuple[int, EventRecord]]] = {}
    for pos, ev in enumerate(events):
        by_case.setdefault(ev.case_id, []).append((pos, ev))

    alphabet = sorted({ev.activity for ev in events})
    index = {a: i for i, a in enumerate(alphabet)}
    attr_keys: set[str] = set()

    cases: list[Case] = []
    for case_id, entries in by_case.items():
        entries.sort(key=lambda pe: pe[1].order_key)  # stable: ties keep input order
        trace = [index[ev.activity] for _, ev in entries]
        keys = [ev.order_key for _, ev in entries]
        attrs: dict[str, str] = {}
        for _, ev in entries:
            for k, v in ev.attributes.items():
                if v != "":
                    attrs[k] = v
        attr_keys.update(attrs)
        cases.append(
            Case(
                id=case_id,
                trace=trace,
                order_keys=keys,
                start_time=keys[0] if temporal else None,
                end_time=keys[-1] if temporal else None,
                attributes=attrs,
            )
        )
    return EventLog(alphabet=alphabet, cases=cases, temporal=temporal, attr_keys=tuple(sorted(attr_keys)))


def load_event_log(path: str, schema: CsvSchema) -> EventLog:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return build_log(parse_csv(f, schema))


def label_by_duration(log: EventLog, threshold: timedelta) -> LabelVector:
    """True where a case spans strictly more than `threshold`."""
    if not log.temporal:
        raise NonTemporalOrderKey()
    return LabelVector([(c.end_time - c.start_time) > threshold for c in log.cases])


def label_by_attribute(log: EventLog, attr: str, value: str) -> LabelVector:
    """True where a case carries `attr` exactly equal to `value`."""
    return LabelVector([c.attributes.get(attr) == value for c in log.cases])


_DURATION_UNITS = {"w": 7 * 86400, "d": 86400, "h": 3600, "m": 60, "s": 1}


def parse_duration(text: str) -> timedelta:
    """Parse durations like ``7d``, ``168h``, ``20w``, ``90m``, ``15s``."""
    text = text.strip()
    if len(text) < 2 or text[-1] not in _DURATION_UNITS:
        raise ValidationError(f"cannot parse duration {text!r} (use e.g. 7d, 168h, 20w)")
    try:
        amount = float(text[:-1])
    except ValueError:
        raise ValidationError(f"cannot parse duration {text!r}")
    return timedelta(seconds=amount * _DURATION_UNITS[text[-1]])


CANONICAL_SCHEMA = CsvSchema(case_col="case", activity_col="activity", order_col="order")


def write_canonical_csv(log: EventLog, f: IO) -> None:
    """Emit the log as CSV such that re-parsing reproduces it exactly.

    Cases appear in case order, events in trace order with their order
    keys; case attributes are repeated on every event row of the case.
    """
    attr_cols = list(log.attr_keys)
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow([CANONICAL_SCHEMA.case_col, CANONICAL_SCHEMA.activity_col, CANONICAL_SCHEMA.order_col, *attr_cols])
    for case in log.cases:
        attr_values = [case.attributes.get(k, "") for k in attr_cols]
        for act_idx, key in zip(case.trace, case.order_keys):
            key_text = key.isoformat() if isinstance(key, datetime) else str(key)
            writer.writerow([case.id, log.alphabet[act_idx], key_text, *attr_values])


def canonical_schema_for(log: EventLog) -> CsvSchema:
    return CsvSchema(
        case_col=CANONICAL_SCHEMA.case_col,
        activity_col=CANONICAL_SCHEMA.activity_col,
        order_col=CANONICAL_SCHEMA.order_col,
        attr_cols=tuple(log.attr_keys),
    )


def labels_aligned(log: EventLog, case_ids: Sequence[str], flags: Sequence[bool]) -> LabelVector:
    """Build a LabelVector from (case id, flag) pairs, aligned to the log."""
    if len(case_ids) != len(flags):
        raise LengthMismatch(len(case_ids), len(flags))
    lookup = dict(zip(case_ids, flags))
    missing = [c.id for c in log.cases if c.id not in lookup]
    if missing:
        raise ValidationError(f"labels missing for {len(missing)} cases (first: {missing[0]!r})")
    return LabelVector([bool(lookup[c.id]) for c in log.cases])
