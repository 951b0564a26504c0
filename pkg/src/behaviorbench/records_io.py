"""Reading and writing behavior records.

Two on-disk shapes: the dataset CSV (one row per record, header mandatory,
empty field = missing value) and the append-only JSON-lines store that the
ingest path writes instead of a cloud database.
"""

from __future__ import annotations

import csv
import json
from typing import Optional, Sequence

from . import datamodel as dm
from .errors import EmptyInput

# Full CSV header, in order. beacon_mac rides along as metadata even though
# only the beacon name is a feature.
_ENV_CSV_COLUMNS = (
    "gps_latitude", "gps_longitude",
    "beacon_rssi", "beacon_mac", "beacon_name",
) + tuple(f"alps_{c}" for c in dm.ALPS_CHANNELS) \
  + tuple(f"weather_{f}" for f in dm.WEATHER_FIELDS) \
  + ("stamp_season", "stamp_year", "stamp_month", "stamp_day",
     "stamp_hour", "stamp_minute", "stamp_second")

CSV_COLUMNS = (
    ("record_id", "child_id", "session_id", "gender", "condition")
    + tuple(f"major_{n}" for n in dm.MAJOR_CATEGORIES)
    + tuple(f"minor_{n}" for n in dm.MINOR_CATEGORIES)
    + _ENV_CSV_COLUMNS
    + ("class7", "class3", "class2")
)

_INT_COLUMNS = frozenset(
    {"child_id", "beacon_rssi", "weather_condition", "weather_description",
     "stamp_year", "stamp_month", "stamp_day", "stamp_hour", "stamp_minute",
     "stamp_second"}
    | {f"major_{n}" for n in dm.MAJOR_CATEGORIES}
    | {f"minor_{n}" for n in dm.MINOR_CATEGORIES}
)

_STR_COLUMNS = frozenset({
    "record_id", "session_id", "gender", "condition", "beacon_mac",
    "beacon_name", "stamp_season", "class7", "class3", "class2",
})


def record_to_row(record: dm.BehaviorRecord) -> dict:
    row = {
        "record_id": record.record_id,
        "child_id": record.child_id,
        "session_id": record.session_id,
        "gender": record.characteristics.gender,
        "condition": record.characteristics.condition,
        "class7": record.labels.class7,
        "class3": record.labels.class3,
        "class2": record.labels.class2,
    }
    for n in dm.MAJOR_CATEGORIES:
        row[f"major_{n}"] = getattr(record.major, n)
    for n in dm.MINOR_CATEGORIES:
        row[f"minor_{n}"] = getattr(record.minor, n)
    row.update(dm.env_values(record))
    row["beacon_mac"] = record.env.beacon.mac if record.env.beacon else None
    return row


def _parse_cell(name: str, text: str):
    if text == "":
        return None
    if name in _STR_COLUMNS:
        return text
    if name in _INT_COLUMNS:
        return int(text)
    return float(text)


def row_to_record(row: dict) -> dm.BehaviorRecord:
    return dm.BehaviorRecord(
        record_id=row["record_id"],
        child_id=row["child_id"],
        session_id=row["session_id"],
        characteristics=dm.ChildCharacteristics(row["gender"], row["condition"]),
        major=dm.MajorCategoryFlags(**{n: row[f"major_{n}"] for n in dm.MAJOR_CATEGORIES}),
        minor=dm.MinorCategoryFlags(**{n: row[f"minor_{n}"] for n in dm.MINOR_CATEGORIES}),
        env=dm.snapshot_from_flat(row),
        labels=dm.OutcomeLabels(row["class7"], row["class3"], row["class2"]),
    )


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(records: Sequence[dm.BehaviorRecord], path) -> None:
    if not records:
        raise EmptyInput("no records to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            row = record_to_row(rec)
            writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])


def read_csv(path) -> list:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{path}: empty dataset file") from None
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: header does not match the dataset schema")
        records = []
        for cells in reader:
            row = {name: _parse_cell(name, text)
                   for name, text in zip(CSV_COLUMNS, cells)}
            records.append(row_to_record(row))
    if not records:
        raise EmptyInput(f"{path}: no records")
    return records


def write_matrix_csv(matrix, path) -> None:
    """Feature matrix as CSV: named numeric columns plus a final `label`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(matrix.column_names) + ["label"])
        for row, label in zip(matrix.values, matrix.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_matrix_csv(path, class_level=None):
    """Load a feature-matrix CSV; infers the class level when not given."""
    import numpy as np

    from .datamodel import FeatureMatrix

    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected a trailing 'label' column")
        names = tuple(header[:-1])
        values = []
        labels = []
        for cells in reader:
            values.append([float(v) for v in cells[:-1]])
            labels.append(int(cells[-1]))
    if not values:
        raise EmptyInput(f"{path}: no rows")
    labels_arr = np.array(labels, dtype=np.int64)
    if class_level is None:
        observed = int(labels_arr.max()) + 1
        candidates = [lvl for lvl in (2, 3, 7) if lvl >= observed]
        if not candidates:
            raise ValueError(f"{path}: labels exceed the largest class level (7)")
        class_level = candidates[0]
    return FeatureMatrix(names, np.array(values, dtype=float), labels_arr,
                         class_level)


class RecordStore:
    """Append-only JSON-lines persistence for ingested records.

    Single-writer by contract; concurrent batch ingests must partition by
    session before writing.
    """

    def __init__(self, path):
        self.path = path

    def append(self, record: dm.BehaviorRecord) -> None:
        row = record_to_row(record)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    def load(self) -> list:
        records = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(row_to_record(json.loads(line)))
        return records
