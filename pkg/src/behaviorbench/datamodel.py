"""Record types, outcome-class hierarchy, dataset combinations, and encoding.

Everything downstream (imputation, selection, learners, the experiment grid)
consumes the types defined here. All types are immutable after construction
and safe to share across workers.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, MissingDataError

GENDERS = ("female", "male")
CONDITIONS = ("PIMD_SMID", "severe_profound_ID")

SEASONS = ("spring", "summer", "autumn", "winter")

# Months 3-5 spring, 6-8 summer, 9-11 autumn, 12/1/2 winter.
_SEASON_BY_MONTH = {
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "autumn", 10: "autumn", 11: "autumn",
    12: "winter", 1: "winter", 2: "winter",
}

MAJOR_CATEGORIES = (
    "eye_movement",
    "facial_expression",
    "vocalization",
    "hand_movement",
    "body_movement",
    "non_communicative",
)

MINOR_CATEGORIES = (
    "gazing",
    "eye_tracking",
    "changing_line_of_sight",
    "opening_closing_eyelids",
    "smiling",
    "facial_expression_other",
    "concentrating_listening",
    "vocalization",
    "pointing",
    "reaching",
    "moving",
    "approaching",
    "contacting",
    "body_part_movement",
    "stereotypical",
    "injurious",
)

# Which minor flags roll up into each major flag.
MAJOR_TO_MINORS = {
    "eye_movement": ("gazing", "eye_tracking", "changing_line_of_sight",
                     "opening_closing_eyelids"),
    "facial_expression": ("smiling", "facial_expression_other",
                          "concentrating_listening"),
    "vocalization": ("vocalization",),
    "hand_movement": ("pointing", "reaching", "moving"),
    "body_movement": ("approaching", "contacting", "body_part_movement"),
    "non_communicative": ("stereotypical", "injurious"),
}

CLASS7 = ("calling", "response", "emotions", "interest", "negative",
          "selecting", "physiological_response")
CLASS3 = ("response", "action", "response_or_action")
CLASS2 = ("response", "action")

CLASS_NAMES = {2: CLASS2, 3: CLASS3, 7: CLASS7}

# Default outcome-level mappings. The study data defines these operationally;
# they ship as an editable mapping (see load_label_map) with these assumptions:
# only "response" maps straight down, everything else lands on an
# action-bearing branch.
DEFAULT_LABEL_MAP = {
    "class7_to_class3": {
        "calling": "response_or_action",
        "response": "response",
        "emotions": "response_or_action",
        "interest": "response_or_action",
        "negative": "action",
        "selecting": "action",
        "physiological_response": "action",
    },
    "class3_to_class2": {
        "response": "response",
        "action": "action",
        "response_or_action": "response",
    },
}


def load_label_map(path=None) -> dict:
    """Load an outcome-level mapping, falling back to the built-in default."""
    if path is None:
        return {k: dict(v) for k, v in DEFAULT_LABEL_MAP.items()}
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    mapping = {"class7_to_class3": dict(raw["class7_to_class3"]),
               "class3_to_class2": dict(raw["class3_to_class2"])}
    _validate_label_map(mapping)
    return mapping


def _validate_label_map(mapping: dict) -> None:
    m73 = mapping["class7_to_class3"]
    m32 = mapping["class3_to_class2"]
    if set(m73) != set(CLASS7):
        raise ValueError("class7_to_class3 must cover exactly the 7 outcomes")
    if not set(m73.values()) <= set(CLASS3):
        raise ValueError("class7_to_class3 values must be 3-class outcomes")
    if set(m32) != set(CLASS3):
        raise ValueError("class3_to_class2 must cover exactly the 3 outcomes")
    if not set(m32.values()) <= set(CLASS2):
        raise ValueError("class3_to_class2 values must be 2-class outcomes")
    if m32["response"] != "response" or m32["action"] != "action":
        raise ValueError("response and action must map to themselves")


def map_class7_to_class3(label: str, mapping=None) -> str:
    m = (mapping or DEFAULT_LABEL_MAP)["class7_to_class3"]
    return m[label]


def map_class3_to_class2(label: str, mapping=None) -> str:
    m = (mapping or DEFAULT_LABEL_MAP)["class3_to_class2"]
    return m[label]


def season_for_month(month: int) -> str:
    return _SEASON_BY_MONTH[month]


@dataclass(frozen=True)
class ChildCharacteristics:
    """Gender and main condition; encodes to exactly two integer columns."""

    gender: str
    condition: str

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}")
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")


def _check_flags(values, names):
    for name in names:
        v = values[name]
        if v not in (0, 1):
            raise ValueError(f"flag {name!r} must be 0 or 1, got {v!r}")


@dataclass(frozen=True)
class MajorCategoryFlags:
    eye_movement: int
    facial_expression: int
    vocalization: int
    hand_movement: int
    body_movement: int
    non_communicative: int

    def __post_init__(self):
        _check_flags(self.__dict__, MAJOR_CATEGORIES)

    def as_tuple(self):
        return tuple(getattr(self, n) for n in MAJOR_CATEGORIES)


@dataclass(frozen=True)
class MinorCategoryFlags:
    gazing: int
    eye_tracking: int
    changing_line_of_sight: int
    opening_closing_eyelids: int
    smiling: int
    facial_expression_other: int
    concentrating_listening: int
    vocalization: int
    pointing: int
    reaching: int
    moving: int
    approaching: int
    contacting: int
    body_part_movement: int
    stereotypical: int
    injurious: int

    def __post_init__(self):
        _check_flags(self.__dict__, MINOR_CATEGORIES)

    def as_tuple(self):
        return tuple(getattr(self, n) for n in MINOR_CATEGORIES)

    def implied_majors(self) -> MajorCategoryFlags:
        """Major flags obtained by OR-ing each major's minor flags."""
        vals = {maj: int(any(getattr(self, m) for m in minors))
                for maj, minors in MAJOR_TO_MINORS.items()}
        return MajorCategoryFlags(**vals)


@dataclass(frozen=True)
class GpsFix:
    latitude: Optional[float] = None
    longitude: Optional[float] = None

    def __post_init__(self):
        if self.latitude is not None and not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if self.longitude is not None and not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class BeaconObservation:
    """One received beacon: signal strength, hardware address, display name."""

    rssi: Optional[int] = None
    mac: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.rssi is not None and not (-127 <= int(self.rssi) <= 20):
            raise ValueError(f"rssi {self.rssi} dBm not plausible")


# Physical ranges for the eleven motion/environment channels. Values outside
# these bounds are rejected at parse/construction time, never clamped.
ALPS_CHANNELS = (
    "uv_range", "ambient_light",
    "geomag_g1", "geomag_g2", "geomag_g3",
    "geomag_ut1", "geomag_ut2", "geomag_ut3",
    "pressure", "temperature", "humidity",
)

ALPS_RANGES = {
    "uv_range": (0.0, 81900.0),
    "ambient_light": (0.0, 81900.0),
    "geomag_g1": (-2.4, 2.4),
    "geomag_g2": (-2.4, 2.4),
    "geomag_g3": (-2.4, 2.4),
    "geomag_ut1": (-4900.0, 4900.0),
    "geomag_ut2": (-4900.0, 4900.0),
    "geomag_ut3": (-4900.0, 4900.0),
    "pressure": (300.0, 1100.0),
    "temperature": (-20.0, 60.0),
    "humidity": (0.0, 100.0),
}


@dataclass(frozen=True)
class AlpsReading:
    """The 11 sensor channels; any subset may be missing pre-imputation."""

    uv_range: Optional[float] = None
    ambient_light: Optional[float] = None
    geomag_g1: Optional[float] = None
    geomag_g2: Optional[float] = None
    geomag_g3: Optional[float] = None
    geomag_ut1: Optional[float] = None
    geomag_ut2: Optional[float] = None
    geomag_ut3: Optional[float] = None
    pressure: Optional[float] = None
    temperature: Optional[float] = None
    humidity: Optional[float] = None

    def __post_init__(self):
        for name in ALPS_CHANNELS:
            v = getattr(self, name)
            if v is None:
                continue
            low, high = ALPS_RANGES[name]
            if not (low <= v <= high):
                raise ValueError(
                    f"alps channel {name!r} value {v} outside [{low}, {high}]")


WEATHER_FIELDS = (
    "condition", "sunset", "sunrise", "current_time",
    "temp_min", "temp_max", "pressure", "temp_main", "humidity",
    "description", "cloudiness", "wind_direction", "wind_speed",
)


@dataclass(frozen=True)
class WeatherReading:
    """The 13 weather-service features; any subset may be missing."""

    condition: Optional[int] = None
    sunset: Optional[float] = None
    sunrise: Optional[float] = None
    current_time: Optional[float] = None
    temp_min: Optional[float] = None
    temp_max: Optional[float] = None
    pressure: Optional[float] = None
    temp_main: Optional[float] = None
    humidity: Optional[float] = None
    description: Optional[int] = None
    cloudiness: Optional[float] = None
    wind_direction: Optional[float] = None
    wind_speed: Optional[float] = None

    def __post_init__(self):
        if self.wind_direction is not None and not (0.0 <= self.wind_direction < 360.0):
            raise ValueError(f"wind_direction {self.wind_direction} outside [0, 360)")
        if self.wind_speed is not None and self.wind_speed < 0:
            raise ValueError("wind_speed must be non-negative")
        if self.humidity is not None and not (0.0 <= self.humidity <= 100.0):
            raise ValueError("humidity outside [0, 100]")
        if self.cloudiness is not None and not (0.0 <= self.cloudiness <= 100.0):
            raise ValueError("cloudiness outside [0, 100]")
        if (self.sunrise is not None and self.sunset is not None
                and not self.sunrise < self.sunset):
            raise ValueError("sunrise must precede sunset on the same civil day")


@dataclass(frozen=True)
class TimeStamp:
    season: str
    year: int
    month: int
    day: int
    hour: int
    minute: int
    second: int

    def __post_init__(self):
        if self.season not in SEASONS:
            raise ValueError(f"season must be one of {SEASONS}")
        if not (1 <= self.month <= 12):
            raise ValueError("month outside [1, 12]")
        if season_for_month(self.month) != self.season:
            raise ValueError(
                f"season {self.season!r} inconsistent with month {self.month}")
        if not (1 <= self.day <= 31):
            raise ValueError("day outside [1, 31]")
        if not (0 <= self.hour <= 23 and 0 <= self.minute <= 59
                and 0 <= self.second <= 59):
            raise ValueError("time-of-day fields out of range")

    def epoch_seconds(self) -> float:
        """Seconds on a proleptic calendar; only differences matter."""
        days = (self.year * 372 + (self.month - 1) * 31 + (self.day - 1))
        return ((days * 24 + self.hour) * 60 + self.minute) * 60 + self.second


@dataclass(frozen=True)
class EnvironmentSnapshot:
    """GPS fix, beacon observation, sensor reading, weather, timestamp."""

    stamp: TimeStamp
    gps: Optional[GpsFix] = None
    beacon: Optional[BeaconObservation] = None
    alps: Optional[AlpsReading] = None
    weather: Optional[WeatherReading] = None


@dataclass(frozen=True)
class OutcomeLabels:
    class7: str
    class3: str
    class2: str

    def __post_init__(self):
        if self.class7 not in CLASS7:
            raise ValueError(f"class7 label {self.class7!r} not in {CLASS7}")
        if self.class3 not in CLASS3:
            raise ValueError(f"class3 label {self.class3!r} not in {CLASS3}")
        if self.class2 not in CLASS2:
            raise ValueError(f"class2 label {self.class2!r} not in {CLASS2}")

    def code(self, class_level: int) -> int:
        names = CLASS_NAMES[class_level]
        return names.index(getattr(self, f"class{class_level}"))


@dataclass(frozen=True)
class BehaviorRecord:
    """One observed behavior event with all of its context."""

    record_id: str
    child_id: int
    session_id: str
    characteristics: ChildCharacteristics
    major: MajorCategoryFlags
    minor: MinorCategoryFlags
    env: EnvironmentSnapshot
    labels: OutcomeLabels

    def __post_init__(self):
        if not (1 <= self.child_id <= 20):
            raise ValueError("child_id outside [1, 20]")
        if self.minor.implied_majors() != self.major:
            raise ValueError(
                f"record {self.record_id}: major flags are not the OR of "
                f"their minor flags")


# ---------------------------------------------------------------------------
# Environment column schema
# ---------------------------------------------------------------------------

# Canonical environment column order. Names are the flattened CSV/feature
# names; categorical columns expand under encoding.
ENV_COLUMNS = (
    "gps_latitude", "gps_longitude",
    "beacon_rssi", "beacon_name",
    "alps_uv_range", "alps_ambient_light",
    "alps_geomag_g1", "alps_geomag_g2", "alps_geomag_g3",
    "alps_geomag_ut1", "alps_geomag_ut2", "alps_geomag_ut3",
    "alps_pressure", "alps_temperature", "alps_humidity",
    "weather_condition", "weather_sunset", "weather_sunrise",
    "weather_current_time", "weather_temp_min", "weather_temp_max",
    "weather_pressure", "weather_temp_main", "weather_humidity",
    "weather_description", "weather_cloudiness",
    "weather_wind_direction", "weather_wind_speed",
    "stamp_season", "stamp_year", "stamp_month",
    "stamp_day", "stamp_hour", "stamp_minute", "stamp_second",
)

# Beacon name, weather condition/description codes, and the season/year/month
# stamp fields are categories; everything else is plain numeric.
ENV_CATEGORICAL = frozenset({
    "beacon_name", "weather_condition", "weather_description",
    "stamp_season", "stamp_year", "stamp_month",
})

CHARACTERISTIC_COLUMNS = ("gender", "condition")


def env_values(record: BehaviorRecord) -> dict:
    """Flatten a record's environment block to {column: value or None}."""
    env = record.env
    out = {}
    out["gps_latitude"] = env.gps.latitude if env.gps else None
    out["gps_longitude"] = env.gps.longitude if env.gps else None
    out["beacon_rssi"] = env.beacon.rssi if env.beacon else None
    out["beacon_name"] = env.beacon.name if env.beacon else None
    for ch in ALPS_CHANNELS:
        out[f"alps_{ch}"] = getattr(env.alps, ch) if env.alps else None
    for f in WEATHER_FIELDS:
        out[f"weather_{f}"] = getattr(env.weather, f) if env.weather else None
    st = env.stamp
    out["stamp_season"] = st.season
    out["stamp_year"] = st.year
    out["stamp_month"] = st.month
    out["stamp_day"] = st.day
    out["stamp_hour"] = st.hour
    out["stamp_minute"] = st.minute
    out["stamp_second"] = st.second
    return out


def record_is_complete(record: BehaviorRecord) -> bool:
    """True when no environment column is missing."""
    return all(v is not None for v in env_values(record).values())


def snapshot_from_flat(flat: dict) -> EnvironmentSnapshot:
    """Rebuild an EnvironmentSnapshot from flat column values.

    Expects the env_values() keys plus beacon_mac and the stamp_* fields; a
    block is absent only when every one of its leaves is None.
    """
    def block(cls, mapping):
        vals = {f: flat.get(col) for f, col in mapping.items()}
        if all(v is None for v in vals.values()):
            return None
        return cls(**vals)

    gps = block(GpsFix, {"latitude": "gps_latitude", "longitude": "gps_longitude"})
    beacon = block(BeaconObservation,
                   {"rssi": "beacon_rssi", "mac": "beacon_mac", "name": "beacon_name"})
    alps = block(AlpsReading, {c: f"alps_{c}" for c in ALPS_CHANNELS})
    weather = block(WeatherReading, {f: f"weather_{f}" for f in WEATHER_FIELDS})
    stamp = TimeStamp(
        season=flat["stamp_season"], year=flat["stamp_year"],
        month=flat["stamp_month"], day=flat["stamp_day"], hour=flat["stamp_hour"],
        minute=flat["stamp_minute"], second=flat["stamp_second"])
    return EnvironmentSnapshot(stamp=stamp, gps=gps, beacon=beacon,
                               alps=alps, weather=weather)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixFragment:
    """Named numeric columns. Unlike FeatureMatrix, NaN cells are allowed
    (they mark missing values on the way to imputation)."""

    column_names: tuple
    values: np.ndarray

    def __post_init__(self):
        if len(self.column_names) != self.values.shape[1]:
            raise ValueError("column count does not match value width")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class FeatureMatrix:
    """Fully numeric, fully observed design matrix with a label vector."""

    column_names: tuple
    values: np.ndarray
    labels: np.ndarray
    class_level: int

    def __post_init__(self):
        if self.class_level not in (2, 3, 7):
            raise ValueError("class_level must be 2, 3 or 7")
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if len(self.column_names) != self.values.shape[1]:
            raise ValueError("column count does not match value width")
        if len(set(self.column_names)) != len(self.column_names):
            raise ValueError("column names must be unique")
        if self.labels.shape != (self.values.shape[0],):
            raise ValueError("labels length must equal the row count")
        if not np.all(np.isfinite(self.values)):
            raise MissingDataError("feature matrix contains missing or non-finite cells")
        if self.labels.size and not (
                (self.labels >= 0).all() and (self.labels < self.class_level).all()):
            raise ValueError("labels must lie in [0, class_level)")
        self.values.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def select_columns(self, indices) -> "FeatureMatrix":
        idx = list(indices)
        return FeatureMatrix(
            column_names=tuple(self.column_names[i] for i in idx),
            values=np.ascontiguousarray(self.values[:, idx]),
            labels=self.labels.copy(),
            class_level=self.class_level,
        )

    def select_rows(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices)
        return FeatureMatrix(
            column_names=self.column_names,
            values=np.ascontiguousarray(self.values[idx]),
            labels=self.labels[idx].copy(),
            class_level=self.class_level,
        )


def _is_number(v) -> bool:
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


def expand_columns(names: Sequence[str], columns: Sequence[list],
                   categorical: frozenset = frozenset(),
                   mode: str = "both") -> MatrixFragment:
    """Turn raw (possibly categorical, possibly missing) columns into numbers.

    Each categorical column with c observed categories yields, in this order,
    c one-hot columns (category values sorted ascending) and one integer-code
    column using the same sorted order. Numeric columns pass through as-is.
    Missing values become NaN across the column's whole encoded block.
    `mode` selects "onehot", "integer", or "both" outputs for categoricals.
    """
    if mode not in ("both", "onehot", "integer"):
        raise ValueError(f"unknown encoding mode {mode!r}")
    out_names: list = []
    out_cols: list = []
    n = len(columns[0]) if columns else 0
    for name, col in zip(names, columns):
        if name in categorical:
            observed = sorted({v for v in col if v is not None})
            code_of = {v: i for i, v in enumerate(observed)}
            if mode in ("both", "onehot"):
                for cat in observed:
                    vec = np.full(n, np.nan)
                    for i, v in enumerate(col):
                        if v is not None:
                            vec[i] = 1.0 if v == cat else 0.0
                    out_names.append(f"{name}={cat}")
                    out_cols.append(vec)
            if mode in ("both", "integer"):
                vec = np.full(n, np.nan)
                for i, v in enumerate(col):
                    if v is not None:
                        vec[i] = float(code_of[v])
                out_names.append(f"{name}#code")
                out_cols.append(vec)
        else:
            vec = np.full(n, np.nan)
            for i, v in enumerate(col):
                if v is not None:
                    if not _is_number(v):
                        raise ValueError(
                            f"column {name!r} is not declared categorical but "
                            f"holds non-numeric value {v!r}")
                    vec[i] = float(v)
            out_names.append(name)
            out_cols.append(vec)
    values = (np.column_stack(out_cols) if out_cols
              else np.empty((n, 0), dtype=float))
    return MatrixFragment(tuple(out_names), values)


def characteristics_fragment(records: Sequence[BehaviorRecord]) -> MatrixFragment:
    """Gender and condition as two integer-coded columns."""
    if not records:
        raise EmptyInput("no records")
    gender = np.array([GENDERS.index(r.characteristics.gender) for r in records],
                      dtype=float)
    condition = np.array([CONDITIONS.index(r.characteristics.condition)
                          for r in records], dtype=float)
    return MatrixFragment(CHARACTERISTIC_COLUMNS,
                          np.column_stack([gender, condition]))


def behavior_fragment(records: Sequence[BehaviorRecord],
                      include_major: bool, include_minor: bool) -> MatrixFragment:
    if not records:
        raise EmptyInput("no records")
    names: list = []
    cols: list = []
    if include_major:
        names += [f"major_{n}" for n in MAJOR_CATEGORIES]
        cols += [np.array([float(getattr(r.major, n)) for r in records])
                 for n in MAJOR_CATEGORIES]
    if include_minor:
        names += [f"minor_{n}" for n in MINOR_CATEGORIES]
        cols += [np.array([float(getattr(r.minor, n)) for r in records])
                 for n in MINOR_CATEGORIES]
    values = (np.column_stack(cols) if cols
              else np.empty((len(records), 0), dtype=float))
    return MatrixFragment(tuple(names), values)


def encode_environment(records: Sequence[BehaviorRecord],
                       mode: str = "both") -> MatrixFragment:
    """Encode the environment block of every record; missing cells are NaN."""
    if not records:
        raise EmptyInput("no records")
    rows = [env_values(r) for r in records]
    columns = [[row[name] for row in rows] for name in ENV_COLUMNS]
    return expand_columns(ENV_COLUMNS, columns, ENV_CATEGORICAL, mode)


def encode_categoricals(records: Sequence[BehaviorRecord],
                        mode: str = "both") -> MatrixFragment:
    """Characteristic columns plus the encoded environment block."""
    chars = characteristics_fragment(records)
    env = encode_environment(records, mode)
    return MatrixFragment(chars.column_names + env.column_names,
                          np.hstack([chars.values, env.values]))


# ---------------------------------------------------------------------------
# Dataset combinations
# ---------------------------------------------------------------------------

# (major flags, minor flags, environment data); child characteristics are in
# every combination.
COMBO_IDS = ("a", "b", "c", "d", "e", "f")

_COMBO_PARTS = {
    "a": (True, False, True),
    "b": (True, False, False),
    "c": (False, True, True),
    "d": (False, True, False),
    "e": (True, True, True),
    "f": (True, True, False),
}


def combo_includes_env(combo: str) -> bool:
    return _COMBO_PARTS[combo][2]


def build_combination(records: Sequence[BehaviorRecord], combo: str,
                      class_level: int, encoding: str = "both") -> FeatureMatrix:
    """Assemble the design matrix for one dataset combination.

    Column order is characteristics, major flags, minor flags, then the
    encoded environment block, so runs are byte-reproducible.
    """
    if not records:
        raise EmptyInput("no records")
    if combo not in _COMBO_PARTS:
        raise ValueError(f"unknown combination {combo!r}")
    if class_level not in (2, 3, 7):
        raise ValueError("class_level must be 2, 3 or 7")
    use_major, use_minor, use_env = _COMBO_PARTS[combo]

    parts = [characteristics_fragment(records),
             behavior_fragment(records, use_major, use_minor)]
    if use_env:
        env = encode_environment(records, encoding)
        if np.isnan(env.values).any():
            bad = [env.column_names[j]
                   for j in np.unique(np.argwhere(np.isnan(env.values))[:, 1])]
            raise MissingDataError(
                f"combination {combo!r} needs imputed environment data; "
                f"missing in columns {bad[:5]}")
        parts.append(env)

    names = tuple(n for p in parts for n in p.column_names)
    values = np.hstack([p.values for p in parts])
    labels = np.array([r.labels.code(class_level) for r in records], dtype=np.int64)
    return FeatureMatrix(names, values, labels, class_level)
