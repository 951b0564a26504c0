"""Synthetic dataset generator mirroring the study's shape.

Defaults produce 292 records over 20 children with roughly five sessions per
child, the published per-column missingness counts, and a controllable link
between outcome classes and the environment (env_signal) or the behavior
flags (behavior_signal). Signal 0 means exact statistical independence from
the labels. Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import datamodel as dm
from .errors import ConfigError

# Per-source missing-value rates; at n=292 the implied counts match the
# study: beacon 46, uv_range 98, uv_resolution 53, six-axis ranges 15,
# six-axis resolutions 14, weather 14, wind direction 35 total, gps 0.
MISSINGNESS_DEFAULTS = {
    "beacon": 0.158,
    "uv_range": 0.336,
    "uv_resolution": 0.181,
    "six_axis_ranges": 0.0514,
    "six_axis_resolutions": 0.0479,
    "weather": 0.0479,
    "wind_direction": 0.119,
    "gps": 0.0,
}

_ROOMS = ("classroom-1", "classroom-2", "music-room", "lunch-room",
          "play-room", "therapy-room")

_SEASON_TEMP = {"spring": 18.0, "summer": 28.0, "autumn": 16.0, "winter": 6.0}

# Fixed class-to-feature shift patterns (independent of the data seed so the
# planted structure is stable across seeds).
_PATTERN_RNG = np.random.default_rng(180_905)
_MINOR_PATTERN = _PATTERN_RNG.choice([-1.0, 0.0, 1.0], size=(7, 16))
_ENV_PATTERN = _PATTERN_RNG.choice([-1.0, -0.5, 0.0, 0.5, 1.0], size=(7, 32))


@dataclass(frozen=True)
class SynthConfig:
    n_records: int = 292
    n_children: int = 20
    class7_distribution: tuple = tuple([1.0 / 7] * 7)
    env_signal: float = 0.8
    behavior_signal: float = 0.4
    missingness: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.n_records < 1:
            raise ConfigError("n_records must be positive")
        if not 1 <= self.n_children <= 20:
            raise ConfigError("n_children must lie in [1, 20]")
        dist = tuple(float(p) for p in self.class7_distribution)
        if len(dist) != 7 or any(p < 0 for p in dist):
            raise ConfigError("class7_distribution needs 7 non-negative weights")
        if abs(sum(dist) - 1.0) > 1e-9:
            raise ConfigError("class7_distribution must sum to 1")
        if not (0.0 <= self.env_signal <= 1.0 and 0.0 <= self.behavior_signal <= 1.0):
            raise ConfigError("signal strengths must lie in [0, 1]")
        merged = dict(MISSINGNESS_DEFAULTS)
        unknown = set(self.missingness) - set(merged)
        if unknown:
            raise ConfigError(f"unknown missingness keys {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.missingness.items()})
        for key, rate in merged.items():
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"missingness rate {key} outside [0, 1]")
        if merged["wind_direction"] < merged["weather"]:
            raise ConfigError(
                "wind_direction missingness cannot be below the weather rate")
        object.__setattr__(self, "class7_distribution", dist)
        object.__setattr__(self, "missingness", merged)


def _mac_for_room(room_idx: int) -> str:
    return f"F5:B0:E2:A2:AE:{room_idx:02X}"


def _clip(v, low, high):
    return float(min(max(v, low), high))


def generate(cfg: SynthConfig) -> list:
    """Produce pre-imputation BehaviorRecords (missing cells included)."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_records

    children = []
    for cid in range(1, cfg.n_children + 1):
        children.append(dm.ChildCharacteristics(
            gender="male" if rng.random() < 0.68 else "female",
            condition="PIMD_SMID" if rng.random() < 0.75 else "severe_profound_ID"))

    sessions = []
    for cid in range(1, cfg.n_children + 1):
        n_sessions = 1 + int(rng.poisson(4.0))
        for s in range(n_sessions):
            room = int(rng.integers(0, len(_ROOMS)))
            month = int(rng.integers(1, 13))
            sessions.append({
                "session_id": f"c{cid:02d}-s{s:02d}",
                "child_id": cid,
                "room": room,
                "year": int(rng.integers(2019, 2021)),
                "month": month,
                "day": int(rng.integers(1, 29)),
                "hour": int(rng.integers(9, 16)),
                "gps_lat": 33.79 + room * 1e-4 + float(rng.normal(0, 2e-5)),
                "gps_lon": 132.87 + room * 1e-4 + float(rng.normal(0, 2e-5)),
                "rssi_base": float(rng.uniform(-75, -55)),
                "condition_code": int(rng.choice([500, 600, 800, 801, 802])),
                "cloud_base": float(rng.uniform(0, 100)),
                "wind_dir_base": float(rng.uniform(0, 360)),
            })

    session_of_record = rng.integers(0, len(sessions), size=n)
    class7_codes = rng.choice(7, size=n, p=np.asarray(cfg.class7_distribution))
    per_session_counter: dict = {}

    es = cfg.env_signal
    bs = cfg.behavior_signal
    records = []
    env_cells: dict = {col: [] for col in ("beacon", "uv_range", "uv_resolution",
                                           "six_axis_ranges", "six_axis_resolutions",
                                           "weather")}
    for i in range(n):
        sess = sessions[int(session_of_record[i])]
        cls = int(class7_codes[i])
        child_id = sess["child_id"]
        pat = _ENV_PATTERN[cls]

        k = per_session_counter.get(sess["session_id"], 0)
        per_session_counter[sess["session_id"]] = k + 1
        offset_s = k * 180 + int(rng.integers(0, 60))
        minute, second = divmod(offset_s, 60)
        hour = sess["hour"] + minute // 60
        minute = minute % 60
        stamp = dm.TimeStamp(
            season=dm.season_for_month(sess["month"]), year=sess["year"],
            month=sess["month"], day=sess["day"], hour=min(hour, 23),
            minute=minute, second=second)
        epoch = stamp.epoch_seconds()

        gps = dm.GpsFix(latitude=round(sess["gps_lat"], 6),
                        longitude=round(sess["gps_lon"], 7))
        rssi = int(round(_clip(sess["rssi_base"] + es * 4.0 * pat[0]
                               + rng.normal(0, 3.0), -100, -30)))
        beacon = dm.BeaconObservation(
            rssi=rssi, mac=_mac_for_room(sess["room"]), name=_ROOMS[sess["room"]])

        base_temp = _SEASON_TEMP[stamp.season]
        alps = dm.AlpsReading(
            uv_range=_clip(rng.lognormal(4.0, 0.6) + es * 35.0 * pat[1], 0, 5000),
            ambient_light=_clip(420 + es * 140.0 * pat[2] + rng.normal(0, 110), 0, 2500),
            geomag_g1=_clip(rng.normal(0, 0.4) + es * 0.5 * pat[3], -2.4, 2.4),
            geomag_g2=_clip(rng.normal(0, 0.4) + es * 0.5 * pat[4], -2.4, 2.4),
            geomag_g3=_clip(rng.normal(0, 0.4) + es * 0.5 * pat[5], -2.4, 2.4),
            geomag_ut1=_clip(31 + rng.normal(0, 7) + es * 9.0 * pat[6], -100, 100),
            geomag_ut2=_clip(-18 + rng.normal(0, 7) + es * 9.0 * pat[7], -100, 100),
            geomag_ut3=_clip(40 + rng.normal(0, 7) + es * 9.0 * pat[8], -100, 100),
            pressure=_clip(1013 + rng.normal(0, 4) + es * 5.0 * pat[9], 980, 1040),
            temperature=_clip(base_temp + rng.normal(0, 2.5) + es * 3.0 * pat[10],
                              -15, 55),
            humidity=_clip(55 + rng.normal(0, 9) + es * 11.0 * pat[11], 2, 98))

        temp_main = _clip(alps.temperature + rng.normal(0, 1.0), -15, 55)
        sunrise = epoch - (stamp.hour * 3600 + stamp.minute * 60 + stamp.second) \
            + 6 * 3600
        sunset = sunrise + 12 * 3600
        weather = dm.WeatherReading(
            condition=sess["condition_code"],
            sunset=float(sunset), sunrise=float(sunrise),
            current_time=float(epoch),
            temp_min=_clip(temp_main - abs(rng.normal(2, 1)), -20, 55),
            temp_max=_clip(temp_main + abs(rng.normal(2, 1)), -15, 60),
            pressure=_clip(alps.pressure + rng.normal(0, 1.5), 975, 1045),
            temp_main=temp_main,
            humidity=_clip(alps.humidity + rng.normal(0, 4), 0, 100),
            description=sess["condition_code"] * 10 + int(rng.integers(0, 3)),
            cloudiness=_clip(sess["cloud_base"] + es * 18.0 * pat[12]
                             + rng.normal(0, 8), 0, 100),
            wind_direction=float((sess["wind_dir_base"] + es * 70.0 * pat[13]
                                  + rng.normal(0, 15)) % 360.0),
            wind_speed=_clip(abs(rng.normal(3.0, 1.5)) + es * 1.5 * pat[14], 0, 35))

        p_flags = np.clip(0.18 + bs * 0.38 * _MINOR_PATTERN[cls], 0.02, 0.98)
        minor_vals = (rng.random(16) < p_flags).astype(int)
        minor = dm.MinorCategoryFlags(**dict(zip(dm.MINOR_CATEGORIES, minor_vals)))
        major = minor.implied_majors()

        class7 = dm.CLASS7[cls]
        class3 = dm.map_class7_to_class3(class7)
        labels = dm.OutcomeLabels(class7=class7, class3=class3,
                                  class2=dm.map_class3_to_class2(class3))
        records.append(dm.BehaviorRecord(
            record_id=f"r{i:04d}", child_id=child_id,
            session_id=sess["session_id"],
            characteristics=children[child_id - 1],
            major=major, minor=minor,
            env=dm.EnvironmentSnapshot(stamp=stamp, gps=gps, beacon=beacon,
                                       alps=alps, weather=weather),
            labels=labels))

    return _apply_missingness(records, cfg, rng)


def _mask_rows(rng, n, rate):
    count = int(round(rate * n))
    if count == 0:
        return np.zeros(0, dtype=int)
    return rng.choice(n, size=count, replace=False)


def _apply_missingness(records, cfg: SynthConfig, rng) -> list:
    n = len(records)
    rates = cfg.missingness
    masks = {
        "beacon": set(_mask_rows(rng, n, rates["beacon"]).tolist()),
        "uv_range": set(_mask_rows(rng, n, rates["uv_range"]).tolist()),
        "uv_resolution": set(_mask_rows(rng, n, rates["uv_resolution"]).tolist()),
        "six_axis_ranges": set(_mask_rows(rng, n, rates["six_axis_ranges"]).tolist()),
        "six_axis_resolutions": set(
            _mask_rows(rng, n, rates["six_axis_resolutions"]).tolist()),
        "weather": set(_mask_rows(rng, n, rates["weather"]).tolist()),
        "gps": set(_mask_rows(rng, n, rates["gps"]).tolist()),
    }
    # wind direction is missing wherever weather is, plus extra rows up to
    # its own (higher) rate
    wind_total = int(round(rates["wind_direction"] * n))
    extra_needed = max(0, wind_total - len(masks["weather"]))
    candidates = np.array(sorted(set(range(n)) - masks["weather"]), dtype=int)
    extra = (rng.choice(candidates, size=min(extra_needed, candidates.size),
                        replace=False) if extra_needed else np.zeros(0, dtype=int))
    wind_rows = masks["weather"] | set(extra.tolist())

    out = []
    for i, rec in enumerate(records):
        env = rec.env
        gps = None if i in masks["gps"] else env.gps
        beacon = None if i in masks["beacon"] else env.beacon
        alps_kwargs = {c: getattr(env.alps, c) for c in dm.ALPS_CHANNELS}
        if i in masks["uv_range"]:
            alps_kwargs["uv_range"] = None
        if i in masks["uv_resolution"]:
            alps_kwargs["ambient_light"] = None
        if i in masks["six_axis_ranges"]:
            alps_kwargs.update(geomag_g1=None, geomag_g2=None, geomag_g3=None)
        if i in masks["six_axis_resolutions"]:
            alps_kwargs.update(geomag_ut1=None, geomag_ut2=None, geomag_ut3=None)
        alps = dm.AlpsReading(**alps_kwargs)
        if i in masks["weather"]:
            weather = None
        elif i in wind_rows:
            kwargs = {f: getattr(env.weather, f) for f in dm.WEATHER_FIELDS}
            kwargs["wind_direction"] = None
            weather = dm.WeatherReading(**kwargs)
        else:
            weather = env.weather
        new_env = dm.EnvironmentSnapshot(stamp=env.stamp, gps=gps, beacon=beacon,
                                         alps=alps, weather=weather)
        out.append(dm.BehaviorRecord(
            record_id=rec.record_id, child_id=rec.child_id,
            session_id=rec.session_id, characteristics=rec.characteristics,
            major=rec.major, minor=rec.minor, env=new_env, labels=rec.labels))
    return out
