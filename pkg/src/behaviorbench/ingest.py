"""Payload parsing and record assembly for the four data sources.

The capture side of the original system (mobile app, BLE radio, cloud
database) is replaced by pure parsers plus a local JSON-lines store. Parsers
are pure functions and freely concurrent.

iBeacon advertisement layout (30 bytes, offsets in brackets):
  [0..2]   02 01 06        advertising flags
  [3..4]   1A FF           length 26, manufacturer-specific data
  [5..6]   4C 00           company identifier, little-endian
  [7..8]   02 15           iBeacon type and payload length
  [9..24]  16-byte proximity UUID
  [25..26] major, big-endian unsigned
  [27..28] minor, big-endian unsigned
  [29]     tx power, signed dBm at 1 m

ALPS frame layout (90 bytes, little-endian): uint16 frame counter followed by
the 11 channels as float64 in datamodel.ALPS_CHANNELS order.
"""

from __future__ import annotations

import json
import os
import struct
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from . import datamodel as dm
from .errors import DiscardedRecord, MalformedFrame, RangeError, SourceUnavailable

IBEACON_FRAME_LEN = 30
_IBEACON_HEADER = ((0, 0x02), (1, 0x01), (2, 0x06), (3, 0x1A), (4, 0xFF),
                   (5, 0x4C), (6, 0x00), (7, 0x02), (8, 0x15))

ALPS_FRAME_LEN = 2 + 8 * len(dm.ALPS_CHANNELS)
_ALPS_STRUCT = struct.Struct("<H" + "d" * len(dm.ALPS_CHANNELS))

WeatherResponse = dm.WeatherReading


@dataclass(frozen=True)
class BeaconFrame:
    """Decoded iBeacon advertisement plus capture-layer RSSI."""

    uuid: bytes
    major_field: int
    minor_field: int
    tx_power: int
    observed_rssi: Optional[int] = None
    raw: bytes = b""

    def __post_init__(self):
        if len(self.uuid) != 16:
            raise ValueError("uuid must be 16 bytes")
        if not (0 <= self.major_field <= 0xFFFF and 0 <= self.minor_field <= 0xFFFF):
            raise ValueError("major/minor must be 16-bit unsigned")
        if not (-128 <= self.tx_power <= 127):
            raise ValueError("tx_power must fit a signed byte")
        expected = _serialize_ibeacon_fields(self.uuid, self.major_field,
                                             self.minor_field, self.tx_power)
        if self.raw == b"":
            object.__setattr__(self, "raw", expected)
        elif self.raw != expected:
            raise ValueError("raw bytes do not match the decoded fields")


def _serialize_ibeacon_fields(uuid, major, minor, tx_power) -> bytes:
    head = bytes(v for _, v in _IBEACON_HEADER)
    return head + uuid + struct.pack(">HHb", major, minor, tx_power)


def serialize_ibeacon(frame: BeaconFrame) -> bytes:
    return _serialize_ibeacon_fields(frame.uuid, frame.major_field,
                                     frame.minor_field, frame.tx_power)


def parse_ibeacon(data: bytes, observed_rssi: Optional[int] = None) -> BeaconFrame:
    """Decode an iBeacon advertisement; RSSI arrives out-of-band."""
    if len(data) < IBEACON_FRAME_LEN:
        raise MalformedFrame(
            f"frame is {len(data)} bytes, need {IBEACON_FRAME_LEN}",
            offset=len(data))
    if len(data) > IBEACON_FRAME_LEN:
        raise MalformedFrame(
            f"frame is {len(data)} bytes, expected exactly {IBEACON_FRAME_LEN}",
            offset=IBEACON_FRAME_LEN)
    for offset, expected in _IBEACON_HEADER:
        if data[offset] != expected:
            raise MalformedFrame(
                f"expected byte 0x{expected:02X}, found 0x{data[offset]:02X}",
                offset=offset)
    major, minor, tx_power = struct.unpack(">HHb", data[25:30])
    return BeaconFrame(uuid=bytes(data[9:25]), major_field=major,
                       minor_field=minor, tx_power=tx_power,
                       observed_rssi=observed_rssi, raw=bytes(data))


@dataclass(frozen=True)
class AlpsFrame:
    """One full sensor frame: counter plus the 11 channels."""

    counter: int
    uv_range: float
    ambient_light: float
    geomag_g1: float
    geomag_g2: float
    geomag_g3: float
    geomag_ut1: float
    geomag_ut2: float
    geomag_ut3: float
    pressure: float
    temperature: float
    humidity: float

    def channels(self) -> dict:
        return {c: getattr(self, c) for c in dm.ALPS_CHANNELS}


def serialize_alps(frame: AlpsFrame) -> bytes:
    return _ALPS_STRUCT.pack(frame.counter,
                             *(getattr(frame, c) for c in dm.ALPS_CHANNELS))


def parse_alps(payload: bytes) -> AlpsFrame:
    """Decode a sensor frame, range-validating every channel."""
    if len(payload) != ALPS_FRAME_LEN:
        raise MalformedFrame(
            f"frame is {len(payload)} bytes, expected {ALPS_FRAME_LEN}",
            offset=min(len(payload), ALPS_FRAME_LEN))
    values = _ALPS_STRUCT.unpack(payload)
    counter, channels = values[0], values[1:]
    for name, value in zip(dm.ALPS_CHANNELS, channels):
        low, high = dm.ALPS_RANGES[name]
        if not (low <= value <= high):
            raise RangeError(name, value, low, high)
    return AlpsFrame(counter, *channels)


# ---------------------------------------------------------------------------
# Weather
# ---------------------------------------------------------------------------

WEATHER_KEY_ENV = "BEHAVIORBENCH_WEATHER_KEY"


def _fixture_name(lat: float, lon: float, hour: int) -> str:
    return f"{lat:.2f}_{lon:.2f}_{hour:02d}.json"


def _weather_from_document(doc: dict) -> WeatherResponse:
    kwargs = {f: doc.get(f) for f in dm.WEATHER_FIELDS}
    return dm.WeatherReading(**kwargs)


def fetch_weather(lat: float, lon: float, when: dm.TimeStamp,
                  source: str = "fixture", fixtures_dir=None,
                  endpoint: Optional[str] = None,
                  timeout: float = 10.0) -> WeatherResponse:
    """Fetch the 13 weather features for a location and hour.

    Fixture mode reads one canned JSON document per (lat, lon, hour), with
    coordinates rounded to two decimals. Live mode queries `endpoint` (which
    must serve the same flat document) with the key from the
    BEHAVIORBENCH_WEATHER_KEY environment variable. Fields absent from the
    document stay missing on the response; a failed fetch raises
    SourceUnavailable and leaves no partial state.
    """
    if source == "fixture":
        if fixtures_dir is None:
            raise SourceUnavailable("fixture mode requires a fixtures directory")
        path = Path(fixtures_dir) / _fixture_name(lat, lon, when.hour)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SourceUnavailable(f"weather fixture {path}: {exc}") from exc
        return _weather_from_document(doc)
    if source == "live":
        if endpoint is None:
            raise SourceUnavailable("live mode requires an endpoint URL")
        key = os.environ.get(WEATHER_KEY_ENV)
        if not key:
            raise SourceUnavailable(f"live mode requires {WEATHER_KEY_ENV} to be set")
        query = urllib.parse.urlencode(
            {"lat": f"{lat:.6f}", "lon": f"{lon:.6f}", "hour": when.hour,
             "appid": key})
        url = f"{endpoint}?{query}"
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                doc = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise SourceUnavailable(f"weather endpoint: {exc}") from exc
        return _weather_from_document(doc)
    raise ValueError(f"unknown weather source {source!r}")


# ---------------------------------------------------------------------------
# Record assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapturedBeacon:
    """A parsed advertisement plus the link-layer metadata around it."""

    frame: BeaconFrame
    mac: str
    name: str
    rssi: int


@dataclass(frozen=True)
class BehaviorEvent:
    """The caregiver-entered half of a record, before source attachment."""

    record_id: str
    child_id: int
    session_id: str
    stamp: dm.TimeStamp
    characteristics: dm.ChildCharacteristics
    major: dm.MajorCategoryFlags
    minor: dm.MinorCategoryFlags
    labels: dm.OutcomeLabels


def assemble_record(event: BehaviorEvent,
                    beacons: Sequence[CapturedBeacon] = (),
                    alps: Optional[AlpsFrame] = None,
                    gps: Optional[dm.GpsFix] = None,
                    weather: Optional[WeatherResponse] = None) -> dm.BehaviorRecord:
    """Attach whatever sources observed the event; absent sources stay missing.

    Raises DiscardedRecord when no source contributed anything. When several
    beacons were heard, the strongest RSSI wins.
    """
    beacon_obs = None
    if beacons:
        best = max(beacons, key=lambda b: b.rssi)
        beacon_obs = dm.BeaconObservation(rssi=best.rssi, mac=best.mac,
                                          name=best.name)
    alps_reading = dm.AlpsReading(**alps.channels()) if alps is not None else None
    if beacon_obs is None and alps_reading is None and gps is None and weather is None:
        raise DiscardedRecord(
            f"event {event.record_id}: no associated data from any source")
    env = dm.EnvironmentSnapshot(stamp=event.stamp, gps=gps, beacon=beacon_obs,
                                 alps=alps_reading, weather=weather)
    return dm.BehaviorRecord(
        record_id=event.record_id, child_id=event.child_id,
        session_id=event.session_id, characteristics=event.characteristics,
        major=event.major, minor=event.minor, env=env, labels=event.labels)


@dataclass(frozen=True)
class IngestSummary:
    records_in: int
    records_retained: int
    records_discarded: int


def ingest_batch(items, store=None):
    """Assemble many (event, sources) pairs, counting discards.

    `items` yields (event, beacons, alps, gps, weather) tuples. Returns
    (records, IngestSummary); when a store is given, retained records are
    appended to it in input order.
    """
    records = []
    discarded = 0
    total = 0
    for event, beacons, alps, gps, weather in items:
        total += 1
        try:
            rec = assemble_record(event, beacons, alps, gps, weather)
        except DiscardedRecord:
            discarded += 1
            continue
        records.append(rec)
        if store is not None:
            store.append(rec)
    return records, IngestSummary(total, len(records), discarded)
