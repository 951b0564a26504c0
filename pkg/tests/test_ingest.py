import json

import numpy as np
import pytest

from behaviorbench import datamodel as dm
from behaviorbench import ingest
from behaviorbench.errors import (DiscardedRecord, MalformedFrame, RangeError,
                                  SourceUnavailable)

from conftest import make_record


def random_beacon_frame(rng) -> ingest.BeaconFrame:
    return ingest.BeaconFrame(
        uuid=bytes(rng.integers(0, 256, 16, dtype=np.uint8)),
        major_field=int(rng.integers(0, 65536)),
        minor_field=int(rng.integers(0, 65536)),
        tx_power=int(rng.integers(-128, 128)))


def random_alps_frame(rng) -> ingest.AlpsFrame:
    channels = {}
    for name in dm.ALPS_CHANNELS:
        low, high = dm.ALPS_RANGES[name]
        channels[name] = float(rng.uniform(low, high))
    return ingest.AlpsFrame(counter=int(rng.integers(0, 65536)), **channels)


class TestBeaconParsing:
    def test_round_trip_corpus(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            frame = random_beacon_frame(rng)
            data = ingest.serialize_ibeacon(frame)
            parsed = ingest.parse_ibeacon(data)
            assert ingest.serialize_ibeacon(parsed) == data
            assert parsed == ingest.BeaconFrame(
                uuid=frame.uuid, major_field=frame.major_field,
                minor_field=frame.minor_field, tx_power=frame.tx_power,
                raw=data)

    def test_big_endian_major(self):
        frame = ingest.BeaconFrame(uuid=bytes(16), major_field=1,
                                   minor_field=0, tx_power=-59)
        data = ingest.serialize_ibeacon(frame)
        assert data[25:27] == b"\x00\x01"
        assert ingest.parse_ibeacon(data).major_field == 1

    def test_single_byte_header_corruption_rejected(self):
        rng = np.random.default_rng(3)
        data = bytearray(ingest.serialize_ibeacon(random_beacon_frame(rng)))
        for offset, expected in ingest._IBEACON_HEADER:
            corrupted = bytearray(data)
            corrupted[offset] = (expected + 1) % 256
            with pytest.raises(MalformedFrame) as err:
                ingest.parse_ibeacon(bytes(corrupted))
            assert err.value.offset == offset

    def test_wrong_length_rejected(self):
        with pytest.raises(MalformedFrame):
            ingest.parse_ibeacon(b"\x02\x01\x06")
        rng = np.random.default_rng(4)
        data = ingest.serialize_ibeacon(random_beacon_frame(rng))
        with pytest.raises(MalformedFrame):
            ingest.parse_ibeacon(data + b"\x00")

    def test_rssi_out_of_band(self):
        rng = np.random.default_rng(5)
        data = ingest.serialize_ibeacon(random_beacon_frame(rng))
        parsed = ingest.parse_ibeacon(data, observed_rssi=-71)
        assert parsed.observed_rssi == -71


class TestAlpsParsing:
    def test_round_trip_corpus(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            frame = random_alps_frame(rng)
            data = ingest.serialize_alps(frame)
            assert len(data) == ingest.ALPS_FRAME_LEN
            assert ingest.parse_alps(data) == frame

    def test_pressure_bounds(self):
        rng = np.random.default_rng(1)
        kwargs = random_alps_frame(rng).channels()
        for pressure, ok in ((300.0, True), (1100.0, True), (299.9, False)):
            data = ingest.serialize_alps(
                ingest.AlpsFrame(counter=0, **{**kwargs, "pressure": pressure}))
            if ok:
                assert ingest.parse_alps(data).pressure == pressure
            else:
                with pytest.raises(RangeError, match="pressure"):
                    ingest.parse_alps(data)

    def test_humidity_bounds(self):
        rng = np.random.default_rng(2)
        kwargs = random_alps_frame(rng).channels()
        for humidity, ok in ((0.0, True), (100.0, True), (100.1, False)):
            data = ingest.serialize_alps(
                ingest.AlpsFrame(counter=1, **{**kwargs, "humidity": humidity}))
            if ok:
                assert ingest.parse_alps(data).humidity == humidity
            else:
                with pytest.raises(RangeError, match="humidity"):
                    ingest.parse_alps(data)

    def test_short_frame_rejected(self):
        with pytest.raises(MalformedFrame):
            ingest.parse_alps(b"\x00" * (ingest.ALPS_FRAME_LEN - 1))


class TestWeather:
    FULL_DOC = {"condition": 800, "sunset": 64800.0, "sunrise": 21600.0,
                "current_time": 36000.0, "temp_min": 18.0, "temp_max": 26.0,
                "pressure": 1012.0, "temp_main": 22.0, "humidity": 50.0,
                "description": 8000, "cloudiness": 20.0,
                "wind_direction": 180.0, "wind_speed": 3.0}

    def _stamp(self, hour=10):
        return dm.TimeStamp(season="spring", year=2020, month=5, day=1,
                            hour=hour, minute=0, second=0)

    def test_fixture_full_document(self, tmp_path):
        path = tmp_path / "33.80_132.87_10.json"
        path.write_text(json.dumps(self.FULL_DOC))
        resp = ingest.fetch_weather(33.795, 132.87, self._stamp(10),
                                    fixtures_dir=tmp_path)
        for field in dm.WEATHER_FIELDS:
            assert getattr(resp, field) == self.FULL_DOC[field]

    def test_fixture_missing_wind_direction(self, tmp_path):
        doc = dict(self.FULL_DOC)
        del doc["wind_direction"]
        (tmp_path / "33.80_132.87_10.json").write_text(json.dumps(doc))
        resp = ingest.fetch_weather(33.795, 132.87, self._stamp(10),
                                    fixtures_dir=tmp_path)
        assert resp.wind_direction is None
        for field in dm.WEATHER_FIELDS:
            if field != "wind_direction":
                assert getattr(resp, field) is not None

    def test_missing_fixture_is_source_unavailable(self, tmp_path):
        with pytest.raises(SourceUnavailable):
            ingest.fetch_weather(0.0, 0.0, self._stamp(), fixtures_dir=tmp_path)

    def test_live_mode_unreachable_no_partial_state(self, monkeypatch):
        monkeypatch.setenv(ingest.WEATHER_KEY_ENV, "test-key")
        with pytest.raises(SourceUnavailable):
            ingest.fetch_weather(0.0, 0.0, self._stamp(), source="live",
                                 endpoint="http://127.0.0.1:1/weather",
                                 timeout=0.2)

    def test_live_mode_requires_key(self, monkeypatch):
        monkeypatch.delenv(ingest.WEATHER_KEY_ENV, raising=False)
        with pytest.raises(SourceUnavailable, match="WEATHER_KEY"):
            ingest.fetch_weather(0.0, 0.0, self._stamp(), source="live",
                                 endpoint="http://example.invalid")


def _event(i=0):
    rec = make_record(i)
    return ingest.BehaviorEvent(
        record_id=rec.record_id, child_id=rec.child_id,
        session_id=rec.session_id, stamp=rec.env.stamp,
        characteristics=rec.characteristics, major=rec.major,
        minor=rec.minor, labels=rec.labels)


class TestAssembly:
    def test_all_sources_populated(self):
        rng = np.random.default_rng(9)
        captured = ingest.CapturedBeacon(frame=random_beacon_frame(rng),
                                         mac="AA:BB:CC:DD:EE:FF",
                                         name="room-1", rssi=-60)
        record = ingest.assemble_record(
            _event(), beacons=[captured], alps=random_alps_frame(rng),
            gps=dm.GpsFix(33.79, 132.87),
            weather=dm.WeatherReading(**TestWeather.FULL_DOC))
        assert dm.record_is_complete(record)

    def test_gps_only_retained(self):
        record = ingest.assemble_record(_event(), gps=dm.GpsFix(33.79, 132.87))
        assert record.env.gps is not None
        assert record.env.beacon is None
        assert record.env.alps is None
        assert record.env.weather is None

    def test_no_sources_discarded(self):
        with pytest.raises(DiscardedRecord):
            ingest.assemble_record(_event())

    def test_strongest_rssi_wins(self):
        rng = np.random.default_rng(10)
        weak = ingest.CapturedBeacon(random_beacon_frame(rng), "M1", "b1", -80)
        strong = ingest.CapturedBeacon(random_beacon_frame(rng), "M2", "b2", -55)
        record = ingest.assemble_record(_event(), beacons=[weak, strong])
        assert record.env.beacon.name == "b2"
        assert record.env.beacon.rssi == -55

    def test_batch_discard_accounting(self, tmp_path):
        from behaviorbench.records_io import RecordStore
        rng = np.random.default_rng(12)
        items = [
            (_event(0), [], None, dm.GpsFix(1.0, 2.0), None),
            (_event(1), [], None, None, None),                 # discarded
            (_event(2), [], random_alps_frame(rng), None, None),
            (_event(3), [], None, None, None),                 # discarded
        ]
        store = RecordStore(tmp_path / "store.jsonl")
        records, summary = ingest.ingest_batch(items, store=store)
        assert summary.records_in == 4
        assert summary.records_retained == 2
        assert summary.records_discarded == 2
        assert summary.records_in == summary.records_retained + summary.records_discarded
        assert len(store.load()) == 2

    def test_populated_fields_trace_to_sources(self):
        rng = np.random.default_rng(13)
        alps = random_alps_frame(rng)
        record = ingest.assemble_record(_event(), alps=alps)
        for ch in dm.ALPS_CHANNELS:
            assert getattr(record.env.alps, ch) == getattr(alps, ch)
        assert record.env.weather is None and record.env.gps is None
