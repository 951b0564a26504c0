import numpy as np
import pytest

from behaviorbench import datamodel as dm


def make_record(i=0, session="s00", child=1, minor_on=("gazing",),
                class7="response", stamp=None, gps=True, beacon=True,
                alps=True, weather=True, month=5, hour=10, minute=0, second=0,
                rssi=-60, beacon_name="classroom-1", gender="male",
                condition="PIMD_SMID"):
    """One fully-specified record with selectable missing blocks."""
    minors = {name: int(name in minor_on) for name in dm.MINOR_CATEGORIES}
    minor = dm.MinorCategoryFlags(**minors)
    stamp = stamp or dm.TimeStamp(season=dm.season_for_month(month), year=2020,
                                  month=month, day=10, hour=hour,
                                  minute=minute, second=second)
    class3 = dm.map_class7_to_class3(class7)
    labels = dm.OutcomeLabels(class7=class7, class3=class3,
                              class2=dm.map_class3_to_class2(class3))
    env = dm.EnvironmentSnapshot(
        stamp=stamp,
        gps=dm.GpsFix(33.795098, 132.8702426) if gps else None,
        beacon=dm.BeaconObservation(rssi=rssi, mac="F5:B0:E2:A2:AE:69",
                                    name=beacon_name) if beacon else None,
        alps=dm.AlpsReading(uv_range=12.0, ambient_light=400.0,
                            geomag_g1=0.1, geomag_g2=-0.2, geomag_g3=0.3,
                            geomag_ut1=30.0, geomag_ut2=-18.0, geomag_ut3=41.0,
                            pressure=1013.0, temperature=22.0,
                            humidity=55.0) if alps else None,
        weather=dm.WeatherReading(condition=800, sunset=64800.0, sunrise=21600.0,
                                  current_time=36000.0, temp_min=18.0,
                                  temp_max=26.0, pressure=1012.0,
                                  temp_main=22.0, humidity=50.0,
                                  description=8000, cloudiness=20.0,
                                  wind_direction=180.0,
                                  wind_speed=3.0) if weather else None)
    return dm.BehaviorRecord(
        record_id=f"r{i:04d}", child_id=child, session_id=session,
        characteristics=dm.ChildCharacteristics(gender, condition),
        major=minor.implied_majors(), minor=minor, env=env, labels=labels)


@pytest.fixture(scope="session")
def small_blobs():
    """Linearly separable 2-class blobs (n=200, margin about 2 sigma)."""
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 1.0, (100, 5))
    b = rng.normal(0.0, 1.0, (100, 5))
    b[:, 0] += 4.0
    X = np.vstack([a, b])
    y = np.array([0] * 100 + [1] * 100)
    return dm.FeatureMatrix(tuple(f"f{i}" for i in range(5)), X, y, 2)
