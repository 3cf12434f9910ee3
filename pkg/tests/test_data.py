import numpy as np
import pytest

from common.errors import ConfigError
from data import (DEFAULT_WINDOW_S, DriverRecord, Drivers, RideRecord, Rides, SynthParams,
                  build_dataset, load_drivers, load_rides, save_drivers, save_rides, synth_rides)
from scenario import haversine


def test_records_validate():
    RideRecord(0.0, 40.0, -73.0, 40.1, -73.1)
    with pytest.raises(ConfigError):
        RideRecord(0.0, 95.0, -73.0, 40.1, -73.1)
    with pytest.raises(ConfigError):
        RideRecord(86400.0, 40.0, -73.0, 40.1, -73.1)
    with pytest.raises(ConfigError):
        DriverRecord(10.0, 40.0, -73.0, window=0.0)


def test_table_access():
    rides = Rides(request_time=[5, 10], pickup_lat=[1, 2], pickup_lon=[3, 4],
                  dropoff_lat=[5, 6], dropoff_lon=[7, 8])
    assert len(rides) == 2
    assert rides[1] == RideRecord(10.0, 2.0, 4.0, 6.0, 8.0)
    assert len(rides.subset([1])) == 1
    drivers = Drivers(online_time=[0], lat=[0], lon=[0])
    assert drivers.window[0] == DEFAULT_WINDOW_S
    with pytest.raises(ConfigError):
        Rides(request_time=[5], pickup_lat=[1, 2], pickup_lon=[3, 4], dropoff_lat=[5, 6],
              dropoff_lon=[7, 8])


def test_synthetic_is_deterministic():
    params = SynthParams(n_rides=50, n_drivers=40)
    (r1, d1), (r2, d2) = synth_rides(params, 3), synth_rides(params, 3)
    np.testing.assert_array_equal(r1.pickup_lat, r2.pickup_lat)
    np.testing.assert_array_equal(d1.online_time, d2.online_time)
    assert (len(r1), len(d1)) == (50, 40)


def test_synthetic_empty():
    rides, drivers = synth_rides(SynthParams(n_rides=0, n_drivers=0), 1)
    assert len(rides) == len(drivers) == 0


def test_synthetic_pickups_stay_in_cluster():
    params = SynthParams(n_rides=1000, n_drivers=1, centers=[[40.0, -74.0]], radius_km=2.0)
    rides, _ = synth_rides(params, 0)
    dist = haversine((rides.pickup_lat, rides.pickup_lon), (40.0, -74.0))
    assert np.all(dist <= 2.0 + 0.01)


def test_synth_params_validation():
    with pytest.raises(ConfigError):
        SynthParams(n_rides=-1)
    with pytest.raises(ConfigError):
        SynthParams(centers=[[1.0, 2.0, 3.0]])
    with pytest.raises(ConfigError):
        SynthParams(centers=[[1.0, 2.0]], weights=[1.0, 2.0])


def test_csv_files(tmp_path):
    rides, drivers = synth_rides(SynthParams(n_rides=20, n_drivers=10), 5)
    save_rides(rides, tmp_path / "rides.csv")
    save_drivers(drivers, tmp_path / "drivers.csv")
    loaded_rides = load_rides(tmp_path / "rides.csv")
    loaded_drivers = load_drivers(tmp_path / "drivers.csv", window=600)
    np.testing.assert_array_equal(loaded_rides.pickup_lat, rides.pickup_lat)
    np.testing.assert_array_equal(loaded_rides.request_time, rides.request_time)
    np.testing.assert_array_equal(loaded_drivers.lon, drivers.lon)
    assert np.all(loaded_drivers.window == 600)

    from_cfg = build_dataset({"name": "csv", "rides": str(tmp_path / "rides.csv"),
                              "drivers": str(tmp_path / "drivers.csv")})
    assert (len(from_cfg[0]), len(from_cfg[1])) == (20, 10)


def test_csv_schema_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("request_time_s,pickup_lat\n1,2\n")
    with pytest.raises(ConfigError):
        load_rides(tmp_path / "bad.csv")
    (tmp_path / "lat.csv").write_text("online_time_s,lat,lon\n10,95.0,0.0\n")
    with pytest.raises(ConfigError):
        load_drivers(tmp_path / "lat.csv")
    (tmp_path / "text.csv").write_text("online_time_s,lat,lon\n10,north,0.0\n")
    with pytest.raises(ConfigError):
        load_drivers(tmp_path / "text.csv")


def test_build_dataset_errors():
    with pytest.raises(ConfigError):
        build_dataset({"name": "taxi"})
    with pytest.raises(ConfigError):
        build_dataset({"name": "csv", "rides": None, "drivers": None})
    with pytest.raises(ConfigError):
        build_dataset({})
