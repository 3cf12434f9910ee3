from dataclasses import dataclass

import numpy as np
from fvcore.common.registry import Registry

from common.errors import ConfigError
from common.type_utils import cfg2dict

__all__ = ["DATASET_REGISTRY", "RideRecord", "DriverRecord", "Rides", "Drivers", "build_dataset",
           "DAY_SECONDS", "DEFAULT_WINDOW_S"]

DATASET_REGISTRY = Registry("dataset")

DAY_SECONDS = 86400
DEFAULT_WINDOW_S = 900.0


def _check_coords(lat, lon, what):
    lat, lon = np.asarray(lat, dtype=float), np.asarray(lon, dtype=float)
    if np.any(~np.isfinite(lat)) or np.any(np.abs(lat) > 90.0):
        raise ConfigError(f"{what} latitude outside [-90, 90]")
    if np.any(~np.isfinite(lon)) or np.any(np.abs(lon) > 180.0):
        raise ConfigError(f"{what} longitude outside [-180, 180]")


def _check_times(t, what):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= DAY_SECONDS):
        raise ConfigError(f"{what} times outside [0, {DAY_SECONDS})")


@dataclass(frozen=True)
class RideRecord:
    request_time: float
    pickup_lat: float
    pickup_lon: float
    dropoff_lat: float
    dropoff_lon: float

    def __post_init__(self):
        _check_coords([self.pickup_lat, self.dropoff_lat], [self.pickup_lon, self.dropoff_lon], "ride")
        _check_times(self.request_time, "request")


@dataclass(frozen=True)
class DriverRecord:
    online_time: float
    lat: float
    lon: float
    window: float = DEFAULT_WINDOW_S

    def __post_init__(self):
        _check_coords(self.lat, self.lon, "driver")
        _check_times(self.online_time, "online")
        if not self.window > 0:
            raise ConfigError(f"driver window must be positive, got {self.window}")


class _Table:
    """Columnar view over a list of records; row i is record i."""
    record_cls = None
    fields = ()

    def __init__(self, **columns):
        n = None
        for name in self.fields:
            arr = np.asarray(columns.get(name, []), dtype=float).reshape(-1)
            if n is not None and arr.shape[0] != n:
                raise ConfigError(f"column {name} has {arr.shape[0]} entries, expected {n}")
            n = arr.shape[0]
            arr.setflags(write=False)
            setattr(self, name, arr)
        self._validate()

    def _validate(self):
        pass

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls(**{name: [getattr(r, name) for r in records] for name in cls.fields})

    def __len__(self):
        return int(getattr(self, self.fields[0]).shape[0])

    def __getitem__(self, idx):
        return self.record_cls(**{name: float(getattr(self, name)[idx]) for name in self.fields})

    def subset(self, keep):
        keep = np.asarray(keep)
        return type(self)(**{name: getattr(self, name)[keep] for name in self.fields})


class Rides(_Table):
    record_cls = RideRecord
    fields = ("request_time", "pickup_lat", "pickup_lon", "dropoff_lat", "dropoff_lon")

    def _validate(self):
        _check_coords(self.pickup_lat, self.pickup_lon, "pickup")
        _check_coords(self.dropoff_lat, self.dropoff_lon, "dropoff")
        _check_times(self.request_time, "request")


class Drivers(_Table):
    record_cls = DriverRecord
    fields = ("online_time", "lat", "lon", "window")

    def __init__(self, **columns):
        if "window" not in columns:
            columns["window"] = np.full(len(np.asarray(columns.get("lat", []))), DEFAULT_WINDOW_S)
        super().__init__(**columns)

    def _validate(self):
        _check_coords(self.lat, self.lon, "driver")
        _check_times(self.online_time, "online")
        if np.any(self.window <= 0):
            raise ConfigError("driver windows must be positive")


def build_dataset(cfg, seed=None):
    """(rides, drivers) from the ``rideshare.data`` config node."""
    cfg = cfg2dict(cfg)
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigError("rideshare data config needs a 'name'")
    try:
        source = DATASET_REGISTRY.get(cfg["name"])
    except KeyError as e:
        raise ConfigError(f"unknown rideshare data source {cfg['name']!r}") from e
    return source(cfg, seed=seed)
