"""Ride and driver sources: the CSV schema and a synthetic spatial generator."""
import logging
from dataclasses import dataclass, field

import numpy as np

from common.errors import ConfigError
from common.io_utils import load_csv, save_csv
from common.misc import child_seeds

from .build import DATASET_REGISTRY, DAY_SECONDS, DEFAULT_WINDOW_S, Drivers, Rides

__all__ = ["RIDE_COLUMNS", "DRIVER_COLUMNS", "SynthParams", "load_rides", "load_drivers",
           "save_rides", "save_drivers", "synth_rides"]

logger = logging.getLogger(__name__)

RIDE_COLUMNS = ["request_time_s", "pickup_lat", "pickup_lon", "dropoff_lat", "dropoff_lon"]
DRIVER_COLUMNS = ["online_time_s", "lat", "lon"]

KM_PER_DEGREE = 6371.0 * np.pi / 180.0


def _read(filename, columns):
    contents, header = load_csv(filename)
    missing = [c for c in columns if c not in header]
    if missing:
        raise ConfigError(f"{filename}: missing columns {missing}")
    try:
        return {c: np.asarray(contents[c], dtype=float) for c in columns}
    except ValueError as e:
        raise ConfigError(f"{filename}: non-numeric entry") from e


def load_rides(filename):
    cols = _read(filename, RIDE_COLUMNS)
    return Rides(request_time=cols["request_time_s"], pickup_lat=cols["pickup_lat"],
                 pickup_lon=cols["pickup_lon"], dropoff_lat=cols["dropoff_lat"],
                 dropoff_lon=cols["dropoff_lon"])


def load_drivers(filename, window=DEFAULT_WINDOW_S):
    cols = _read(filename, DRIVER_COLUMNS)
    return Drivers(online_time=cols["online_time_s"], lat=cols["lat"], lon=cols["lon"],
                   window=np.full(cols["lat"].shape[0], float(window)))


def save_rides(rides, filename):
    data = dict(request_time_s=[int(t) for t in rides.request_time],
                pickup_lat=list(map(float, rides.pickup_lat)),
                pickup_lon=list(map(float, rides.pickup_lon)),
                dropoff_lat=list(map(float, rides.dropoff_lat)),
                dropoff_lon=list(map(float, rides.dropoff_lon)))
    return save_csv(data, filename, cols=RIDE_COLUMNS)


def save_drivers(drivers, filename):
    data = dict(online_time_s=[int(t) for t in drivers.online_time],
                lat=list(map(float, drivers.lat)), lon=list(map(float, drivers.lon)))
    return save_csv(data, filename, cols=DRIVER_COLUMNS)


@dataclass
class SynthParams:
    """Spatial clusters that rides start in and drivers wait in.

    Pickups fall uniformly in a disc of ``radius_km`` around a cluster center;
    trips run an exponential distance with mean ``trip_km`` in a uniform
    direction. Drivers only get destinations: each sits at the dropoff point of
    a synthetic trip.
    """
    n_rides: int = 1000
    n_drivers: int = 1000
    centers: list = field(default_factory=lambda: [[40.7580, -73.9855]])
    weights: list = None
    radius_km: float = 2.0
    trip_km: float = 3.0
    window: float = DEFAULT_WINDOW_S

    def __post_init__(self):
        if self.n_rides < 0 or self.n_drivers < 0:
            raise ConfigError("ride and driver counts must be nonnegative")
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if self.centers.shape[1] != 2:
            raise ConfigError("cluster centers are (lat, lon) pairs")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape[0] != self.centers.shape[0] or np.any(w < 0) or w.sum() <= 0:
                raise ConfigError("cluster weights must be nonnegative, one per center")
            self.weights = w / w.sum()
        if self.radius_km < 0 or self.trip_km < 0:
            raise ConfigError("radius_km and trip_km must be nonnegative")

    @classmethod
    def from_cfg(cls, cfg):
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})


def _offset(lat, lon, dist_km, angle):
    """Move (lat, lon) by dist_km along heading angle on a local flat chart."""
    dlat = dist_km * np.cos(angle) / KM_PER_DEGREE
    dlon = dist_km * np.sin(angle) / (KM_PER_DEGREE * np.cos(np.radians(lat)))
    new_lat = np.clip(lat + dlat, -90.0, 90.0)
    new_lon = (lon + dlon + 180.0) % 360.0 - 180.0
    return new_lat, new_lon


def _pickups(rng, params, n):
    k = rng.choice(params.centers.shape[0], size=n, p=params.weights)
    r = params.radius_km * np.sqrt(rng.random(n))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return _offset(params.centers[k, 0], params.centers[k, 1], r, theta)


def _trips(rng, params, n):
    lat, lon = _pickups(rng, params, n)
    length = rng.exponential(params.trip_km, size=n) if params.trip_km > 0 else np.zeros(n)
    heading = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return lat, lon, *_offset(lat, lon, length, heading)


def synth_rides(params, seed):
    """Deterministic synthetic (rides, drivers); times are uniform over the day."""
    if isinstance(params, dict):
        params = SynthParams.from_cfg(params)
    ride_rng, driver_rng = [np.random.default_rng(s) for s in child_seeds(seed, 2)]

    p_lat, p_lon, d_lat, d_lon = _trips(ride_rng, params, params.n_rides)
    rides = Rides(request_time=ride_rng.integers(0, DAY_SECONDS, size=params.n_rides),
                  pickup_lat=p_lat, pickup_lon=p_lon, dropoff_lat=d_lat, dropoff_lon=d_lon)

    _, _, lat, lon = _trips(driver_rng, params, params.n_drivers)
    drivers = Drivers(online_time=driver_rng.integers(0, DAY_SECONDS, size=params.n_drivers),
                      lat=lat, lon=lon, window=np.full(params.n_drivers, float(params.window)))
    logger.info(f"synthesised {len(rides)} rides and {len(drivers)} drivers")
    return rides, drivers


@DATASET_REGISTRY.register()
def synthetic(cfg, seed=None):
    return synth_rides(SynthParams.from_cfg(cfg), cfg.get("seed", 0) if seed is None else seed)


@DATASET_REGISTRY.register()
def csv(cfg, seed=None):
    if cfg.get("rides") is None or cfg.get("drivers") is None:
        raise ConfigError("csv source needs 'rides' and 'drivers' paths")
    rides = load_rides(cfg["rides"])
    drivers = load_drivers(cfg["drivers"], cfg.get("window", DEFAULT_WINDOW_S))
    logger.info(f"loaded {len(rides)} rides from {cfg['rides']}, {len(drivers)} drivers from {cfg['drivers']}")
    return rides, drivers
