"""Spatial ride-hailing experiment on unit-type matchings.

Every ride is its own demand type and every driver its own supply type, so
the matching LP is degenerate and shadow prices come from the perturbed
problem (unit demands lowered by epsilon).
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from tabulate import tabulate

from common.errors import ConfigError, EmptyGraph
from common.misc import child_seeds, mean_var, parallel_map, seed_record
from data import DEFAULT_WINDOW_S, build_dataset
from estimators import ExperimentDraw, rct_estimate_sample_rb, sp_estimate_sample
from lp import MatchingInstance, solve_matching
from market import perturbed_solve, phi

__all__ = ["EARTH_RADIUS_KM", "RideshareConfig", "haversine", "pickup_distances",
           "build_matching", "run_rideshare_experiment", "RIDESHARE_RECORD_COLUMNS"]

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

RIDESHARE_RECORD_COLUMNS = ["replication", "seed", "n_experiment", "n_treatment", "n_control",
                            "true_effect", "rct_estimate", "sp_estimate", "degenerate_flag"]


def haversine(p, q):
    """Great-circle distance in km between (lat, lon) points; broadcasts over arrays."""
    lat1, lon1 = np.radians(p[0]), np.radians(p[1])
    lat2, lon2 = np.radians(q[0]), np.radians(q[1])
    h = np.sin((lat2 - lat1) / 2.0) ** 2 + \
        np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


@dataclass
class RideshareConfig:
    n_drivers: int = 2000
    n_rides: int = 2000
    effect_e: float = 0.10
    k: int = 50
    rho: float = 0.5
    epsilon: Optional[float] = None
    control_keep: Optional[float] = None
    window: float = DEFAULT_WINDOW_S
    reps: int = 20
    seed: int = 0
    threads: int = 1
    progress: bool = False
    data: dict = field(default_factory=lambda: dict(name="synthetic"))

    def __post_init__(self):
        if not self.effect_e > -1.0:
            raise ConfigError(f"effect e must exceed -1, got {self.effect_e}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho={self.rho} outside (0, 1)")
        if self.reps < 1:
            raise ConfigError(f"replication count must be >= 1, got {self.reps}")
        if self.n_rides < 1 or self.n_drivers < 1:
            raise ConfigError("need at least one ride and one driver")
        if not self.window > 0:
            raise ConfigError("driver window must be positive")
        if self.control_keep is not None and not 0.0 < self.control_keep <= 1.0:
            raise ConfigError(f"control_keep={self.control_keep} outside (0, 1]")

    @property
    def keep_probability(self):
        """Probability a control ride survives; 1/(1+e) unless set explicitly."""
        if self.control_keep is not None:
            return float(self.control_keep)
        return 1.0 / (1.0 + self.effect_e)

    @classmethod
    def from_cfg(cls, cfg):
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})


def pickup_distances(rides, drivers):
    """[n_rides x n_drivers] km from each driver to each pickup."""
    return haversine((rides.pickup_lat[:, None], rides.pickup_lon[:, None]),
                     (drivers.lat[None, :], drivers.lon[None, :]))


def _time_feasible(rides, drivers):
    t = rides.request_time[:, None]
    start = drivers.online_time[None, :]
    return (t >= start) & (t < start + drivers.window[None, :])


def _nearest(dist, k, axis):
    """Mask of the k smallest finite entries along ``axis``; ties go to the lower index."""
    order = np.argsort(dist, axis=axis, kind="stable")
    order = order[:, :k] if axis == 1 else order[:k, :]
    mask = np.zeros(dist.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=axis)
    return mask & np.isfinite(dist)


def build_matching(rides, drivers, config):
    """Unit-type matching instance with d = s = 1.

    An edge needs the ride to arrive inside the driver's window, to be among
    the k nearest time-feasible rides of the driver or the driver among the k
    nearest time-feasible drivers of the ride, and positive efficiency
    (ride distance minus pickup distance).
    """
    if len(rides) == 0 or len(drivers) == 0:
        raise EmptyGraph("need at least one ride and one driver")
    pickup = pickup_distances(rides, drivers)
    feasible = _time_feasible(rides, drivers)
    masked = np.where(feasible, pickup, np.inf)
    near = _nearest(masked, config.k, axis=1) | _nearest(masked, config.k, axis=0)

    ride_km = haversine((rides.pickup_lat, rides.pickup_lon), (rides.dropoff_lat, rides.dropoff_lon))
    value = ride_km[:, None] - pickup
    rows, cols = np.nonzero(near & feasible & (value > 0))
    if rows.size == 0:
        raise EmptyGraph("no ride/driver pair is feasible with positive efficiency")
    inst = MatchingInstance.from_edges(len(rides), len(drivers), rows, cols, value[rows, cols])
    n_iso = int(inst.isolated_demand().sum())
    if n_iso:
        logger.debug(f"{n_iso} of {inst.n_d} rides have no admissible driver")
    return inst, np.ones(inst.n_d), np.ones(inst.n_s)


def _sample(rng, table, n):
    if len(table) <= n:
        return table
    return table.subset(np.sort(rng.choice(len(table), size=n, replace=False)))


def _replication(rides_pool, drivers_pool, config, r, seed):
    sample_seed, assign_seed, thin_seed, gc_seed = child_seeds(seed, 4)
    rng = np.random.default_rng(sample_seed)
    rides = _sample(rng, rides_pool, config.n_rides)
    drivers = _sample(rng, drivers_pool, config.n_drivers)
    inst, d, s = build_matching(rides, drivers, config)

    # global treatment serves every ride, global control a 1/(1+e) thinning
    keep_gc = np.random.default_rng(gc_seed).random(inst.n_d) < config.keep_probability
    true_effect = phi(inst, d, s) - phi(inst, keep_gc.astype(float), s)

    treated = np.random.default_rng(assign_seed).random(inst.n_d) < config.rho
    kept = np.random.default_rng(thin_seed).random(inst.n_d) < config.keep_probability
    survivors = np.flatnonzero(treated | kept)
    record = dict(replication=r, seed=seed_record(seed), n_experiment=int(survivors.size),
                  n_treatment=int(treated.sum()), n_control=int(survivors.size - treated.sum()),
                  true_effect=float(true_effect), rct_estimate=0.0, sp_estimate=0.0,
                  degenerate_flag=False)
    if survivors.size == 0:
        return record

    sub = inst.restrict_demand(survivors)
    ones = np.ones(sub.n_d)
    result = solve_matching(sub, ones, s)
    epsilon = config.epsilon if config.epsilon is not None else 0.5 / sub.n_d
    duals = perturbed_solve(sub, ones, s, epsilon=epsilon).a

    D_treatment = treated[survivors].astype(np.int64)
    draw = ExperimentDraw(1.0, config.rho, 1 - D_treatment, D_treatment, s.astype(np.int64),
                          seed_record(seed))
    record.update(rct_estimate=rct_estimate_sample_rb(draw, result.x, sub),
                  sp_estimate=sp_estimate_sample(draw, duals),
                  degenerate_flag=bool(result.degenerate))
    return record


def run_rideshare_experiment(config, rides=None, drivers=None):
    """Replicated experiment; returns (report, per-replication records).

    Control rides survive with probability 1/(1+e) while treatment keeps all
    its rides, so the pooled experiment demand mixes the two regimes in
    proportion rho.
    """
    if rides is None or drivers is None:
        rides, drivers = build_dataset(config.data, seed=config.seed)
    if len(rides) < config.n_rides or len(drivers) < config.n_drivers:
        logger.warning(f"data has {len(rides)} rides / {len(drivers)} drivers, fewer than "
                       f"requested {config.n_rides} / {config.n_drivers}; using all")

    seeds = child_seeds(config.seed, config.reps)
    records = parallel_map(lambda rs: _replication(rides, drivers, config, *rs),
                           list(enumerate(seeds)), threads=config.threads,
                           desc="rideshare", progress=config.progress)

    stats = {}
    for key in ("true_effect", "rct_estimate", "sp_estimate"):
        mean, var = mean_var([rec[key] for rec in records])
        stats[key] = (mean, None if var is None else float(np.sqrt(var)))
    report = dict(
        true_effect=stats["true_effect"][0],
        rct_estimate=stats["rct_estimate"][0],
        sp_estimate=stats["sp_estimate"][0],
        true_std=stats["true_effect"][1],
        rct_std=stats["rct_estimate"][1],
        sp_std=stats["sp_estimate"][1],
        n_rides=min(len(rides), config.n_rides),
        n_drivers=min(len(drivers), config.n_drivers),
        effect_e=float(config.effect_e),
        replications=config.reps,
    )
    logger.info("\n" + tabulate([[k, stats[k][0], stats[k][1]] for k in stats],
                                headers=["quantity", "mean", "std"], floatfmt=".6g"))
    return report, records
