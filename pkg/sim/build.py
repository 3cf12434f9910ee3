from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from common.errors import ConfigError
from common.misc import mean_var

__all__ = ["SimConfig", "EstimateRecord", "EstimatorStats", "MonteCarloStats", "RECORD_COLUMNS",
           "ESTIMATOR_COLUMNS"]

RECORD_COLUMNS = ["tau", "rho", "seed", "delta_rct_raw", "delta_rct_rb", "delta_sp",
                  "degenerate_flag"]

# estimator registry name -> record column
ESTIMATOR_COLUMNS = {"rct_raw": "delta_rct_raw", "rct_rb": "delta_rct_rb", "sp": "delta_sp"}


@dataclass
class SimConfig:
    inst: object
    rates: object
    taus: list
    rho: float = 0.5
    reps: int = 100
    seed: int = 0
    estimators: tuple = ("rct_raw", "rct_rb", "sp")
    gte_reps: Optional[int] = None
    threads: int = 1
    progress: bool = False

    def __post_init__(self):
        self.taus = [float(t) for t in np.atleast_1d(self.taus)]
        if self.reps < 1:
            raise ConfigError(f"replication count must be >= 1, got {self.reps}")
        if not self.taus or min(self.taus) < 1:
            raise ConfigError(f"every tau must be >= 1, got {self.taus}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho={self.rho} outside (0, 1)")
        unknown = set(self.estimators) - set(ESTIMATOR_COLUMNS)
        if unknown:
            raise ConfigError(f"unknown estimators {sorted(unknown)}")
        if self.gte_reps is None:
            self.gte_reps = self.reps


@dataclass
class EstimateRecord:
    """One replication of a simulated experiment; unselected estimators are NaN."""
    tau: float
    rho: float
    seed: str
    delta_rct_raw: float = float("nan")
    delta_rct_rb: float = float("nan")
    delta_sp: float = float("nan")
    degenerate_flag: bool = False
    perturbed: bool = False

    def to_row(self):
        row = asdict(self)
        row["degenerate_flag"] = int(self.degenerate_flag)
        return {k: row[k] for k in RECORD_COLUMNS}


@dataclass
class EstimatorStats:
    mean: float
    variance: Optional[float]
    stderr: Optional[float]
    scaled_variance: Optional[float]
    n: int

    @classmethod
    def from_values(cls, values, tau):
        mean, var = mean_var(values)
        n = len(values)
        if var is None:
            return cls(mean, None, None, None, n)
        return cls(mean, var, float(np.sqrt(var / n)), tau * var, n)


@dataclass
class MonteCarloStats:
    """Moments of every selected estimator at one density tau.

    ``scaled_variance`` is the sample variance of sqrt(tau) * estimate. The
    ``fluid`` entry carries the fluid-limit estimator values and asymptotic
    variances for comparison.
    """
    tau: float
    rho: float
    replications: int
    estimators: dict
    delta_true: EstimatorStats
    records: list = field(default_factory=list, repr=False)
    fluid: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(
            tau=self.tau,
            rho=self.rho,
            replications=self.replications,
            estimators={k: asdict(v) for k, v in self.estimators.items()},
            delta_true=asdict(self.delta_true),
            fluid=self.fluid,
        )

    def aggregate_rows(self):
        """Plot-ready rows: mean and stderr per estimator at this tau."""
        rows = []
        for name, stats in [("delta_true", self.delta_true)] + list(self.estimators.items()):
            rows.append(dict(tau=self.tau, rho=self.rho, estimator=name, mean=stats.mean,
                             stderr=stats.stderr, scaled_variance=stats.scaled_variance,
                             replications=stats.n))
        return rows
