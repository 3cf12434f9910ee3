from dataclasses import dataclass
from typing import Optional

import numpy as np
from fvcore.common.registry import Registry

from common.errors import ConfigError, InconsistentCounts

__all__ = ["ESTIMATOR_REGISTRY", "ExperimentDraw", "MatchSplit", "CycleData", "build_estimators"]

ESTIMATOR_REGISTRY = Registry("estimator")


@dataclass(frozen=True, eq=False)
class ExperimentDraw:
    """Realised counts of one matching cycle at density tau."""
    tau: float
    rho: float
    D_control: np.ndarray
    D_treatment: np.ndarray
    S: np.ndarray
    seed: str = ""

    def __post_init__(self):
        for name in ("D_control", "D_treatment", "S"):
            arr = np.asarray(getattr(self, name))
            if np.any(arr < 0):
                raise InconsistentCounts(f"{name} has negative counts")
            object.__setattr__(self, name, arr)

    @property
    def D_experiment(self):
        return self.D_control + self.D_treatment


@dataclass(frozen=True, eq=False)
class MatchSplit:
    """Matched counts of the experiment matching by treatment group."""
    X_control: np.ndarray
    X_treatment: np.ndarray

    @property
    def X_experiment(self):
        return self.X_control + self.X_treatment


@dataclass(eq=False)
class CycleData:
    """Everything a sampled estimator may read from one simulated cycle."""
    inst: object
    draw: ExperimentDraw
    x_total: np.ndarray
    duals_a: np.ndarray
    split: Optional[MatchSplit] = None


def build_estimators(names):
    """Resolve estimator names into (name, fn) pairs."""
    out = []
    for name in names:
        try:
            out.append((name, ESTIMATOR_REGISTRY.get(name)))
        except KeyError as e:
            raise ConfigError(f"unknown estimator {name!r}") from e
    return out
