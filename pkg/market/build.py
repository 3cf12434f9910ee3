from dataclasses import dataclass
from typing import Optional

import numpy as np
from fvcore.common.registry import Registry

from common.errors import ConfigError, DimensionMismatch, OutOfRange
from common.type_utils import cfg2dict
from lp import TOL_DUAL

__all__ = ["MARKET_REGISTRY", "MarketRates", "PsiProfile", "build_market"]

MARKET_REGISTRY = Registry("market")


@dataclass(frozen=True, eq=False)
class MarketRates:
    """Fluid experiment parameters: control demand rates, supply rates and the
    treatment effect on demand rates.

    The optional intent decomposition writes lam = lambda_tilde * p and
    beta = lambda_tilde * q, where the treatment moves the request probability
    of a type-i unit from p_i to p_i + q_i.
    """
    lam: np.ndarray
    pi: np.ndarray
    beta: np.ndarray
    lambda_tilde: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("lam", "pi", "beta", "lambda_tilde", "p", "q"):
            val = getattr(self, name)
            if val is not None:
                arr = np.atleast_1d(np.asarray(val, dtype=float))
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.lam.shape != self.beta.shape:
            raise DimensionMismatch(f"lambda {self.lam.shape} and beta {self.beta.shape} differ")
        if np.any(self.lam < 0) or np.any(self.pi < 0):
            raise ConfigError("arrival rates must be nonnegative")
        if np.any(self.lam + self.beta < -1e-12 * np.maximum(1.0, self.lam)):
            raise ConfigError("global-treatment rates lambda + beta must be nonnegative")
        intent = (self.lambda_tilde, self.p, self.q)
        if any(v is not None for v in intent):
            if any(v is None for v in intent):
                raise ConfigError("intent decomposition needs lambda_tilde, p and q together")
            if np.any(self.p < 0) or np.any(self.p > 1):
                raise ConfigError("request probabilities p must lie in [0, 1]")
            if np.any(self.q < -self.p) or np.any(self.q > 1 - self.p):
                raise ConfigError("q must lie in [-p, 1 - p]")
            ref = np.maximum(np.abs(self.lam), 1.0)
            if np.any(np.abs(self.lambda_tilde * self.p - self.lam) > 1e-12 * ref) or \
                    np.any(np.abs(self.lambda_tilde * self.q - self.beta) > 1e-12 * np.maximum(np.abs(self.beta), 1.0)):
                raise ConfigError("intent decomposition inconsistent with lambda / beta")

    @classmethod
    def from_intent(cls, lambda_tilde, p, q, pi):
        lambda_tilde = np.asarray(lambda_tilde, dtype=float)
        p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        return cls(lambda_tilde * p, pi, lambda_tilde * q, lambda_tilde, p, q)

    @property
    def n_d(self):
        return self.lam.shape[0]

    @property
    def n_s(self):
        return self.pi.shape[0]

    def sign_consistent(self):
        return bool(np.all(self.beta >= 0) or np.all(self.beta <= 0))

    def demand_at(self, eta):
        """Demand rates lambda + eta * beta for a partial treatment eta in [0, 1]."""
        if not 0.0 <= eta <= 1.0:
            raise OutOfRange(f"treatment fraction {eta} outside [0, 1]")
        d = self.lam + eta * self.beta
        if np.any(d < -1e-12 * np.maximum(1.0, self.lam)):
            raise OutOfRange(f"demand lambda + eta beta is negative at eta={eta}")
        return np.maximum(d, 0.0)

    def control_rates(self, rho):
        return (1.0 - rho) * self.lam

    def treatment_rates(self, rho):
        return rho * (self.lam + self.beta)

    def scaled(self, demand_factor=1.0, supply_factor=1.0):
        """Scale demand (lambda and beta jointly) and supply rates."""
        kw = {}
        if self.lambda_tilde is not None:
            kw = dict(lambda_tilde=self.lambda_tilde * demand_factor, p=self.p, q=self.q)
        return MarketRates(self.lam * demand_factor, self.pi * supply_factor,
                           self.beta * demand_factor, **kw)


@dataclass(frozen=True, eq=False)
class PsiProfile:
    """Piecewise-linear partial-treatment value function on [0, 1]."""
    breakpoints: np.ndarray
    values: np.ndarray
    slopes: np.ndarray

    @property
    def n_pieces(self):
        return int(self.slopes.shape[0])

    def __call__(self, eta):
        return float(np.interp(eta, self.breakpoints, self.values))

    def slope_at(self, eta):
        """Slope of the piece containing eta (right piece at a breakpoint)."""
        k = int(np.searchsorted(self.breakpoints, eta, side="right")) - 1
        return float(self.slopes[min(max(k, 0), self.n_pieces - 1)])

    def check(self, tol=TOL_DUAL):
        scale = max(1.0, float(np.max(np.abs(self.values))))
        widths = np.diff(self.breakpoints)
        if self.breakpoints[0] != 0.0 or self.breakpoints[-1] != 1.0 or np.any(widths <= 0):
            return False
        if np.any(np.diff(self.slopes) > tol * scale):
            return False
        jumps = self.values[1:] - self.values[:-1] - self.slopes * widths
        return bool(np.all(np.abs(jumps) <= tol * scale))

    def rows(self):
        """(eta, value, slope) rows; the slope is that of the piece starting at eta."""
        slopes = list(self.slopes) + [float("nan")]
        return [dict(eta=float(e), value=float(v), slope=float(m))
                for e, v, m in zip(self.breakpoints, self.values, slopes)]


def build_market(cfg):
    """Instance and rates from the ``market`` config node."""
    cfg = cfg2dict(cfg)
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigError("market config needs a 'name'")
    try:
        builder = MARKET_REGISTRY.get(cfg["name"])
    except KeyError as e:
        raise ConfigError(f"unknown market {cfg['name']!r}") from e
    return builder(cfg)
