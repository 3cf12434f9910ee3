"""Registered market presets: the running geometric example, explicit
matrices from config, and random instances."""
import numpy as np

from common.errors import ConfigError
from common.type_utils import as_matrix, as_vector
from lp import MatchingInstance

from .build import MARKET_REGISTRY, MarketRates

__all__ = ["geometric_instance", "random_market"]


def geometric_instance(n_s=6, v0=2.0, ratio=0.5):
    """One demand type, ``n_s`` supply types with geometrically decreasing values."""
    v = v0 * ratio ** np.arange(n_s)
    return MatchingInstance.from_dense(v.reshape(1, -1))


def _rates(cfg, n_d, n_s):
    pi = as_vector(cfg.get("pi"), n_s, "pi", nonnegative=True)
    if cfg.get("lambda_tilde") is not None:
        return MarketRates.from_intent(
            as_vector(cfg["lambda_tilde"], n_d, "lambda_tilde", nonnegative=True),
            as_vector(cfg.get("p"), n_d, "p"),
            as_vector(cfg.get("q"), n_d, "q"),
            pi,
        )
    return MarketRates(
        as_vector(cfg.get("lam"), n_d, "lam", nonnegative=True),
        pi,
        as_vector(cfg.get("beta", 0.0), n_d, "beta"),
    )


@MARKET_REGISTRY.register()
def geometric(cfg):
    inst = geometric_instance(int(cfg.get("n_s", 6)), float(cfg.get("v0", 2.0)),
                              float(cfg.get("ratio", 0.5)))
    return inst, _rates(cfg, inst.n_d, inst.n_s)


@MARKET_REGISTRY.register()
def explicit(cfg):
    v = as_matrix(cfg.get("v"), name="v")
    mask = cfg.get("edge_mask")
    inst = MatchingInstance.from_dense(v, None if mask is None else np.asarray(mask, dtype=bool))
    return inst, _rates(cfg, inst.n_d, inst.n_s)


def random_market(rng, n_d, n_s, value_range=(0.0, 10.0), rate_range=(0.0, 5.0),
                  sign="positive", density=1.0):
    """Random instance with uniform values and rates.

    ``sign``: 'positive' (beta >= 0), 'negative' (-lam <= beta <= 0) or 'mixed'.
    """
    v = rng.uniform(*value_range, size=(n_d, n_s))
    mask = rng.random((n_d, n_s)) < density
    inst = MatchingInstance.from_dense(v, mask)
    lam = rng.uniform(*rate_range, size=n_d)
    pi = rng.uniform(*rate_range, size=n_s)
    if sign == "positive":
        beta = rng.uniform(0.0, rate_range[1], size=n_d)
    elif sign == "negative":
        beta = -lam * rng.uniform(0.0, 1.0, size=n_d)
    elif sign == "mixed":
        beta = rng.uniform(-1.0, 1.0, size=n_d) * np.where(rng.random(n_d) < 0.5, lam, rate_range[1])
        beta = np.maximum(beta, -lam)
    else:
        raise ConfigError(f"unknown sign pattern {sign!r}")
    return inst, MarketRates(lam, pi, beta)


@MARKET_REGISTRY.register()
def random(cfg):
    rng = np.random.default_rng(cfg.get("seed", 0))
    return random_market(rng, int(cfg.get("n_d", 3)), int(cfg.get("n_s", 3)),
                         sign=cfg.get("sign", "positive"),
                         density=float(cfg.get("density", 1.0)))
