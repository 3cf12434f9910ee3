import hashlib
import json

import numpy as np
from omegaconf import DictConfig, ListConfig, OmegaConf

from .errors import ConfigError, DimensionMismatch


def cfg2dict(cfg):
    if isinstance(cfg, (DictConfig, ListConfig)):
        return OmegaConf.to_container(cfg, resolve=True)
    return cfg


def config_digest(cfg, exclude=("exp_dir", "base_dir")):
    """Stable sha256 of the canonical JSON form of a config."""
    data = cfg2dict(cfg)
    if isinstance(data, dict):
        data = {k: v for k, v in data.items() if k not in exclude}
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def as_vector(values, length=None, name="vector", nonnegative=False):
    """Coerce a config value (scalar or list) into a float vector."""
    values = cfg2dict(values)
    if values is None:
        raise ConfigError(f"missing {name}")
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} is not numeric: {values!r}") from e
    if arr.ndim == 0:
        if length is None:
            arr = arr.reshape(1)
        else:
            arr = np.full(length, float(arr))
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} has non-finite entries")
    if nonnegative and np.any(arr < 0):
        raise ConfigError(f"{name} must be nonnegative")
    return arr


def as_matrix(values, shape=None, name="matrix"):
    values = cfg2dict(values)
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} is not numeric") from e
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    return arr
