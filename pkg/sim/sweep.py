import logging

import numpy as np

from common.errors import ConfigError
from estimators import bias_report

__all__ = ["supply_scaling_sweep", "SWEEP_DIRECTIONS"]

logger = logging.getLogger(__name__)

SWEEP_DIRECTIONS = ("oversupply", "undersupply")


def _scaled(rates, factor, direction):
    if direction == "oversupply":
        return rates.scaled(supply_factor=factor)
    return rates.scaled(demand_factor=factor)


def supply_scaling_sweep(inst, rates, factors, rho=0.5, direction="both"):
    """Fluid biases as the market is pushed towards over- or undersupply.

    Oversupply multiplies pi by the factor, undersupply multiplies lambda and
    beta jointly. ``direction="both"`` emits a row per direction and factor.
    """
    directions = SWEEP_DIRECTIONS if direction == "both" else (direction,)
    for d in directions:
        if d not in SWEEP_DIRECTIONS:
            raise ConfigError(f"unknown sweep direction {d!r}")
    if np.any(rates.beta < 0):
        logger.warning("imbalance limits are only characterised for beta >= 0")

    rows = []
    for d in directions:
        for f in factors:
            if f <= 0:
                raise ConfigError(f"scaling factor must be positive, got {f}")
            report = bias_report(inst, _scaled(rates, float(f), d), rho)
            rows.append(dict(direction=d, factor=float(f), delta_true=report.delta_true,
                             delta_rct=report.delta_rct, delta_sp=report.delta_sp,
                             bias_rct=report.bias_rct, bias_sp=report.bias_sp,
                             degenerate=report.flags["degenerate"]))
    return rows
