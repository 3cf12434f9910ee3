import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from common.errors import BreakpointAmbiguity
from market import gte_fluid, gte_via_integral

from .fluid import rct_fluid_parts, sp_estimate_fluid

__all__ = ["EstimateReport", "bias_report", "expected_sp_uniform_rho", "rct_linearisation",
           "sp_linearisation"]

logger = logging.getLogger(__name__)


@dataclass
class EstimateReport:
    rho: float
    delta_true: float
    delta_rct: float
    delta_sp: float
    bias_rct: float
    bias_sp: float
    vbar: list
    a: list
    psi_hat_rct: tuple
    psi_hat_sp: tuple
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def rct_linearisation(vbar, rates, eta):
    """RCT view of psi: every unit of type i keeps its average value v*_i."""
    return float(np.asarray(vbar) @ (rates.lam + eta * rates.beta))


def sp_linearisation(psi_rho, sp, rho, eta):
    """Tangent of psi at rho with slope a^rho . beta."""
    return psi_rho + (eta - rho) * sp


def bias_report(inst, rates, rho, tol=1e-9):
    """Fluid GTE, both estimators and their biases at treatment fraction rho.

    A kink of psi at rho leaves the SP fields as NaN with the
    ``breakpoint_ambiguity`` flag set.
    """
    delta = gte_fluid(inst, rates)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rct, vbar, result, zero = rct_fluid_parts(inst, rates, rho)

    flags = dict(
        degenerate=bool(result.degenerate),
        sign_consistent=rates.sign_consistent(),
        symmetric=bool(rho == 0.5),
        breakpoint_ambiguity=False,
        zero_demand_types=[int(i) for i in np.flatnonzero(zero)],
    )
    psi_rho = result.objective
    try:
        sp = sp_estimate_fluid(inst, rates, rho, tol=tol)
        psi_hat_sp = tuple(sp_linearisation(psi_rho, sp, rho, eta) for eta in (0.0, 1.0))
    except BreakpointAmbiguity as e:
        logger.warning(str(e))
        flags["breakpoint_ambiguity"] = True
        sp = float("nan")
        psi_hat_sp = (float("nan"), float("nan"))
    if flags["degenerate"]:
        logger.warning(f"degenerate experiment point at rho={rho}")

    return EstimateReport(
        rho=float(rho),
        delta_true=float(delta),
        delta_rct=float(rct),
        delta_sp=float(sp),
        bias_rct=abs(rct - delta),
        bias_sp=abs(sp - delta),
        vbar=[float(v) for v in vbar],
        a=[float(v) for v in result.a],
        psi_hat_rct=(rct_linearisation(vbar, rates, 0.0), rct_linearisation(vbar, rates, 1.0)),
        psi_hat_sp=tuple(float(v) for v in psi_hat_sp),
        flags=flags,
    )


def expected_sp_uniform_rho(profile):
    """E[a^rho . beta] for rho ~ U(0, 1): the integral of psi', i.e. the GTE."""
    return gte_via_integral(profile)
