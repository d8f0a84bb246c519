"""Failure-time distributions under normal use and their parameter gradients.

A unit fails softly when its degradation reaches the threshold.  For a series
system of independent failure modes the survival functions multiply.
"""
import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, stats

from .gamma_model import GammaComponentParams, MeasurementSchedule, rate
from .lmem_model import LmemComponentParams, time_profile_var, variance_info
from .specfun import dq_dshape, inv_reg_gamma_q_shape, reg_gamma_p, reg_gamma_q


class NoFailureRegionError(ArithmeticError):
    """The failure-time CDF never reaches the requested level."""


class Family(str, enum.Enum):
    GAMMA = "gamma"
    GAMMA_GAMMA = "gamma+gamma"
    GAMMA_LMEM = "gamma+lmem"


@dataclass(frozen=True)
class Scenario:
    family: Family
    gamma1: GammaComponentParams
    schedule: MeasurementSchedule
    x_u: float
    alpha: float = 0.5
    gamma2: Optional[GammaComponentParams] = None
    lmem: Optional[LmemComponentParams] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        need_g2 = self.family is Family.GAMMA_GAMMA
        need_lmem = self.family is Family.GAMMA_LMEM
        if (self.gamma2 is not None) != need_g2:
            raise ValueError(f"gamma2 must be given exactly for family {Family.GAMMA_GAMMA.value!r}")
        if (self.lmem is not None) != need_lmem:
            raise ValueError(f"lmem must be given exactly for family {Family.GAMMA_LMEM.value!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.x_u < 0:
            warnings.warn(f"normal use condition x_u={self.x_u} is not below the test region",
                          stacklevel=3)
        if need_lmem:
            self.lmem.check_use_condition(self.x_u)


# ---------------------------------------------------------------------------
# marginal distributions
# ---------------------------------------------------------------------------

def gamma_cdf_T(params, x_u, t):
    if t <= 0:
        return 0.0
    return reg_gamma_q(rate(params, x_u) * t, params.z0 / params.nu)


def gamma_pdf_T(params, x_u, t):
    g = float(rate(params, x_u))
    return g * dq_dshape(g * t, params.z0 / params.nu)


def _lmem_std(params, x_u, t):
    return (params.mean_path(x_u, t) - params.y20) / params.sigma0


def lmem_cdf_T(params, x_u, t):
    return float(stats.norm.cdf(_lmem_std(params, x_u, t)))


def lmem_pdf_T(params, x_u, t):
    slope = params.beta22 + params.beta23 * x_u
    return float(stats.norm.pdf(_lmem_std(params, x_u, t))) * slope / params.sigma0


def marginal_cdfs(scenario, t):
    """CDFs of the component failure times at ``t`` (one or two values)."""
    out = [gamma_cdf_T(scenario.gamma1, scenario.x_u, t)]
    if scenario.family is Family.GAMMA_GAMMA:
        out.append(gamma_cdf_T(scenario.gamma2, scenario.x_u, t))
    elif scenario.family is Family.GAMMA_LMEM:
        out.append(lmem_cdf_T(scenario.lmem, scenario.x_u, t))
    return out


def marginal_sfs(scenario, t):
    """Survival functions 1 - F_l(t), computed without cancellation."""
    x_u = scenario.x_u
    g = scenario.gamma1
    out = [1.0 if t <= 0 else reg_gamma_p(rate(g, x_u) * t, g.z0 / g.nu)]
    if scenario.family is Family.GAMMA_GAMMA:
        g = scenario.gamma2
        out.append(1.0 if t <= 0 else reg_gamma_p(rate(g, x_u) * t, g.z0 / g.nu))
    elif scenario.family is Family.GAMMA_LMEM:
        out.append(float(stats.norm.sf(_lmem_std(scenario.lmem, x_u, t))))
    return out


def _marginal_pdfs(scenario, t):
    out = [gamma_pdf_T(scenario.gamma1, scenario.x_u, t)]
    if scenario.family is Family.GAMMA_GAMMA:
        out.append(gamma_pdf_T(scenario.gamma2, scenario.x_u, t))
    elif scenario.family is Family.GAMMA_LMEM:
        out.append(lmem_pdf_T(scenario.lmem, scenario.x_u, t))
    return out


def system_cdf(scenario, t):
    """F_T(t) = 1 - Π (1 - F_l(t)) over the failure modes."""
    cdfs = marginal_cdfs(scenario, t)
    if len(cdfs) == 1:
        return cdfs[0]
    if max(cdfs) >= 1.0:
        return 1.0
    # log1p/expm1 keep relative accuracy in the far lower tail
    return -math.expm1(sum(math.log1p(-f) for f in cdfs))


def system_sf(scenario, t):
    """1 - F_T(t), accurate in the upper tail."""
    return math.prod(marginal_sfs(scenario, t))


def system_pdf(scenario, t):
    cdfs = marginal_cdfs(scenario, t)
    pdfs = _marginal_pdfs(scenario, t)
    if len(cdfs) == 1:
        return pdfs[0]
    return pdfs[0] * (1.0 - cdfs[1]) + pdfs[1] * (1.0 - cdfs[0])


def quantile(scenario, alpha=None):
    """The ``alpha``-quantile of the system failure time (scenario level by default)."""
    alpha = scenario.alpha if alpha is None else alpha

    def g(t):
        return system_cdf(scenario, t) - alpha

    lo, hi = 1e-6, 1.0
    if g(lo) >= 0:
        raise NoFailureRegionError(f"F_T({lo}) already exceeds alpha={alpha}")
    while g(hi) < 0:
        hi *= 2.0
        if hi > 2.0**30:
            raise NoFailureRegionError(f"F_T stays below alpha={alpha} up to t=2^30")
    return optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def gamma_quantile_closed_form(params, x_u, alpha):
    """t_alpha = g⁻¹(alpha) / γ(x_u) with g(s) = Q(s, z0/nu)."""
    return inv_reg_gamma_q_shape(alpha, params.z0 / params.nu) / float(rate(params, x_u))


# ---------------------------------------------------------------------------
# gradients of F_T(t_alpha)
# ---------------------------------------------------------------------------

def grad_const_gamma(params, other_survival, x_u, t_alpha):
    """Scalar c_l with ∂F_T(t_alpha)/∂beta_l = c_l (1, x_u)ᵀ."""
    kappa = float(rate(params, x_u)) * t_alpha
    return kappa * other_survival * dq_dshape(kappa, params.z0 / params.nu)


def lmem_location_gradient(params, x_u, t):
    """∂F_{T2}(t)/∂(beta20, beta21, beta22, beta23)."""
    lead = float(stats.norm.pdf(_lmem_std(params, x_u, t))) / params.sigma0
    return lead * np.kron([1.0, t], [1.0, x_u])


def lmem_variance_gradient(params, x_u, t):
    """∂F_{T2}(t)/∂(sigma0_sq, sigma_eps_sq); the CDF does not involve sigma_eps_sq."""
    u = _lmem_std(params, x_u, t)
    return np.array([-float(stats.norm.pdf(u)) * u / (2.0 * params.sigma0_sq), 0.0])


def grad_const_lmem(scenario, t_alpha):
    """Scalar c_2 weighting the LMEM block of the compound criterion."""
    if scenario.family is not Family.GAMMA_LMEM:
        raise ValueError("grad_const_lmem needs a gamma+lmem scenario")
    p = scenario.lmem
    surv1 = 1.0 - gamma_cdf_T(scenario.gamma1, scenario.x_u, t_alpha)
    dens = float(stats.norm.pdf(_lmem_std(p, scenario.x_u, t_alpha))) / p.sigma0
    return surv1 * dens * math.sqrt(time_profile_var(scenario.schedule, p, t_alpha))


@dataclass(frozen=True)
class GradientConstants:
    t_alpha: float
    density: float
    c1: float
    c2: Optional[float] = None
    c_var_sq: float = 0.0


def gradient_constants(scenario):
    """t_alpha, f_T(t_alpha) and the weighting constants of the criterion."""
    ta = quantile(scenario)
    dens = system_pdf(scenario, ta)
    cdfs = marginal_cdfs(scenario, ta)
    if scenario.family is Family.GAMMA:
        return GradientConstants(ta, dens, grad_const_gamma(scenario.gamma1, 1.0, scenario.x_u, ta))
    c1 = grad_const_gamma(scenario.gamma1, 1.0 - cdfs[1], scenario.x_u, ta)
    if scenario.family is Family.GAMMA_GAMMA:
        c2 = grad_const_gamma(scenario.gamma2, 1.0 - cdfs[0], scenario.x_u, ta)
        return GradientConstants(ta, dens, c1, c2)
    c2 = grad_const_lmem(scenario, ta)
    cv = (1.0 - cdfs[0]) * lmem_variance_gradient(scenario.lmem, scenario.x_u, ta)
    info = variance_info(scenario.lmem, scenario.schedule.k)
    return GradientConstants(ta, dens, c1, c2, float(cv @ np.linalg.solve(info, cv)))


def marginal_quantiles(scenario, alpha=None):
    """alpha-quantile of each component failure time on its own."""
    alpha = scenario.alpha if alpha is None else alpha
    out = [gamma_quantile_closed_form(scenario.gamma1, scenario.x_u, alpha)]
    if scenario.family is Family.GAMMA_GAMMA:
        out.append(gamma_quantile_closed_form(scenario.gamma2, scenario.x_u, alpha))
    elif scenario.family is Family.GAMMA_LMEM:
        p, xu = scenario.lmem, scenario.x_u
        level = p.y20 + p.sigma0 * float(stats.norm.ppf(alpha))
        out.append((level - p.beta20 - p.beta21 * xu) / (p.beta22 + p.beta23 * xu))
    return out
