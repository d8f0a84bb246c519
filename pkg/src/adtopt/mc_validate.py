"""Monte Carlo check of the asymptotic variance of the quantile estimator.

Each replication simulates a full experiment under an exact design, fits all
components by maximum likelihood, and evaluates the failure-time quantile at
the fitted parameters.  Replication ``r`` draws from its own Philox stream
keyed by ``(seed, r)``, so results do not depend on execution order.
"""
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .criterion import absolute_avar
from .failure_time import Family, quantile
from .gamma_model import GammaComponentParams, rate
from .design import Design
from .lmem_model import LmemComponentParams, covariance_V_inv, time_design_matrix, variance_info
from .specfun import inv_reg_gamma_q_shape

GRAD_TOL = 1e-8  # max-norm score at an accepted estimate


@dataclass(frozen=True)
class SimConfig:
    n_units: int
    replications: int
    seed: int
    design: object

    def __post_init__(self):
        if self.n_units < 4:
            raise ValueError("n_units must be at least 4")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")

    @property
    def counts(self):
        return self.design.apportion(self.n_units)

    @property
    def exact_design(self):
        """The apportioned design actually run, as proportions n_i / n."""
        counts = self.counts
        keep = counts > 0
        return Design(tuple(self.design.x[keep]), tuple(counts[keep] / self.n_units))

    @property
    def unit_stress(self):
        return np.repeat(self.design.x, self.counts)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    gamma1: np.ndarray  # n × k increments
    gamma2: Optional[np.ndarray] = None
    lmem: Optional[np.ndarray] = None  # n × (k+1) responses incl. t_0 = 0


@dataclass(frozen=True)
class FitResult:
    gamma1: GammaComponentParams
    gamma2: Optional[GammaComponentParams] = None
    lmem: Optional[LmemComponentParams] = None
    converged: bool = True


@dataclass(frozen=True)
class AvarReport:
    n_units: int
    replications: int
    seed: int
    mean_estimate: float
    empirical_var: float
    predicted_var: float  # absolute aVar / n
    ratio: float
    failed_fits: int


def replication_rng(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate_gamma_increments(params, x, schedule, rng):
    return rng.gamma(shape=float(rate(params, x)) * schedule.deltas, scale=params.nu)


def simulate_lmem_responses(params, x, schedule, rng):
    t = np.concatenate(([0.0], schedule.times))
    intercept = rng.normal(params.beta20, math.sqrt(params.sigma0_sq))
    errors = rng.normal(0.0, math.sqrt(params.sigma_eps_sq), size=t.size)
    return intercept + params.beta21 * x + (params.beta22 + params.beta23 * x) * t + errors


def simulate_dataset(scenario, unit_stress, rng):
    x = np.asarray(unit_stress, dtype=float)
    sch = scenario.schedule
    g1 = rng.gamma(shape=rate(scenario.gamma1, x)[:, None] * sch.deltas, scale=scenario.gamma1.nu)
    g2 = lm = None
    if scenario.family is Family.GAMMA_GAMMA:
        p = scenario.gamma2
        g2 = rng.gamma(shape=rate(p, x)[:, None] * sch.deltas, scale=p.nu)
    elif scenario.family is Family.GAMMA_LMEM:
        p = scenario.lmem
        t = np.concatenate(([0.0], sch.times))
        intercept = rng.normal(p.beta20, math.sqrt(p.sigma0_sq), size=x.size)
        errors = rng.normal(0.0, math.sqrt(p.sigma_eps_sq), size=(x.size, t.size))
        lm = (intercept + p.beta21 * x)[:, None] + np.outer(p.beta22 + p.beta23 * x, t) + errors
    return Dataset(x, g1, g2, lm)


# ---------------------------------------------------------------------------
# gamma component: Newton-Raphson on (beta0, beta1), nu known
# ---------------------------------------------------------------------------

def gamma_loglik(beta, x, deltas, Y, nu):
    shape = np.exp(beta[0] + beta[1] * x)[:, None] * deltas
    return float(np.sum((shape - 1.0) * np.log(Y) - Y / nu - special.gammaln(shape) - shape * math.log(nu)))


def gamma_score_hessian(beta, x, deltas, Y, nu):
    shape = np.exp(beta[0] + beta[1] * x)[:, None] * deltas
    r = shape * (np.log(Y) - special.psi(shape) - math.log(nu))
    s1 = r.sum(axis=1)
    h1 = (r - shape**2 * special.polygamma(1, shape)).sum(axis=1)
    F = np.column_stack([np.ones_like(x), x])
    return F.T @ s1, (F * h1[:, None]).T @ F


def fit_gamma(x, Y, schedule, nu, max_iter=100):
    """MLE of (beta0, beta1); returns (beta, converged)."""
    x = np.asarray(x, dtype=float)
    if np.unique(x).size < 2:
        raise ValueError("gamma fit needs at least two distinct stress levels")
    deltas = schedule.deltas
    # start from log mean rate regressed on stress
    eta = np.log(Y.sum(axis=1) / (schedule.times[-1] * nu))
    F = np.column_stack([np.ones_like(x), x])
    beta = np.linalg.lstsq(F, eta, rcond=None)[0]
    ll = gamma_loglik(beta, x, deltas, Y, nu)
    for _ in range(max_iter):
        g, H = gamma_score_hessian(beta, x, deltas, Y, nu)
        if np.max(np.abs(g)) < GRAD_TOL:
            return beta, True
        try:
            step = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            return beta, False
        if g @ step <= 0:  # not an ascent direction; fall back to gradient
            step = g / np.max(np.abs(H))
        t = 1.0
        while t > 1e-10:
            cand = beta + t * step
            ll_new = gamma_loglik(cand, x, deltas, Y, nu)
            if ll_new >= ll - 1e-12 * abs(ll):
                break
            t *= 0.5
        beta, ll = cand, ll_new
    g, _ = gamma_score_hessian(beta, x, deltas, Y, nu)
    return beta, bool(np.max(np.abs(g)) < 1e-6)


# ---------------------------------------------------------------------------
# LMEM component: GLS location update + Fisher scoring on the variances
# ---------------------------------------------------------------------------

def _lmem_gls(x, Y, D, v_inv):
    # rows of X_i are (1, x_i, t_j, x_i t_j)
    F = np.column_stack([np.ones_like(x), x])
    A = D.T @ v_inv @ D
    info = np.kron(A, F.T @ F)
    rhs = np.einsum("jk,jl,il,im->km", D, v_inv, Y, F).reshape(-1)
    return np.linalg.solve(info, rhs)


def lmem_residuals(beta, x, Y, D):
    F = np.column_stack([np.ones_like(x), x])
    B = beta.reshape(2, 2)  # [[b20, b21], [b22, b23]]
    return Y - F @ B.T @ D.T


def lmem_loglik(beta, sigma0_sq, sigma_eps_sq, x, Y, D):
    n, m = Y.shape
    R = lmem_residuals(beta, x, Y, D)
    a, b = sigma_eps_sq, sigma_eps_sq + m * sigma0_sq
    logdet = (m - 1) * math.log(a) + math.log(b)
    rs = R.sum(axis=1)
    quad = (np.sum(R * R) - (sigma0_sq / b) * np.sum(rs * rs)) / a
    return -0.5 * (n * logdet + quad + n * m * math.log(2 * math.pi))


def lmem_score(beta, sigma0_sq, sigma_eps_sq, x, Y, D):
    """Score in (beta20..beta23, sigma0_sq, sigma_eps_sq)."""
    n, m = Y.shape
    R = lmem_residuals(beta, x, Y, D)
    a, b = sigma_eps_sq, sigma_eps_sq + m * sigma0_sq
    vinv_r = (R - (sigma0_sq / b) * R.sum(axis=1, keepdims=True)) / a
    F = np.column_stack([np.ones_like(x), x])
    s_beta = np.einsum("jk,ij,il->kl", D, vinv_r, F).reshape(-1)
    one_vinv_r = vinv_r.sum(axis=1)
    tr_v = (m - 1) / a + 1.0 / b
    s0 = -0.5 * (n * m / b - np.sum(one_vinv_r**2))
    se = -0.5 * (n * tr_v - np.sum(vinv_r**2))
    return np.concatenate([s_beta, [s0, se]])


def fit_lmem(x, Y, schedule, y20, max_iter=200):
    """MLE of the LMEM component; returns (LmemComponentParams, converged)."""
    x = np.asarray(x, dtype=float)
    if np.unique(x).size < 2:
        raise ValueError("LMEM fit needs at least two distinct stress levels")
    D = time_design_matrix(schedule)
    n, m = Y.shape
    # moment start: within-unit and between-unit residual spread from OLS
    beta = _lmem_gls(x, Y, D, np.eye(m))
    R = lmem_residuals(beta, x, Y, D)
    within = np.var(R - R.mean(axis=1, keepdims=True), ddof=0) * m / max(m - 1, 1)
    s_eps = max(within, 1e-8)
    s0 = max(np.var(R.mean(axis=1)) - s_eps / m, 1e-3 * s_eps)
    converged = False
    ll = -np.inf
    for _ in range(max_iter):
        p = LmemComponentParams(*beta, s0, s_eps, y20)
        beta = _lmem_gls(x, Y, D, covariance_V_inv(p, schedule.k))
        g = lmem_score(beta, s0, s_eps, x, Y, D)[4:]
        ll = lmem_loglik(beta, s0, s_eps, x, Y, D)
        if np.max(np.abs(g)) < GRAD_TOL:
            converged = True
            break
        step = np.linalg.solve(n * variance_info(p, schedule.k), g)
        t = 1.0
        while t > 1e-12:
            c0, ce = s0 + t * step[0], s_eps + t * step[1]
            if c0 > 0 and ce > 0 and lmem_loglik(beta, c0, ce, x, Y, D) >= ll - 1e-12 * abs(ll):
                break
            t *= 0.5
        else:
            break
        s0, s_eps = c0, ce
    return LmemComponentParams(*beta, s0, s_eps, y20), converged


def fit_mle(scenario, dataset):
    """Fit every component of ``scenario`` to ``dataset`` separately."""
    sch = scenario.schedule
    g1 = scenario.gamma1
    b1, ok1 = fit_gamma(dataset.x, dataset.gamma1, sch, g1.nu)
    out = {"gamma1": dataclasses.replace(g1, beta0=float(b1[0]), beta1=float(b1[1]))}
    ok = ok1
    if scenario.family is Family.GAMMA_GAMMA:
        g2 = scenario.gamma2
        b2, ok2 = fit_gamma(dataset.x, dataset.gamma2, sch, g2.nu)
        out["gamma2"] = dataclasses.replace(g2, beta0=float(b2[0]), beta1=float(b2[1]))
        ok = ok and ok2
    elif scenario.family is Family.GAMMA_LMEM:
        lm, ok2 = fit_lmem(dataset.x, dataset.lmem, sch, scenario.lmem.y20)
        out["lmem"] = lm
        ok = ok and ok2
    return FitResult(converged=ok, **out)


def fitted_scenario(scenario, fit):
    return dataclasses.replace(scenario, gamma1=fit.gamma1, gamma2=fit.gamma2, lmem=fit.lmem)


# ---------------------------------------------------------------------------
# replication driver
# ---------------------------------------------------------------------------

def _one_replication(scenario, sim, index, shape_alpha):
    rng = replication_rng(sim.seed, index)
    data = simulate_dataset(scenario, sim.unit_stress, rng)
    try:
        fit = fit_mle(scenario, data)
    except (ValueError, np.linalg.LinAlgError, ArithmeticError):
        return np.nan
    if not fit.converged:
        return np.nan
    if shape_alpha is not None:
        return shape_alpha / float(rate(fit.gamma1, scenario.x_u))
    try:
        return quantile(fitted_scenario(scenario, fit))
    except ArithmeticError:
        return np.nan


def replicate_quantiles(scenario, sim, workers=1):
    """Estimated quantile per replication (NaN where the fit failed), in index order."""
    shape_alpha = None
    if scenario.family is Family.GAMMA:
        # the shape quantile does not depend on beta
        g = scenario.gamma1
        shape_alpha = inv_reg_gamma_q_shape(scenario.alpha, g.z0 / g.nu)
    idx = range(sim.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(lambda r: _one_replication(scenario, sim, r, shape_alpha), idx))
    else:
        out = [_one_replication(scenario, sim, r, shape_alpha) for r in idx]
    return np.array(out)


def empirical_avar_check(scenario, sim, workers=1):
    est = replicate_quantiles(scenario, sim, workers)
    good = est[np.isfinite(est)]
    emp = float(np.var(good, ddof=1)) if good.size > 1 else float("nan")
    pred = absolute_avar(scenario, sim.exact_design) / sim.n_units
    return AvarReport(
        n_units=sim.n_units,
        replications=sim.replications,
        seed=sim.seed,
        mean_estimate=float(np.mean(good)) if good.size else float("nan"),
        empirical_var=emp,
        predicted_var=pred,
        ratio=emp / pred,
        failed_fits=int(est.size - good.size),
    )
