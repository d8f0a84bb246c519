"""Gamma-process degradation component with log-linear stress-rate link.

Increments over an interval of length Δ at stress x are Gamma distributed with
shape ``exp(beta0 + beta1 x) Δ`` and known scale ``nu``.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .specfun import trigamma


@dataclass(frozen=True)
class GammaComponentParams:
    beta0: float
    beta1: float
    nu: float
    z0: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"scale nu must be positive, got {self.nu!r}")
        if not self.z0 > 0:
            raise ValueError(f"threshold z0 must be positive, got {self.z0!r}")
        if not self.beta1 > 0:
            warnings.warn(
                f"beta1={self.beta1} <= 0: stress does not accelerate degradation",
                stacklevel=3,
            )

    @property
    def beta(self):
        return np.array([self.beta0, self.beta1])


@dataclass(frozen=True)
class MeasurementSchedule:
    """Measurement times t_1 < ... < t_k; t_0 = 0 is implied."""

    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in np.atleast_1d(self.times))
        object.__setattr__(self, "times", times)
        if len(times) == 0:
            raise ValueError("schedule needs at least one time point")
        if times[0] <= 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"times must be positive and strictly increasing, got {times}")

    @property
    def k(self):
        return len(self.times)

    @property
    def deltas(self):
        return np.diff(np.concatenate(([0.0], self.times)))


def rate(params, x):
    return np.exp(params.beta0 + params.beta1 * np.asarray(x, dtype=float))


def increment_loglik(params, x, delta, y):
    """Log-density of one increment ``y`` observed over ``delta`` at stress ``x``."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("increments must be positive")
    if np.any(np.asarray(delta) <= 0):
        raise ValueError("interval lengths must be positive")
    shape = rate(params, x) * delta
    return (shape - 1.0) * np.log(y) - y / params.nu - special.gammaln(shape) - shape * np.log(params.nu)


def unit_loglik(params, x, schedule, increments):
    """Log-likelihood of one unit's k increments."""
    return float(np.sum(increment_loglik(params, x, schedule.deltas, increments)))


def q_value(z):
    """Per-increment information factor ``e^{2z} ψ₁(e^z)``."""
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore"):
        a = np.exp(z)
        out = a * a * trigamma(a)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"q(z) overflows for z={z}")
    return float(out) if out.ndim == 0 else out


def intensity(z, schedule):
    """λ(z) = Σ_j q(z + ln Δ_j); accepts scalar or array ``z``."""
    z = np.asarray(z, dtype=float)
    log_d = np.log(schedule.deltas)
    out = np.sum(q_value(z[..., None] + log_d), axis=-1)
    return float(out) if out.ndim == 0 else out


def unit_info(params, x, schedule):
    """Fisher information of (beta0, beta1) from one unit at stress ``x``."""
    f = np.array([1.0, x])
    return intensity(params.beta0 + params.beta1 * x, schedule) * np.outer(f, f)


def design_info(params, design, schedule):
    """Per-unit information matrix Σ w_i M(x_i) of an approximate design."""
    x = design.x
    lam = intensity(params.beta0 + params.beta1 * x, schedule)
    F = np.column_stack([np.ones_like(x), x])
    M = (F * (design.w * lam)[:, None]).T @ F
    return 0.5 * (M + M.T)  # exact symmetry despite summation order
