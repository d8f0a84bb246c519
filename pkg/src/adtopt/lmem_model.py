"""Linear mixed-effects degradation component with a random intercept.

Unit i at stress x is measured at t_0 = 0, t_1, ..., t_k with mean
``beta20 + beta21 x + beta22 t + beta23 x t``; the intercept varies between
units with variance ``sigma0_sq`` and errors have variance ``sigma_eps_sq``.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LmemComponentParams:
    beta20: float
    beta21: float
    beta22: float
    beta23: float
    sigma0_sq: float
    sigma_eps_sq: float
    y20: float

    def __post_init__(self):
        if not self.sigma0_sq > 0:
            raise ValueError(f"sigma0_sq must be positive, got {self.sigma0_sq!r}")
        if not self.sigma_eps_sq > 0:
            raise ValueError(f"sigma_eps_sq must be positive, got {self.sigma_eps_sq!r}")

    @property
    def beta(self):
        return np.array([self.beta20, self.beta21, self.beta22, self.beta23])

    @property
    def sigma0(self):
        return math.sqrt(self.sigma0_sq)

    def mean_path(self, x, t):
        return self.beta20 + self.beta21 * x + self.beta22 * t + self.beta23 * x * t

    def check_use_condition(self, x_u):
        if not self.beta22 + self.beta23 * x_u > 0:
            warnings.warn(
                f"mean path is not increasing at x_u={x_u}; failure time undefined",
                stacklevel=2,
            )


def time_design_matrix(schedule):
    """Rows (1, t_j) for j = 0..k with t_0 = 0 prepended."""
    t = np.concatenate(([0.0], schedule.times))
    return np.column_stack([np.ones_like(t), t])


def covariance_V(params, k):
    m = k + 1
    return params.sigma_eps_sq * np.eye(m) + params.sigma0_sq * np.ones((m, m))


def covariance_V_inv(params, k):
    # Sherman-Morrison for σ_ε² I + σ₀² 11ᵀ
    m = k + 1
    a = params.sigma_eps_sq
    b = a + m * params.sigma0_sq
    return (np.eye(m) - (params.sigma0_sq / b) * np.ones((m, m))) / a


def time_information(params, schedule):
    """DᵀV⁻¹D, the 2×2 information carried by the time profile."""
    D = time_design_matrix(schedule)
    return D.T @ covariance_V_inv(params, schedule.k) @ D


def stress_moment_matrix(design):
    """M(ξ) = Σ w_i (1, x_i)ᵀ(1, x_i); free of model parameters."""
    F = np.column_stack([np.ones(len(design)), design.x])
    return (F * design.w[:, None]).T @ F


def lmem_design_info(params, design, schedule):
    """Per-unit information of (beta20, beta21, beta22, beta23)."""
    return np.kron(time_information(params, schedule), stress_moment_matrix(design))


def variance_info(params, k):
    """Per-unit Fisher information of (sigma0_sq, sigma_eps_sq).

    Normal-theory ML information ½ tr(V⁻¹ ∂_a V V⁻¹ ∂_b V), evaluated through
    the two eigenvalues of the compound-symmetric V.
    """
    m = k + 1
    a = params.sigma_eps_sq
    b = a + m * params.sigma0_sq
    i00 = 0.5 * (m / b) ** 2
    i0e = 0.5 * m / b**2
    iee = 0.5 * ((m - 1) / a**2 + 1.0 / b**2)
    return np.array([[i00, i0e], [i0e, iee]])


def time_profile_var(schedule, params, t):
    """(1, t)(DᵀV⁻¹D)⁻¹(1, t)ᵀ."""
    A = time_information(params, schedule)
    det = A[0, 0] * A[1, 1] - A[0, 1] ** 2
    if not det > 1e-14 * (A[0, 0] + A[1, 1]) ** 2:
        raise np.linalg.LinAlgError("time information DᵀV⁻¹D is singular")
    return (A[1, 1] - 2.0 * t * A[0, 1] + t * t * A[0, 0]) / det
